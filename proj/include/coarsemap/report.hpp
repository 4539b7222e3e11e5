#ifndef COARSEMAP_REPORT_HPP
#define COARSEMAP_REPORT_HPP

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "coarsemap/metrics.hpp"

namespace coarsemap {

/// Writes (name, content) pairs into out_dir. If any write fails, files
/// written by this call are removed before the error is rethrown, so a
/// failed run never leaves partial output behind.
void write_text_files(const std::vector<std::pair<std::string, std::string>>& files,
                      const std::filesystem::path& out_dir);

/// CSV renderings of an evaluation report. Numbers are written with 9
/// fractional digits so repeated runs produce identical bytes.
std::string aggregate_csv(const EvaluationReport& report);
std::string per_class_csv(const EvaluationReport& report);
std::string per_context_csv(const EvaluationReport& report);
std::string per_frame_csv(const EvaluationReport& report, double timestep);

/// Self-contained SVG figures (no external assets, deterministic bytes).
std::string per_frame_svg(const EvaluationReport& report, double timestep);
std::string per_class_svg(const EvaluationReport& report);
std::string per_context_svg(const EvaluationReport& report);

/// Writes all report files (4 CSVs, 3 SVGs) into out_dir. If any write
/// fails, files written by this call are removed before the error is
/// rethrown, so a failed run never leaves partial output behind.
void write_report_files(const EvaluationReport& report, double timestep,
                        const std::filesystem::path& out_dir);

}  // namespace coarsemap

#endif
