#include "coarsemap/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "coarsemap/errors.hpp"

namespace coarsemap {

namespace {

void append_fixed(std::string& out, double value, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, value);
    out += buf;
}

void append_stats_row(std::string& out, const GroupStats& stats) {
    out += std::to_string(stats.count);
    out += ',';
    append_fixed(out, stats.min_ade, 9);
    out += ',';
    append_fixed(out, stats.min_fde, 9);
    out += ',';
    append_fixed(out, stats.miss_rate, 9);
    out += '\n';
}

// --- SVG scaffolding ----------------------------------------------------

constexpr int kWidth = 720;
constexpr int kHeight = 420;
constexpr double kLeft = 70.0;
constexpr double kRight = 700.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 370.0;

std::string svg_open(const std::string& title) {
    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(kWidth) +
           "\" height=\"" + std::to_string(kHeight) + "\" viewBox=\"0 0 " +
           std::to_string(kWidth) + " " + std::to_string(kHeight) + "\">\n";
    out += "  <rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
    out += "  <text x=\"" + std::to_string(kWidth / 2) +
           "\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">" +
           title + "</text>\n";
    return out;
}

void svg_axes(std::string& out) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "  <line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#222222\"/>\n"
                  "  <line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#222222\"/>\n",
                  kLeft, kBottom, kRight, kBottom, kLeft, kTop, kLeft, kBottom);
    out += buf;
}

void svg_y_ticks(std::string& out, double y_max) {
    char buf[256];
    for (int i = 0; i <= 4; ++i) {
        const double value = y_max * i / 4.0;
        const double y = kBottom - (kBottom - kTop) * i / 4.0;
        std::snprintf(buf, sizeof buf,
                      "  <line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" "
                      "stroke=\"#cccccc\"/>\n"
                      "  <text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" font-size=\"11\" "
                      "text-anchor=\"end\">%.2f</text>\n",
                      kLeft, y, kRight, y, kLeft - 8.0, y + 4.0, value);
        out += buf;
    }
}

std::string svg_bar_chart(const std::string& title,
                          const std::vector<std::pair<std::string, GroupStats>>& groups) {
    std::string out = svg_open(title);
    double y_max = 0.0;
    for (const auto& [name, stats] : groups) y_max = std::max({y_max, stats.min_ade, stats.min_fde});
    if (y_max <= 0.0) y_max = 1.0;
    y_max *= 1.15;

    svg_y_ticks(out, y_max);
    svg_axes(out);

    const double span = kRight - kLeft;
    const auto n = static_cast<double>(groups.size());
    char buf[512];
    for (std::size_t i = 0; i < groups.size(); ++i) {
        const auto& [name, stats] = groups[i];
        const double slot = span / n;
        const double x0 = kLeft + slot * static_cast<double>(i);
        const double bar_w = std::min(40.0, slot / 3.0);
        const double gap = (slot - 2.0 * bar_w) / 2.0;
        const double ade_h = (kBottom - kTop) * stats.min_ade / y_max;
        const double fde_h = (kBottom - kTop) * stats.min_fde / y_max;

        std::snprintf(buf, sizeof buf,
                      "  <rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" "
                      "fill=\"#36598c\"/>\n"
                      "  <rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" "
                      "fill=\"#7aa0cc\"/>\n",
                      x0 + gap, kBottom - ade_h, bar_w, ade_h,
                      x0 + gap + bar_w, kBottom - fde_h, bar_w, fde_h);
        out += buf;
        std::snprintf(buf, sizeof buf,
                      "  <text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" font-size=\"10\" "
                      "text-anchor=\"middle\">%.3f</text>\n"
                      "  <text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" font-size=\"10\" "
                      "text-anchor=\"middle\">%.3f</text>\n",
                      x0 + gap + bar_w / 2.0, kBottom - ade_h - 4.0, stats.min_ade,
                      x0 + gap + 1.5 * bar_w, kBottom - fde_h - 4.0, stats.min_fde);
        out += buf;
        std::snprintf(buf, sizeof buf,
                      "  <text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" font-size=\"12\" "
                      "text-anchor=\"middle\">%s (n=%zu)</text>\n",
                      x0 + slot / 2.0, kBottom + 18.0, name.c_str(), stats.count);
        out += buf;
    }

    out += "  <rect x=\"590\" y=\"50\" width=\"12\" height=\"12\" fill=\"#36598c\"/>\n";
    out += "  <text x=\"608\" y=\"61\" font-family=\"sans-serif\" font-size=\"12\">minADE</text>\n";
    out += "  <rect x=\"590\" y=\"70\" width=\"12\" height=\"12\" fill=\"#7aa0cc\"/>\n";
    out += "  <text x=\"608\" y=\"81\" font-family=\"sans-serif\" font-size=\"12\">minFDE</text>\n";
    out += "</svg>\n";
    return out;
}

}  // namespace

std::string aggregate_csv(const EvaluationReport& report) {
    std::string out = "count,min_ade,min_fde,miss_rate\n";
    append_stats_row(out, report.overall);
    return out;
}

std::string per_class_csv(const EvaluationReport& report) {
    std::string out = "class,count,min_ade,min_fde,miss_rate\n";
    for (const auto& [cls, stats] : report.per_class) {
        out += std::string(to_string(cls));
        out += ',';
        append_stats_row(out, stats);
    }
    return out;
}

std::string per_context_csv(const EvaluationReport& report) {
    std::string out = "context,count,min_ade,min_fde,miss_rate\n";
    for (const auto& [ctx, stats] : report.per_context) {
        out += std::string(to_string(ctx));
        out += ',';
        append_stats_row(out, stats);
    }
    return out;
}

std::string per_frame_csv(const EvaluationReport& report, double timestep) {
    std::string out = "frame,horizon_s,mean_de\n";
    for (std::size_t i = 0; i < report.per_frame.size(); ++i) {
        out += std::to_string(i + 1);
        out += ',';
        append_fixed(out, static_cast<double>(i + 1) * timestep, 9);
        out += ',';
        append_fixed(out, report.per_frame[i], 9);
        out += '\n';
    }
    return out;
}

std::string per_frame_svg(const EvaluationReport& report, double timestep) {
    std::string out = svg_open("Mean displacement error by prediction horizon");
    double y_max = 0.0;
    for (const double v : report.per_frame) y_max = std::max(y_max, v);
    if (y_max <= 0.0) y_max = 1.0;
    y_max *= 1.1;

    svg_y_ticks(out, y_max);
    svg_axes(out);

    const auto n = report.per_frame.size();
    const double x_span = static_cast<double>(n) * timestep;
    char buf[256];
    for (std::size_t i = 0; i < n; i += std::max<std::size_t>(1, n / 6)) {
        const double horizon = static_cast<double>(i + 1) * timestep;
        const double x = kLeft + (kRight - kLeft) * horizon / x_span;
        std::snprintf(buf, sizeof buf,
                      "  <text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" font-size=\"11\" "
                      "text-anchor=\"middle\">%.1f s</text>\n",
                      x, kBottom + 18.0, horizon);
        out += buf;
    }

    out += "  <polyline fill=\"none\" stroke=\"#36598c\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < n; ++i) {
        const double horizon = static_cast<double>(i + 1) * timestep;
        const double x = kLeft + (kRight - kLeft) * horizon / x_span;
        const double y = kBottom - (kBottom - kTop) * report.per_frame[i] / y_max;
        std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", i == 0 ? "" : " ", x, y);
        out += buf;
    }
    out += "\"/>\n";
    std::snprintf(buf, sizeof buf,
                  "  <text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" font-size=\"12\" "
                  "text-anchor=\"middle\">horizon</text>\n"
                  "  <text x=\"18\" y=\"%.2f\" font-family=\"sans-serif\" font-size=\"12\" "
                  "transform=\"rotate(-90 18 %.2f)\" text-anchor=\"middle\">error (m)</text>\n",
                  (kLeft + kRight) / 2.0, kBottom + 36.0, (kTop + kBottom) / 2.0,
                  (kTop + kBottom) / 2.0);
    out += buf;
    out += "</svg>\n";
    return out;
}

std::string per_class_svg(const EvaluationReport& report) {
    std::vector<std::pair<std::string, GroupStats>> groups;
    for (const auto& [cls, stats] : report.per_class)
        groups.emplace_back(std::string(to_string(cls)), stats);
    return svg_bar_chart("Metrics by agent class", groups);
}

std::string per_context_svg(const EvaluationReport& report) {
    std::vector<std::pair<std::string, GroupStats>> groups;
    for (const auto& [ctx, stats] : report.per_context)
        groups.emplace_back(std::string(to_string(ctx)), stats);
    return svg_bar_chart("Metrics by road context", groups);
}

void write_text_files(const std::vector<std::pair<std::string, std::string>>& files,
                      const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::vector<std::filesystem::path> written;
    try {
        for (const auto& [name, content] : files) {
            const std::filesystem::path path = out_dir / name;
            std::ofstream out(path, std::ios::binary | std::ios::trunc);
            if (!out) throw Error("cannot open output file for writing: " + path.string());
            written.push_back(path);
            out << content;
            out.flush();
            if (!out) throw Error("failed writing output file: " + path.string());
        }
    } catch (...) {
        std::error_code ec;
        for (const auto& path : written) std::filesystem::remove(path, ec);
        throw;
    }
}

void write_report_files(const EvaluationReport& report, double timestep,
                        const std::filesystem::path& out_dir) {
    write_text_files({{"aggregate.csv", aggregate_csv(report)},
                      {"per_class.csv", per_class_csv(report)},
                      {"per_context.csv", per_context_csv(report)},
                      {"per_frame.csv", per_frame_csv(report, timestep)},
                      {"per_frame.svg", per_frame_svg(report, timestep)},
                      {"per_class.svg", per_class_svg(report)},
                      {"per_context.svg", per_context_svg(report)}},
                     out_dir);
}

}  // namespace coarsemap
