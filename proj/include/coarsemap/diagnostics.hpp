#ifndef COARSEMAP_DIAGNOSTICS_HPP
#define COARSEMAP_DIAGNOSTICS_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace coarsemap {

/// A structured diagnostic record for elements that were dropped or
/// adjusted while ingesting crowd-sourced data.
struct Warning {
    std::string element_kind;  // "node", "way", "relation", ...
    std::int64_t element_id = 0;
    std::string reason;
};

/// Collects warnings emitted by parsing and preprocessing stages.
/// Passing nullptr where a WarningLog* is accepted silently drops them.
class WarningLog {
public:
    void add(std::string kind, std::int64_t id, std::string reason) {
        records_.push_back({std::move(kind), id, std::move(reason)});
    }

    const std::vector<Warning>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }
    void clear() { records_.clear(); }

private:
    std::vector<Warning> records_;
};

}  // namespace coarsemap

#endif
