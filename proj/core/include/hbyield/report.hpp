#pragma once

#include <cstdint>
#include <string>

namespace hby {

/// Outcome of one analytical evaluation or simulation run.  For the model
/// source the total is the exact product of the three components; the
/// simulator reports mean survival rates and its convergence statistics.
struct YieldReport {
    double y_ovl = 1.0;
    double y_cr = 1.0;
    double y_df = 1.0;
    double y_total = 1.0;
    std::string source = "model"; // "model" or "simulation"
    double runtime_s = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t n_wafers = 0; // samples drawn (0 for the model)
    std::uint64_t n_dies = 0;
    double cv = 0.0; // achieved batch CV (0 for the model)

    bool operator==(const YieldReport&) const = default;
};

std::string to_json(const YieldReport& r);
YieldReport report_from_json(const std::string& text);
void save_report_json(const YieldReport& r, const std::string& path);

} // namespace hby
