#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "hbyield/config.hpp"
#include "hbyield/layout.hpp"
#include "hbyield/report.hpp"

namespace hby {

/// One named parameter set of the model-vs-simulation cross check.
struct ValidationSet {
    std::string id;
    ProcessConfig config;
};

/// The built-in desk-scale manifest: 24 sets (12 per bonding mode) spanning
/// particle density 0.02..0.5 /cm2 (5x around baseline on a log scale),
/// +-3-sigma-scale systematic distortions, widened random misalignment,
/// recess operating points, fine pitch, a smaller die, and patterned
/// layouts with redundancy. Every set carries its own [sim] sample budget
/// and seed so a run is reproducible from the returned configs alone.
std::vector<ValidationSet> validation_manifest();

/// One scatter point: a yield component of one set under both evaluators.
struct ValidationRow {
    std::string set_id;
    std::string component; // "ovl", "cr", "df", "total"
    double y_model = 0.0;
    double y_sim = 0.0;
};

struct ValidationResult {
    std::vector<ValidationRow> rows; // 4 rows per set, manifest order
    std::map<std::string, double> mse; // per component over all sets
};

/// Evaluation hook; defaults below use the analytical model and the Monte
/// Carlo simulator, test doubles may substitute either side.
using Evaluator = std::function<YieldReport(const ProcessConfig&, const Layout&)>;

/// Evaluates every set with both evaluators and collects the scatter table
/// plus the per-component mean squared error. Throws ConfigError when
/// fewer than two sets are given (a scatter needs at least two points).
ValidationResult run_validation(const std::vector<ValidationSet>& sets,
                                Evaluator model_eval = {}, Evaluator sim_eval = {});

/// Long-format CSV, header exactly `set_id,component,y_model,y_sim`.
void save_validation_csv(const ValidationResult& result, const std::string& path);

} // namespace hby
