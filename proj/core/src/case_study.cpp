#include "hbyield/case_study.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "hbyield/errors.hpp"
#include "hbyield/model.hpp"
#include "hbyield/report.hpp"

namespace hby {
namespace {

constexpr BondMode kModes[] = {BondMode::w2w, BondMode::d2w};

double side_um(double chiplet_mm2) { return std::sqrt(chiplet_mm2 * 1e6); }

void all_critical(ProcessConfig& c) {
    c.pattern = PatternKind::full;
    c.critical_fraction = 1.0;
    c.redundant_fraction = 0.0;
    c.dummy_fraction = 0.0;
}

/// Emits one row per yield component under a fixed row prefix.
void emit(std::ostream& out, const std::string& prefix, const YieldReport& r) {
    out << prefix << "ovl," << r.y_ovl << '\n';
    out << prefix << "cr," << r.y_cr << '\n';
    out << prefix << "df," << r.y_df << '\n';
    out << prefix << "total," << r.y_total << '\n';
}

std::string study_defect_density(const ProcessConfig& base, LutCache* cache) {
    std::ostringstream out;
    out << std::setprecision(10) << "mode,density_per_cm2,chiplet_mm2,component,yield\n";
    for (BondMode mode : kModes)
        for (double density : {0.01, 0.1})
            for (double mm2 : {10.0, 50.0, 100.0}) {
                ProcessConfig c = base;
                c.mode = mode;
                c.particle_density_per_cm2 = density;
                c.die_width_um = c.die_height_um = side_um(mm2);
                all_critical(c);
                YieldReport r = run_model(c, make_layout(c), cache);
                std::ostringstream prefix;
                prefix << std::setprecision(10) << to_string(mode) << ',' << density << ','
                       << mm2 << ',';
                emit(out, prefix.str(), r);
            }
    return out.str();
}

std::string study_pitch(const ProcessConfig& base, LutCache* cache) {
    std::ostringstream out;
    out << std::setprecision(10) << "mode,pitch_um,component,yield\n";
    for (BondMode mode : kModes)
        for (double pitch : {0.3, 1.0}) {
            ProcessConfig c = base;
            c.mode = mode;
            c.pitch_um = pitch;
            c.top_pad_um = 0.3 * pitch;
            c.bottom_pad_um = 0.5 * pitch;
            YieldReport r = run_model(c, make_layout(c), cache);
            std::ostringstream prefix;
            prefix << std::setprecision(10) << to_string(mode) << ',' << pitch << ',';
            emit(out, prefix.str(), r);
        }
    return out.str();
}

std::string study_chiplet_size(const ProcessConfig& base, LutCache* cache) {
    std::ostringstream out;
    out << std::setprecision(10) << "mode,chiplet_mm2,n_chiplets,component,yield\n";
    for (BondMode mode : kModes)
        for (double mm2 : {10.0, 50.0, 100.0}) {
            const long n_chiplets = std::lround(1000.0 / mm2);
            ProcessConfig c = base;
            c.mode = mode;
            c.die_width_um = c.die_height_um = side_um(mm2);
            all_critical(c);
            YieldReport r = run_model(c, make_layout(c), cache);
            std::ostringstream prefix;
            prefix << std::setprecision(10) << to_string(mode) << ',' << mm2 << ','
                   << n_chiplets << ',';
            emit(out, prefix.str(), r);
            // only d2w assembles a 1000 mm2 system chiplet by chiplet
            if (mode == BondMode::d2w)
                out << prefix.str() << "system,"
                    << std::pow(r.y_total, static_cast<double>(n_chiplets)) << '\n';
        }
    return out.str();
}

std::string study_pad_layouts(const ProcessConfig& base, LutCache* cache) {
    constexpr std::pair<PatternKind, const char*> kPatterns[] = {
        {PatternKind::full, "full"},
        {PatternKind::sparse, "sparse"},
        {PatternKind::peripheral, "peripheral"},
        {PatternKind::centralized, "centralized"},
    };
    std::ostringstream out;
    out << std::setprecision(10) << "mode,pattern,component,yield\n";
    for (BondMode mode : kModes)
        for (auto [pattern, pattern_name] : kPatterns) {
            ProcessConfig c = base;
            c.mode = mode;
            c.pitch_um = 0.3;
            c.top_pad_um = 0.09;
            c.bottom_pad_um = 0.15;
            c.pattern = pattern;
            c.critical_fraction = 0.2;
            c.redundant_fraction = 0.5;
            c.dummy_fraction = 0.3;
            YieldReport r = run_model(c, make_layout(c), cache);
            emit(out, std::string(to_string(mode)) + ',' + pattern_name + ',', r);
        }
    return out.str();
}

std::string study_redundancy_spacing(const ProcessConfig& base, LutCache* cache) {
    constexpr double kBlockUm = 200.0;
    std::ostringstream out;
    out << std::setprecision(10) << "mode,scheme,spacing_um,component,yield\n";
    for (BondMode mode : kModes) {
        ProcessConfig c = base;
        c.mode = mode;
        // the replica blocks are the grid, so the gridding must match them
        c.resolution_w2w_um = kBlockUm;
        c.resolution_d2w_um = kBlockUm;
        validate(c);
        const DieSpec die = die_spec(c);

        Layout none = build_random_redundant_layout(die, kBlockUm, 0.0, c.layout_seed);
        YieldReport r_none = run_model(c, none, cache);
        emit(out, std::string(to_string(mode)) + ",none,0,", r_none);

        for (double spacing : {200.0, 400.0, 800.0}) {
            Layout lay = build_random_redundant_layout(die, kBlockUm, spacing, c.layout_seed);
            YieldReport r = run_model(c, lay, cache);
            std::ostringstream prefix;
            prefix << std::setprecision(10) << to_string(mode) << ",dedicated," << spacing
                   << ',';
            emit(out, prefix.str(), r);
        }

        // A 20:1 shared replica sits within one pad pitch of its mains, so
        // the whole group falls inside any void that reaches a member: voids
        // start around the block scale, orders of magnitude wider. The scheme
        // is therefore defect-equivalent to no redundancy and is reported
        // from the same all-critical grid.
        emit(out, std::string(to_string(mode)) + ",shared_20to1,0,", r_none);
    }
    return out.str();
}

} // namespace

std::vector<std::string> case_study_names() {
    return {"defect_density", "pitch", "chiplet_size", "pad_layouts", "redundancy_spacing"};
}

std::string run_case_study(const std::string& name, const ProcessConfig& base,
                           LutCache* cache) {
    if (name == "defect_density") return study_defect_density(base, cache);
    if (name == "pitch") return study_pitch(base, cache);
    if (name == "chiplet_size") return study_chiplet_size(base, cache);
    if (name == "pad_layouts") return study_pad_layouts(base, cache);
    if (name == "redundancy_spacing") return study_redundancy_spacing(base, cache);
    throw ConfigError("unknown case study '" + name + "'");
}

} // namespace hby
