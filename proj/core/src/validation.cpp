#include "hbyield/validation.hpp"

#include <fstream>
#include <iomanip>
#include <utility>

#include "hbyield/errors.hpp"
#include "hbyield/model.hpp"
#include "hbyield/simulator.hpp"

namespace hby {
namespace {

ProcessConfig base_set(BondMode mode, std::uint64_t seed) {
    ProcessConfig c;
    c.mode = mode;
    c.seed = seed;
    // Budgets chosen so the per-set sampling CV stays near 0.3% in both
    // modes: 40 whole wafers, or 20000 independently placed dies.
    c.n_wafers = 40;
    c.n_dies = 20000;
    return c;
}

} // namespace

std::vector<ValidationSet> validation_manifest() {
    std::vector<ValidationSet> sets;
    auto add = [&sets](const std::string& id, BondMode mode, std::uint64_t seed,
                       auto&& tweak) {
        ProcessConfig c = base_set(mode, seed);
        tweak(c);
        sets.push_back({id, std::move(c)});
    };
    auto none = [](ProcessConfig&) {};
    auto low_density = [](ProcessConfig& c) { c.particle_density_per_cm2 = 0.02; };
    auto high_density = [](ProcessConfig& c) { c.particle_density_per_cm2 = 0.5; };
    auto small_die = [](ProcessConfig& c) {
        c.particle_density_per_cm2 = 0.2;
        c.thickness_exponent = 2.5;
        c.die_width_um = 5000.0;
        c.die_height_um = 5000.0;
    };
    auto shift_x = [](ProcessConfig& c) { c.translation_x_mean_nm = 60.0; };
    auto tilt = [](ProcessConfig& c) {
        c.rotation_mean_urad = 0.08;
        c.translation_y_mean_nm = -60.0;
    };
    auto recess_deep = [](ProcessConfig& c) {
        c.recess_top_mean_nm = 15.5;
        c.recess_bot_mean_nm = 16.0;
    };
    auto recess_spread = [](ProcessConfig& c) {
        c.recess_top_mean_nm = 12.0;
        c.recess_top_sigma_nm = 2.0;
        c.recess_bot_mean_nm = 12.0;
        c.recess_bot_sigma_nm = 2.0;
    };
    auto fine_pitch = [](ProcessConfig& c) {
        c.pitch_um = 0.3;
        c.top_pad_um = 0.09;
        c.bottom_pad_um = 0.15;
    };

    add("w01_baseline", BondMode::w2w, 101, none);
    add("w02_density_low", BondMode::w2w, 102, low_density);
    add("w03_density_high", BondMode::w2w, 103, high_density);
    add("w04_small_die", BondMode::w2w, 104, small_die);
    add("w05_shift_x", BondMode::w2w, 105, shift_x);
    add("w06_tilt", BondMode::w2w, 106, tilt);
    add("w07_warpage", BondMode::w2w, 107, [](ProcessConfig& c) {
        c.mag_source = MagSource::warpage;
        c.warpage_um = 15.0;
    });
    add("w08_random_wide", BondMode::w2w, 108,
        [](ProcessConfig& c) { c.random_misalign_sigma_nm = 60.0; });
    add("w09_recess_deep", BondMode::w2w, 109, recess_deep);
    add("w10_recess_spread", BondMode::w2w, 110, recess_spread);
    add("w11_fine_pitch", BondMode::w2w, 111, fine_pitch);
    add("w12_centralized", BondMode::w2w, 112, [](ProcessConfig& c) {
        c.pattern = PatternKind::centralized;
        c.critical_fraction = 0.3;
        c.redundant_fraction = 0.4;
        c.dummy_fraction = 0.3;
        c.main_void_in_w2w = true;
        c.particle_density_per_cm2 = 0.3;
    });

    add("d01_baseline", BondMode::d2w, 201, none);
    add("d02_density_low", BondMode::d2w, 202, low_density);
    add("d03_density_high", BondMode::d2w, 203, high_density);
    add("d04_small_die", BondMode::d2w, 204, small_die);
    add("d05_shift_x", BondMode::d2w, 205, shift_x);
    add("d06_tilt", BondMode::d2w, 206, tilt);
    add("d07_magnification", BondMode::d2w, 207,
        [](ProcessConfig& c) { c.magnification_mean_ppm = 3.0; });
    add("d08_random_wide", BondMode::d2w, 208,
        [](ProcessConfig& c) { c.random_misalign_sigma_nm = 80.0; });
    add("d09_recess_deep", BondMode::d2w, 209, recess_deep);
    add("d10_recess_spread", BondMode::d2w, 210, recess_spread);
    add("d11_fine_pitch", BondMode::d2w, 211, fine_pitch);
    add("d12_peripheral", BondMode::d2w, 212, [](ProcessConfig& c) {
        c.pattern = PatternKind::peripheral;
        c.critical_fraction = 0.3;
        c.redundant_fraction = 0.4;
        c.dummy_fraction = 0.3;
        c.particle_density_per_cm2 = 0.3;
    });
    return sets;
}

ValidationResult run_validation(const std::vector<ValidationSet>& sets,
                                Evaluator model_eval, Evaluator sim_eval) {
    if (sets.size() < 2)
        throw ConfigError("validation needs at least 2 parameter sets, got " +
                          std::to_string(sets.size()));
    if (!model_eval)
        model_eval = [](const ProcessConfig& c, const Layout& layout) {
            return run_model(c, layout);
        };
    if (!sim_eval)
        sim_eval = [](const ProcessConfig& c, const Layout& layout) {
            return simulate(c, layout);
        };

    ValidationResult out;
    std::map<std::string, double> sq_sum;
    for (const ValidationSet& set : sets) {
        const Layout layout = make_layout(set.config);
        const YieldReport m = model_eval(set.config, layout);
        const YieldReport s = sim_eval(set.config, layout);
        const std::pair<std::string, std::pair<double, double>> comps[] = {
            {"ovl", {m.y_ovl, s.y_ovl}},
            {"cr", {m.y_cr, s.y_cr}},
            {"df", {m.y_df, s.y_df}},
            {"total", {m.y_total, s.y_total}},
        };
        for (const auto& [name, ys] : comps) {
            out.rows.push_back({set.id, name, ys.first, ys.second});
            const double d = ys.first - ys.second;
            sq_sum[name] += d * d;
        }
    }
    for (const auto& [name, sum] : sq_sum)
        out.mse[name] = sum / static_cast<double>(sets.size());
    return out;
}

void save_validation_csv(const ValidationResult& result, const std::string& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw ConfigError("cannot write validation file '" + path + "'");
    f << "set_id,component,y_model,y_sim\n";
    f << std::setprecision(10);
    for (const ValidationRow& r : result.rows)
        f << r.set_id << ',' << r.component << ',' << r.y_model << ',' << r.y_sim
          << '\n';
}

} // namespace hby
