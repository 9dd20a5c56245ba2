#include "hbyield/model.hpp"

#include <chrono>
#include <cmath>

#include "hbyield/overlay.hpp"
#include "hbyield/recess.hpp"

namespace hby {

namespace {

void append_warning(std::string* warning, const std::string& note) {
    if (!warning || note.empty()) return;
    if (!warning->empty()) *warning += "; ";
    *warning += note;
}

CriticalAreaLUT obtain_lut(const ProcessConfig& c, const Layout& layout, LutCache* cache,
                           std::string* warning) {
    const DefectParams dp = defect_params(c);
    if (c.mode == BondMode::w2w) {
        std::vector<double> lg =
            default_l_grid(wafer_spec(c).radius_um, dp, static_cast<int>(c.length_points));
        std::vector<double> th = default_theta_grid(static_cast<int>(c.orientation_points));
        std::uint64_t fp = lut_fingerprint(layout, LutMode::w2w, lg, th, dp);
        auto build = [&] { return build_lut_w2w(layout, lg, th, dp); };
        if (!cache) return build();
        std::string note;
        CriticalAreaLUT lut = cache->get(fp, build, &note);
        append_warning(warning, note);
        return lut;
    }
    std::vector<double> rg = default_r_grid(die_spec(c), dp, static_cast<int>(c.radius_points));
    std::uint64_t fp = lut_fingerprint(layout, LutMode::d2w, rg, {}, dp);
    auto build = [&] { return build_lut_d2w(layout, rg); };
    if (!cache) return build();
    std::string note;
    CriticalAreaLUT lut = cache->get(fp, build, &note);
    append_warning(warning, note);
    return lut;
}

} // namespace

double model_yield_df(const ProcessConfig& c, const Layout& layout, LutCache* cache,
                      std::string* warning) {
    const DefectParams dp = defect_params(c);
    CriticalAreaLUT lut = obtain_lut(c, layout, cache, warning);
    LambdaResult res = c.mode == BondMode::w2w
                           ? lambda_w2w(lut, wafer_spec(c).radius_um, dp)
                           : lambda_d2w(lut, die_spec(c), dp);
    append_warning(warning, res.warning);
    return std::exp(-res.lambda);
}

YieldReport run_model(const ProcessConfig& c, const Layout& layout, LutCache* cache,
                      std::string* warning) {
    validate(c);
    const auto start = std::chrono::steady_clock::now();
    YieldReport r;
    r.source = "model";
    r.seed = c.seed;

    const OverlayParams op = overlay_params(c);
    r.y_ovl = c.mode == BondMode::w2w
                  ? yield_ovl_w2w(wafer_spec(c), die_spec(c), layout.grid, op)
                  : yield_ovl_d2w(layout.grid, op);

    const double d_cu = cu_pattern_density(layout.grid, c.pitch_um, c.bottom_pad_um);
    r.y_cr = yield_recess(layout, recess_params(c), d_cu, c.pitch_um);

    r.y_df = model_yield_df(c, layout, cache, warning);

    r.y_total = r.y_ovl * r.y_cr * r.y_df;
    r.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

} // namespace hby
