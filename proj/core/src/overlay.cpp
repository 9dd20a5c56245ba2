#include "hbyield/overlay.hpp"

#include <algorithm>
#include <cmath>

#include "hbyield/errors.hpp"
#include "hbyield/numeric.hpp"

namespace hby {

Shift systematic_shift(const OverlayParams& p, double x_um, double y_um) {
    double alpha = p.alpha_urad * 1e-6;         // rad; rad * um = um
    double e = p.magnification_ppm * 1e-6;      // dimensionless strain
    Shift out;
    out.dx_um = p.tx_um - alpha * y_um + e * x_um;
    out.dy_um = p.ty_um + alpha * x_um + e * y_um;
    out.s_um = std::hypot(out.dx_um, out.dy_um);
    return out;
}

double contact_area(double s_um, double r1_um, double r2_um) {
    if (s_um <= r2_um - r1_um) return kPi * r1_um * r1_um;
    if (s_um >= r1_um + r2_um) return 0.0;
    auto clamped_acos = [](double v) { return std::acos(std::clamp(v, -1.0, 1.0)); };
    double s2 = s_um * s_um, r1sq = r1_um * r1_um, r2sq = r2_um * r2_um;
    double th1 = clamped_acos((s2 + r1sq - r2sq) / (2.0 * s_um * r1_um));
    double th2 = clamped_acos((s2 + r2sq - r1sq) / (2.0 * s_um * r2_um));
    double area = th1 * r1sq + th2 * r2sq - s_um * r1_um * std::sin(th1);
    return std::max(area, 0.0);
}

double max_allowed_misalignment(const OverlayParams& p) {
    double r1 = 0.5 * p.d1_um, r2 = 0.5 * p.d2_um;
    if (r1 > r2) throw ConfigError("top pad d1 must not exceed bottom pad d2");
    if (p.k_ca < 0.0 || p.k_ca > 1.0 || p.k_cd < 0.0 || p.k_cd > 1.0)
        throw ConfigError("k_ca and k_cd must lie in [0, 1]");

    double target = p.k_ca * kPi * r1 * r1;
    double s_cap = bisect_decreasing([&](double s) { return contact_area(s, r1, r2); }, target,
                                     std::max(0.0, r2 - r1), r1 + r2, 1e-9);
    double cd_cap = (1.0 - p.k_cd) * p.pitch_um - 0.5 * p.d1_um + (p.k_cd - 0.5) * p.d2_um;
    return std::min(s_cap, cd_cap);
}

double pad_pos(double delta_um, double s_i_um, double sigma1_um) {
    if (sigma1_um <= 0.0) return std::abs(s_i_um) < delta_um ? 1.0 : 0.0;
    double inv = 1.0 / (sigma1_um * std::sqrt(2.0));
    // Phi((d-s)/sg) - Phi((-d-s)/sg), written as an erfc difference so both
    // terms keep relative precision when the survival window sits far out
    double pos = 0.5 * (std::erfc((s_i_um - delta_um) * inv) - std::erfc((s_i_um + delta_um) * inv));
    return std::clamp(pos, 0.0, 1.0);
}

std::vector<std::pair<double, double>> functional_corner_hull(const PadBlockGrid& grid) {
    std::vector<std::pair<double, double>> pts;
    for (int r = 0; r < grid.rows(); ++r)
        for (int c = 0; c < grid.cols(); ++c) {
            if (!grid.is_functional(r, c)) continue;
            double xs[2] = {grid.cell_x0(c), grid.cell_x1(c)};
            double ys[2] = {grid.cell_y0(r), grid.cell_y1(r)};
            for (double x : xs)
                for (double y : ys) pts.emplace_back(x, y);
        }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() <= 2) return pts;
    auto cross = [](const std::pair<double, double>& o, const std::pair<double, double>& a,
                    const std::pair<double, double>& b) {
        return (a.first - o.first) * (b.second - o.second) -
               (a.second - o.second) * (b.first - o.first);
    };
    std::vector<std::pair<double, double>> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& pt : pts) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pt) <= 0) --k;
        hull[k++] = pt;
    }
    for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

namespace {

double max_shift_on_hull(const std::vector<std::pair<double, double>>& hull,
                         const OverlayParams& p, double cx_um, double cy_um) {
    double alpha = p.alpha_urad * 1e-6;
    double e = p.magnification_ppm * 1e-6;
    double best = 0.0;
    for (const auto& [hx, hy] : hull) {
        double x = cx_um + hx;
        double y = cy_um + hy;
        double dx = p.tx_um - alpha * y + e * x;
        double dy = p.ty_um + alpha * x + e * y;
        best = std::max(best, dx * dx + dy * dy);
    }
    return std::sqrt(best);
}

} // namespace

double max_functional_shift_um(const PadBlockGrid& grid, const OverlayParams& p, double cx_um,
                               double cy_um) {
    std::vector<std::pair<double, double>> hull = functional_corner_hull(grid);
    if (hull.empty()) throw GeometryError("layout has no functional pad block");
    return max_shift_on_hull(hull, p, cx_um, cy_um);
}

double die_pos_overlay(const PadBlockGrid& grid, const OverlayParams& p, double cx_um,
                       double cy_um) {
    double delta = max_allowed_misalignment(p);
    return pad_pos(delta, max_functional_shift_um(grid, p, cx_um, cy_um), p.sigma1_um);
}

double yield_ovl_w2w(const WaferSpec& wafer, const DieSpec& die, const PadBlockGrid& grid,
                     const OverlayParams& p) {
    std::vector<DieSite> sites = generate_wafer_map(wafer, die);
    if (sites.empty()) throw GeometryError("no die fits inside the usable wafer radius");
    std::vector<std::pair<double, double>> hull = functional_corner_hull(grid);
    if (hull.empty()) throw GeometryError("layout has no functional pad block");
    double delta = max_allowed_misalignment(p);
    double acc = 0.0;
    for (const DieSite& site : sites)
        acc += pad_pos(delta, max_shift_on_hull(hull, p, site.cx_um, site.cy_um), p.sigma1_um);
    return acc / static_cast<double>(sites.size());
}

double yield_ovl_d2w(const PadBlockGrid& grid, const OverlayParams& p) {
    return die_pos_overlay(grid, p, 0.0, 0.0);
}

} // namespace hby
