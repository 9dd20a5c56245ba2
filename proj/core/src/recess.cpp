#include "hbyield/recess.hpp"

#include <algorithm>
#include <cmath>

#include "hbyield/errors.hpp"
#include "hbyield/numeric.hpp"

namespace hby {

double adhesion_parameter(const RecessParams& p) {
    if (p.e_d_gpa <= 0.0 || p.w_jm2 <= 0.0 || p.r_z_um <= 0.0 || p.sigma_z_nm < 0.0)
        throw ConfigError("asperity model needs positive E_d, w, R_z and sigma_z >= 0");
    double e_star = p.e_d_gpa * 1e9 / (2.0 * (1.0 - p.nu_d * p.nu_d));
    double sigma_eff = std::sqrt(2.0) * p.sigma_z_nm * 1e-9;
    return e_star * std::pow(sigma_eff, 1.5) / (p.w_jm2 * std::sqrt(p.r_z_um * 1e-6));
}

double effective_contact_area(const RecessParams& p) {
    double theta = adhesion_parameter(p);
    if (p.bond_curve.empty()) return 1.0 / (1.0 + sq(theta / 3.0));

    const auto& c = p.bond_curve;
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (c[i].second <= 0.0 || c[i].second > 1.0)
            throw ConfigError("bond curve fractions must lie in (0, 1]");
        if (i > 0 && c[i].first <= c[i - 1].first)
            throw ConfigError("bond curve abscissae must be strictly increasing");
    }
    if (theta <= c.front().first) return c.front().second;
    if (theta >= c.back().first) return c.back().second;
    auto hi = std::upper_bound(c.begin(), c.end(), theta,
                               [](double v, const auto& pt) { return v < pt.first; });
    auto lo = hi - 1;
    double t = (theta - lo->first) / (hi->first - lo->first);
    return lo->second + t * (hi->second - lo->second);
}

double tolerable_peeling_stress_pa(const RecessParams& p) {
    if (p.t_d_um <= 0.0) throw ConfigError("dielectric thickness must be positive");
    return effective_contact_area(p) * std::sqrt(2.0 * p.e_d_gpa * 1e9 * p.w_jm2 / (p.t_d_um * 1e-6));
}

double tolerable_peeling_stress_mpa(const RecessParams& p) {
    return tolerable_peeling_stress_pa(p) * 1e-6;
}

HeightBounds height_bounds(const RecessParams& p, double d_cu) {
    if (d_cu <= 0.0 || d_cu > 1.0) throw ConfigError("Cu pattern density must lie in (0, 1]");
    HeightBounds b;
    b.zeta_minus_nm = -p.cu_expansion_nm;
    b.h_peel_nm = p.h0_nm + tolerable_peeling_stress_pa(p) / (p.k_peel_n_m3 * d_cu) * 1e9;
    b.zeta_plus_nm = std::min(0.0, b.h_peel_nm);
    return b;
}

double pad_fail_recess(const RecessParams& p, double d_cu) {
    HeightBounds b = height_bounds(p, d_cu);
    if (b.zeta_minus_nm >= b.zeta_plus_nm) return 1.0;
    double mu = p.mu_top_nm + p.mu_bot_nm;
    double sigma = std::hypot(p.sigma_top_nm, p.sigma_bot_nm);
    if (sigma == 0.0) return (b.zeta_minus_nm < mu && mu < b.zeta_plus_nm) ? 0.0 : 1.0;
    double upper_tail = normal_cdf(-(b.zeta_plus_nm - mu) / sigma);
    double lower_tail = normal_cdf((b.zeta_minus_nm - mu) / sigma);
    return std::clamp(upper_tail + lower_tail, 0.0, 1.0);
}

double pad_pos_recess(const RecessParams& p, double d_cu) {
    return 1.0 - pad_fail_recess(p, d_cu);
}

namespace {

double member_pads(const PadBlockGrid& grid, const std::vector<CellRef>& member, double pitch_um) {
    double n = 0.0;
    for (const CellRef& cell : member) n += static_cast<double>(pads_in_cell(grid, cell.row, cell.col, pitch_um));
    return n;
}

} // namespace

double yield_recess(const Layout& layout, double pitch_um, double pad_fail) {
    if (pad_fail <= 0.0) return 1.0;
    const PadBlockGrid& grid = layout.grid;
    if (pad_fail >= 1.0) {
        for (int r = 0; r < grid.rows(); ++r)
            for (int c = 0; c < grid.cols(); ++c)
                if (grid.is_functional(r, c) && pads_in_cell(grid, r, c, pitch_um) > 0) return 0.0;
        return 1.0;
    }
    const double lq = std::log1p(-pad_fail);

    double n_critical = 0.0;
    for (int r = 0; r < grid.rows(); ++r)
        for (int c = 0; c < grid.cols(); ++c)
            if (grid.kind(r, c) == CellKind::critical)
                n_critical += static_cast<double>(pads_in_cell(grid, r, c, pitch_um));

    double logy = n_critical * lq;
    const bool shared = layout.plan.scheme == RedundancyScheme::shared;
    for (const RedundancyGroup& g : layout.plan.groups) {
        // per-member log survival: every pad of the block intact
        std::vector<double> ln_s(g.members.size());
        for (std::size_t m = 0; m < g.members.size(); ++m)
            ln_s[m] = member_pads(grid, g.members[m], pitch_um) * lq;

        if (shared) {
            // survive iff no main block fails, or exactly one does and the
            // spare block is whole: P = prod(s_i) * (1 + s_sp * sum (1-s_i)/s_i)
            double ln_mains = 0.0, ratio_sum = 0.0;
            for (std::size_t m = 0; m + 1 < ln_s.size(); ++m) {
                ln_mains += ln_s[m];
                ratio_sum += std::expm1(-ln_s[m]); // (1 - s)/s
            }
            logy += ln_mains + std::log1p(std::exp(ln_s.back()) * ratio_sum);
        } else {
            // dedicated: survive while any member block is whole
            double prod_fail = 1.0;
            for (double ls : ln_s) prod_fail *= -std::expm1(ls);
            logy += std::log1p(-prod_fail);
        }
    }
    return std::exp(logy);
}

double yield_recess(const Layout& layout, const RecessParams& p, double d_cu, double pitch_um) {
    return yield_recess(layout, pitch_um, pad_fail_recess(p, d_cu));
}

} // namespace hby
