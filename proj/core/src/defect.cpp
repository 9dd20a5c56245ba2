#include "hbyield/defect.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "hbyield/critical_area.hpp"
#include "hbyield/errors.hpp"
#include "hbyield/numeric.hpp"
#include "parallel_for.hpp"

namespace hby {

void validate(const DefectParams& p) {
    if (!(p.z > 1.0))
        throw ConfigError("defect thickness shape z must exceed 1, got " + std::to_string(p.z));
    if (!(p.t0_um > 0.0))
        throw ConfigError("minimum particle thickness t0 must be positive");
    if (p.d_t_per_cm2 < 0.0)
        throw ConfigError("particle density must be non-negative");
    if (p.k_r < 0.0 || p.k_r0 < 0.0 || p.k_l < 0.0 || p.k_n < 0.0 || p.k_s < 0.0)
        throw ConfigError("void fitting coefficients must be non-negative");
    if (!(p.tail_shrink_ratio > 0.0) || p.tail_shrink_ratio > 1.0)
        throw ConfigError("tail shrink ratio must lie in (0, 1]");
}

double thickness_pdf(double t_um, const DefectParams& p) {
    validate(p);
    if (t_um <= p.t0_um) return 0.0;
    return p.d_t_per_um2() * (p.z - 1.0) * std::pow(p.t0_um, p.z - 1.0) / std::pow(t_um, p.z);
}

double sample_thickness(double u01, const DefectParams& p) {
    validate(p);
    double tail = 1.0 - u01; // in (0, 1] for u01 in [0, 1)
    return p.t0_um * std::pow(tail, -1.0 / (p.z - 1.0));
}

VoidGeometry void_geometry(double location_um, double t_um, const DefectParams& p) {
    if (location_um < 0.0) throw ConfigError("particle location must be non-negative");
    double st = std::sqrt(t_um);
    VoidGeometry g;
    g.r_mv_um = (p.k_r * location_um + p.k_r0) * st;
    g.l_um = p.k_l * location_um * st;
    g.n_tail = p.k_n * location_um * st;
    g.s_tail_um2 = p.k_s * location_um * st;
    return g;
}

double tail_breakpoint_um(double wafer_r_um, const DefectParams& p) {
    return p.k_l * wafer_r_um * std::sqrt(p.t0_um);
}

double tail_length_pdf(double l_um, double wafer_r_um, const DefectParams& p) {
    const double dt = p.d_t_per_um2();
    const double z = p.z;
    const double knee = tail_breakpoint_um(wafer_r_um, p);
    if (l_um <= 0.0 || knee <= 0.0) return 0.0;
    if (l_um <= knee)
        return 2.0 * dt * (z - 1.0) * l_um /
               (z * sq(p.k_l) * sq(wafer_r_um) * p.t0_um);
    return 2.0 * dt * (z - 1.0) * std::pow(sq(p.k_l) * sq(wafer_r_um) * p.t0_um, z - 1.0) /
           (z * std::pow(l_um, 2.0 * z - 1.0));
}

double die_effective_radius_um(const DieSpec& die) {
    return std::sqrt(die.area_um2() / kPi);
}

double main_void_min_um(const DefectParams& p) { return p.k_r0 * std::sqrt(p.t0_um); }

double main_void_breakpoint_um(double die_eff_r_um, const DefectParams& p) {
    return (p.k_r * die_eff_r_um + p.k_r0) * std::sqrt(p.t0_um);
}

double main_void_pdf(double r_um, double die_eff_r_um, const DefectParams& p) {
    const double dt = p.d_t_per_um2();
    const double z = p.z;
    const double t0 = p.t0_um;
    const double R = die_eff_r_um;
    if (r_um <= main_void_min_um(p)) return 0.0;
    const double cr = p.k_r * R + p.k_r0;
    const double rpow = std::pow(r_um, 2.0 * z - 1.0);
    if (r_um < main_void_breakpoint_um(R, p)) {
        return dt * (z - 1.0) * std::pow(t0, z - 1.0) / (sq(p.k_r) * sq(R)) *
               (2.0 * r_um / (z * std::pow(t0, z)) +
                2.0 * std::pow(p.k_r0, 2.0 * z) / (z * (2.0 * z - 1.0) * rpow) -
                2.0 * p.k_r0 / ((z - 0.5) * std::pow(t0, z - 0.5)));
    }
    const double bracket =
        (std::pow(cr, 2.0 * z) - std::pow(p.k_r0, 2.0 * z)) / z -
        (2.0 * p.k_r0 * std::pow(cr, 2.0 * z - 1.0) - 2.0 * std::pow(p.k_r0, 2.0 * z)) /
            (z - 0.5) +
        (sq(p.k_r0) * std::pow(cr, 2.0 * z - 2.0) - std::pow(p.k_r0, 2.0 * z)) / (z - 1.0);
    return 2.0 * dt * (z - 1.0) * std::pow(t0, z - 1.0) * std::pow(cr, 2.0 * z - 2.0) / rpow -
           2.0 * dt * sq(z - 1.0) * std::pow(t0, z - 1.0) / (sq(p.k_r) * sq(R) * rpow) * bracket;
}

std::vector<double> default_l_grid(double wafer_r_um, const DefectParams& p, int n) {
    validate(p);
    if (n < 8) throw ConfigError("length grid needs at least 8 points");
    const double knee = tail_breakpoint_um(wafer_r_um, p);
    if (knee <= 0.0) throw ConfigError("tail knee is zero; check k_l and wafer radius");
    const double mult = 8.0;
    const int n_lin = n / 4;
    const int n_log = n - n_lin;
    std::vector<double> g;
    g.reserve(static_cast<std::size_t>(n) + 2);
    g.push_back(0.0);
    for (int i = 0; i < n_lin; ++i)
        g.push_back(knee / 10.0 + (knee - knee / 10.0) * i / (n_lin - 1.0));
    // stretched log tail: clusters points right after the knee where the
    // density turns over into its power-law drop
    for (int k = 1; k <= n_log; ++k) {
        double u = std::pow(static_cast<double>(k) / n_log, 1.5);
        g.push_back(knee * std::pow(mult, u));
    }
    g.erase(std::unique(g.begin(), g.end()), g.end());
    return g;
}

std::vector<double> default_theta_grid(int n) {
    if (n < 4) throw ConfigError("orientation grid needs at least 4 points");
    std::vector<double> g(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) g[static_cast<std::size_t>(k)] = (k + 0.5) * 2.0 * kPi / n;
    return g;
}

std::vector<double> default_r_grid(const DieSpec& die, const DefectParams& p, int n) {
    validate(p);
    if (n < 8) throw ConfigError("radius grid needs at least 8 points");
    const double r0 = main_void_min_um(p);
    const double knee = main_void_breakpoint_um(die_effective_radius_um(die), p);
    if (!(knee > r0)) throw ConfigError("main-void knee collapsed; check k_r and k_r0");
    const double mult = 16.0;
    const int n_lin = std::max(2, n / 8 + 1);
    const int n_log = n - n_lin;
    std::vector<double> g;
    g.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n_lin; ++i)
        g.push_back(r0 + (knee - r0) * i / (n_lin - 1.0));
    for (int k = 1; k <= n_log; ++k) {
        double u = std::pow(static_cast<double>(k) / n_log, 1.5);
        g.push_back(knee * std::pow(mult, u));
    }
    g.erase(std::unique(g.begin(), g.end()), g.end());
    return g;
}

namespace {

std::uint64_t hash_layout(const Layout& layout, std::uint64_t h) {
    const PadBlockGrid& g = layout.grid;
    h = fnv1a_f64(g.die().width_um, h);
    h = fnv1a_f64(g.die().height_um, h);
    h = fnv1a_f64(g.cell_w_um(), h);
    h = fnv1a_f64(g.cell_h_um(), h);
    h = fnv1a_u64(static_cast<std::uint64_t>(g.rows()), h);
    h = fnv1a_u64(static_cast<std::uint64_t>(g.cols()), h);
    for (int r = 0; r < g.rows(); ++r)
        for (int c = 0; c < g.cols(); ++c) {
            h = fnv1a_u64(static_cast<std::uint64_t>(g.kind(r, c)), h);
            h = fnv1a_u64(static_cast<std::uint64_t>(g.group_id(r, c)) + 1, h);
        }
    h = fnv1a_u64(static_cast<std::uint64_t>(layout.plan.scheme), h);
    h = fnv1a_u64(static_cast<std::uint64_t>(layout.plan.mains_per_spare), h);
    for (const RedundancyGroup& grp : layout.plan.groups) {
        h = fnv1a_u64(grp.members.size(), h);
        for (const auto& member : grp.members) {
            h = fnv1a_u64(member.size(), h);
            for (const CellRef& cell : member) {
                h = fnv1a_u64(static_cast<std::uint64_t>(cell.row), h);
                h = fnv1a_u64(static_cast<std::uint64_t>(cell.col), h);
            }
        }
    }
    return h;
}

StructuringElement tail_se(double l_um, double theta_rad, const Layout& layout,
                           const DefectParams& p) {
    StructuringElement se =
        segment_se(l_um, theta_rad, layout.grid.cell_w_um(), layout.grid.cell_h_um());
    if (p.main_void_in_w2w) {
        double r = (p.k_r / p.k_l) * l_um + main_void_min_um(p);
        StructuringElement disk =
            disk_se(r, layout.grid.cell_w_um(), layout.grid.cell_h_um());
        se.offsets.insert(se.offsets.end(), disk.offsets.begin(), disk.offsets.end());
        std::sort(se.offsets.begin(), se.offsets.end());
        se.offsets.erase(std::unique(se.offsets.begin(), se.offsets.end()), se.offsets.end());
    }
    return se;
}

} // namespace

std::uint64_t lut_fingerprint(const Layout& layout, LutMode mode,
                              const std::vector<double>& axis,
                              const std::vector<double>& theta_rad, const DefectParams& p) {
    std::uint64_t h = fnv1a_u64(static_cast<std::uint64_t>(mode), 0xcbf29ce484222325ull);
    h = hash_layout(layout, h);
    h = fnv1a_u64(axis.size(), h);
    for (double v : axis) h = fnv1a_f64(v, h);
    h = fnv1a_u64(theta_rad.size(), h);
    for (double v : theta_rad) h = fnv1a_f64(v, h);
    if (mode == LutMode::w2w) {
        h = fnv1a_u64(p.main_void_in_w2w ? 1 : 0, h);
        if (p.main_void_in_w2w) {
            h = fnv1a_f64(p.k_r, h);
            h = fnv1a_f64(p.k_l, h);
            h = fnv1a_f64(p.k_r0, h);
            h = fnv1a_f64(p.t0_um, h);
        }
    }
    return h;
}

CriticalAreaLUT build_lut_w2w(const Layout& layout, const std::vector<double>& l_grid,
                              const std::vector<double>& theta_grid, const DefectParams& p) {
    validate(p);
    if (l_grid.empty() || theta_grid.empty())
        throw ConfigError("critical-area axes must be non-empty");
    if (!std::is_sorted(l_grid.begin(), l_grid.end()))
        throw ConfigError("length axis must be sorted");
    CriticalAreaLUT lut;
    lut.mode = LutMode::w2w;
    lut.l_um = l_grid;
    lut.theta_rad = theta_grid;
    lut.area_um2.assign(l_grid.size() * theta_grid.size(), 0.0);
    parallel_for(l_grid.size(), [&](std::size_t i) {
        for (std::size_t j = 0; j < theta_grid.size(); ++j) {
            StructuringElement se = tail_se(l_grid[i], theta_grid[j], layout, p);
            lut.area_um2[i * theta_grid.size() + j] = critical_area_um2(layout, se);
        }
    });
    lut.fingerprint = lut_fingerprint(layout, LutMode::w2w, l_grid, theta_grid, p);
    return lut;
}

CriticalAreaLUT build_lut_d2w(const Layout& layout, const std::vector<double>& r_grid) {
    if (r_grid.empty()) throw ConfigError("critical-area axes must be non-empty");
    if (!std::is_sorted(r_grid.begin(), r_grid.end()))
        throw ConfigError("radius axis must be sorted");
    CriticalAreaLUT lut;
    lut.mode = LutMode::d2w;
    lut.r_um = r_grid;
    lut.area_um2.assign(r_grid.size(), 0.0);
    parallel_for(r_grid.size(), [&](std::size_t i) {
        StructuringElement se =
            disk_se(r_grid[i], layout.grid.cell_w_um(), layout.grid.cell_h_um());
        lut.area_um2[i] = critical_area_um2(layout, se);
    });
    lut.fingerprint = lut_fingerprint(layout, LutMode::d2w, r_grid, {}, DefectParams{});
    return lut;
}

LambdaResult lambda_w2w(const CriticalAreaLUT& lut, double wafer_r_um, const DefectParams& p) {
    validate(p);
    if (lut.mode != LutMode::w2w) throw ConfigError("length/orientation table required");
    const std::size_t nl = lut.l_um.size(), nt = lut.theta_rad.size();
    LambdaResult res;
    std::vector<double> f(nl);
    for (std::size_t i = 0; i < nl; ++i) f[i] = tail_length_pdf(lut.l_um[i], wafer_r_um, p);
    std::vector<double> g(nl);
    double acc = 0.0, a_last = 0.0, slope = 0.0;
    for (std::size_t j = 0; j < nt; ++j) {
        for (std::size_t i = 0; i < nl; ++i) g[i] = lut.at(i, j) * f[i];
        acc += trapezoid(lut.l_um, g);
        a_last += lut.at(nl - 1, j);
        if (nl >= 2 && lut.l_um[nl - 1] > lut.l_um[nl - 2])
            slope += std::max(0.0, (lut.at(nl - 1, j) - lut.at(nl - 2, j)) /
                                       (lut.l_um[nl - 1] - lut.l_um[nl - 2]));
    }
    res.lambda = acc / static_cast<double>(nt);
    a_last /= static_cast<double>(nt);
    slope /= static_cast<double>(nt);

    // closed-form mass beyond the grid, with the last-row area held and its
    // local growth rate extended
    const double z = p.z;
    const double knee = tail_breakpoint_um(wafer_r_um, p);
    const double lmax = lut.l_um.back();
    const double dt = p.d_t_per_um2();
    if (lmax >= knee && lmax > 0.0) {
        double t0_mass = (dt / z) * std::pow(knee / lmax, 2.0 * z - 2.0);
        double t1_mass = std::numeric_limits<double>::infinity();
        if (z > 1.5)
            t1_mass = 2.0 * (z - 1.0) / (z * (2.0 * z - 3.0)) * dt *
                          std::pow(knee, 2.0 * z - 2.0) * std::pow(lmax, 3.0 - 2.0 * z) -
                      lmax * t0_mass;
        res.tail_estimate = a_last * t0_mass + (slope > 0.0 ? slope * t1_mass : 0.0);
    } else {
        res.tail_estimate = std::numeric_limits<double>::infinity();
    }
    if (!(res.tail_estimate <= 0.01 * res.lambda))
        res.warning = "integration grid truncation estimate " +
                      std::to_string(res.tail_estimate) + " exceeds 1% of lambda " +
                      std::to_string(res.lambda) + "; extend or refine the length grid";
    return res;
}

LambdaResult lambda_d2w(const CriticalAreaLUT& lut, const DieSpec& die, const DefectParams& p) {
    validate(p);
    if (lut.mode != LutMode::d2w) throw ConfigError("radius table required");
    const std::size_t nr = lut.r_um.size();
    const double reff = die_effective_radius_um(die);
    LambdaResult res;
    std::vector<double> g(nr);
    for (std::size_t i = 0; i < nr; ++i)
        g[i] = lut.area_um2[i] * main_void_pdf(lut.r_um[i], reff, p);
    res.lambda = trapezoid(lut.r_um, g);

    const double z = p.z;
    const double rmax = lut.r_um.back();
    const double knee = main_void_breakpoint_um(reff, p);
    if (rmax >= knee) {
        // beyond the knee the density is exactly c r^(1-2z)
        double c = main_void_pdf(rmax, reff, p) * std::pow(rmax, 2.0 * z - 1.0);
        double t0_mass = c * std::pow(rmax, 2.0 - 2.0 * z) / (2.0 * z - 2.0);
        double t1_mass = std::numeric_limits<double>::infinity();
        if (z > 1.5)
            t1_mass = c * std::pow(rmax, 3.0 - 2.0 * z) *
                      (1.0 / (2.0 * z - 3.0) - 1.0 / (2.0 * z - 2.0));
        double a_last = lut.area_um2[nr - 1];
        double slope = 0.0;
        if (nr >= 2 && lut.r_um[nr - 1] > lut.r_um[nr - 2])
            slope = std::max(0.0, (lut.area_um2[nr - 1] - lut.area_um2[nr - 2]) /
                                      (lut.r_um[nr - 1] - lut.r_um[nr - 2]));
        res.tail_estimate = a_last * t0_mass + (slope > 0.0 ? slope * t1_mass : 0.0);
    } else {
        res.tail_estimate = std::numeric_limits<double>::infinity();
    }
    if (!(res.tail_estimate <= 0.01 * res.lambda))
        res.warning = "integration grid truncation estimate " +
                      std::to_string(res.tail_estimate) + " exceeds 1% of lambda " +
                      std::to_string(res.lambda) + "; extend or refine the radius grid";
    return res;
}

double yield_df_w2w(const CriticalAreaLUT& lut, double wafer_r_um, const DefectParams& p) {
    return std::exp(-lambda_w2w(lut, wafer_r_um, p).lambda);
}

double yield_df_d2w(const CriticalAreaLUT& lut, const DieSpec& die, const DefectParams& p) {
    return std::exp(-lambda_d2w(lut, die, p).lambda);
}

} // namespace hby
