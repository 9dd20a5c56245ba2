#include "hbyield/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>

#include "hbyield/errors.hpp"
#include "hbyield/numeric.hpp"
#include "hbyield/overlay.hpp"
#include "hbyield/recess.hpp"
#include "hbyield/rng.hpp"
#include "parallel_for.hpp"

namespace hby {

VoidInstance make_void(double x_um, double y_um, double t_um, const DefectParams& p,
                       bool with_tail) {
    const double loc = std::hypot(x_um, y_um);
    VoidGeometry g = void_geometry(loc, t_um, p);
    VoidInstance v;
    v.x_um = x_um;
    v.y_um = y_um;
    v.main_r_um = g.r_mv_um;
    v.theta_rad = loc > 0.0 ? std::atan2(y_um, x_um) : 0.0;
    if (!with_tail || g.l_um <= 0.0) return v;
    const long long n = std::llround(g.n_tail);
    if (n < 1) return v;
    // linear radius profile rho_i = rho_max * c_i scaled so the disk areas
    // sum to the fitted S
    double sum_sq = 0.0;
    std::vector<double> coef(static_cast<std::size_t>(n));
    for (long long i = 0; i < n; ++i) {
        double c = n == 1 ? 1.0
                          : 1.0 - (1.0 - p.tail_shrink_ratio) * static_cast<double>(i) /
                                      static_cast<double>(n - 1);
        coef[static_cast<std::size_t>(i)] = c;
        sum_sq += c * c;
    }
    const double rho_max = std::sqrt(g.s_tail_um2 / (kPi * sum_sq));
    const double ux = std::cos(v.theta_rad);
    const double uy = std::sin(v.theta_rad);
    const double step = g.l_um / static_cast<double>(n);
    v.tail.reserve(static_cast<std::size_t>(n));
    for (long long i = 0; i < n; ++i) {
        double d = step * static_cast<double>(i + 1);
        v.tail.push_back(TailDisk{x_um + ux * d, y_um + uy * d,
                                  rho_max * coef[static_cast<std::size_t>(i)]});
    }
    return v;
}

namespace {

struct Group {
    std::vector<std::vector<std::uint32_t>> members; // cell indices per replica
};

// immutable per-run state shared by every wafer/die worker
struct Context {
    const ProcessConfig* c = nullptr;
    const Layout* layout = nullptr;
    SimChannels ch;
    OverlayParams op;
    DefectParams dp;
    double delta_um = 0.0;
    int rows = 0, cols = 0;
    std::vector<double> xs, ys; // cell corner coordinates, die-local
    std::vector<std::pair<double, double>> hull;
    std::vector<double> cell_alive_prob; // recess P(all pads in cell alive)
    std::vector<std::uint8_t> functional;
    std::vector<std::uint32_t> critical_cells;
    std::vector<Group> groups;
    RedundancyScheme scheme = RedundancyScheme::none;
};

Context make_context(const ProcessConfig& c, const Layout& layout, SimChannels ch) {
    validate(c);
    Context ctx;
    ctx.c = &c;
    ctx.layout = &layout;
    ctx.ch = ch;
    ctx.op = overlay_params(c);
    ctx.dp = defect_params(c);
    validate(ctx.dp);
    ctx.delta_um = max_allowed_misalignment(ctx.op);
    const PadBlockGrid& grid = layout.grid;
    ctx.rows = grid.rows();
    ctx.cols = grid.cols();
    ctx.xs.resize(ctx.cols + 1);
    for (int col = 0; col < ctx.cols; ++col) ctx.xs[col] = grid.cell_x0(col);
    ctx.xs[ctx.cols] = grid.cell_x1(ctx.cols - 1);
    ctx.ys.resize(ctx.rows + 1);
    for (int row = 0; row < ctx.rows; ++row) ctx.ys[row] = grid.cell_y0(row);
    ctx.ys[ctx.rows] = grid.cell_y1(ctx.rows - 1);
    ctx.hull = functional_corner_hull(grid);
    if (ctx.hull.empty()) throw GeometryError("layout has no functional pad block");

    const double d_cu = cu_pattern_density(grid, c.pitch_um, c.bottom_pad_um);
    const double pfail = pad_fail_recess(recess_params(c), d_cu);
    ctx.cell_alive_prob.assign(static_cast<std::size_t>(ctx.rows) * ctx.cols, 1.0);
    ctx.functional.assign(ctx.cell_alive_prob.size(), 0);
    for (int r = 0; r < ctx.rows; ++r)
        for (int col = 0; col < ctx.cols; ++col) {
            std::uint32_t idx = static_cast<std::uint32_t>(r) * ctx.cols + col;
            if (!grid.is_functional(r, col)) continue;
            ctx.functional[idx] = 1;
            long pads = pads_in_cell(grid, r, col, c.pitch_um);
            ctx.cell_alive_prob[idx] =
                pfail >= 1.0 ? (pads > 0 ? 0.0 : 1.0)
                             : std::exp(static_cast<double>(pads) * std::log1p(-pfail));
            if (grid.kind(r, col) == CellKind::critical) ctx.critical_cells.push_back(idx);
        }
    ctx.scheme = layout.plan.scheme;
    for (const RedundancyGroup& g : layout.plan.groups) {
        Group out;
        for (const std::vector<CellRef>& member : g.members) {
            std::vector<std::uint32_t> cells;
            cells.reserve(member.size());
            for (const CellRef& ref : member)
                cells.push_back(static_cast<std::uint32_t>(ref.row) * ctx.cols + ref.col);
            out.members.push_back(std::move(cells));
        }
        ctx.groups.push_back(std::move(out));
    }
    return ctx;
}

struct Distortion {
    OverlayParams op;
    double u_um = 0.0;
};

Distortion sample_distortion(const Context& ctx, std::mt19937_64& rng) {
    std::normal_distribution<double> n01;
    Distortion d;
    d.op = ctx.op;
    const ProcessConfig& c = *ctx.c;
    d.op.tx_um = ctx.op.tx_um + n01(rng) * c.translation_sigma_nm * 1e-3;
    d.op.ty_um = ctx.op.ty_um + n01(rng) * c.translation_sigma_nm * 1e-3;
    d.op.alpha_urad = ctx.op.alpha_urad + n01(rng) * c.rotation_sigma_urad;
    d.op.magnification_ppm = ctx.op.magnification_ppm + n01(rng) * c.magnification_sigma_ppm;
    d.u_um = n01(rng) * ctx.op.sigma1_um;
    return d;
}

// scratch buffers reused across the dies a worker processes
struct DieBuffers {
    std::vector<double> corner_s;
    std::vector<std::uint8_t> ovl, df, cr;
};

void reset_buffers(const Context& ctx, DieBuffers& b) {
    const std::size_t cells = ctx.cell_alive_prob.size();
    b.corner_s.resize(static_cast<std::size_t>(ctx.rows + 1) * (ctx.cols + 1));
    b.ovl.assign(cells, 1);
    b.df.assign(cells, 1);
    b.cr.assign(cells, 1);
}

/// Overlay check for one die centered at (cx, cy) in the distortion frame.
/// Fast path: when even the hull-worst corner passes with the shared u,
/// every cell passes. Otherwise each functional cell is tested at its own
/// worst corner.
void overlay_check(const Context& ctx, DieBuffers& b, const Distortion& d, double cx, double cy) {
    if (!ctx.ch.overlay) return;
    double worst = 0.0;
    for (const auto& [hx, hy] : ctx.hull) {
        Shift s = systematic_shift(d.op, cx + hx, cy + hy);
        worst = std::max(worst, s.s_um);
    }
    if (std::max(std::fabs(worst + d.u_um), std::fabs(d.u_um)) < ctx.delta_um) return;
    const int nx = ctx.cols + 1;
    for (int j = 0; j <= ctx.rows; ++j)
        for (int i = 0; i <= ctx.cols; ++i)
            b.corner_s[static_cast<std::size_t>(j) * nx + i] =
                systematic_shift(d.op, cx + ctx.xs[i], cy + ctx.ys[j]).s_um;
    for (int r = 0; r < ctx.rows; ++r)
        for (int col = 0; col < ctx.cols; ++col) {
            std::uint32_t idx = static_cast<std::uint32_t>(r) * ctx.cols + col;
            if (!ctx.functional[idx]) continue;
            double s_max = std::max(
                std::max(b.corner_s[static_cast<std::size_t>(r) * nx + col],
                         b.corner_s[static_cast<std::size_t>(r) * nx + col + 1]),
                std::max(b.corner_s[static_cast<std::size_t>(r + 1) * nx + col],
                         b.corner_s[static_cast<std::size_t>(r + 1) * nx + col + 1]));
            if (std::fabs(s_max + d.u_um) >= ctx.delta_um) b.ovl[idx] = 0;
        }
}

void recess_check(const Context& ctx, DieBuffers& b, std::mt19937_64& rng) {
    if (!ctx.ch.recess) return;
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const std::size_t cells = ctx.cell_alive_prob.size();
    for (std::size_t idx = 0; idx < cells; ++idx) {
        if (!ctx.functional[idx]) continue;
        if (u01(rng) >= ctx.cell_alive_prob[idx]) b.cr[idx] = 0;
    }
}

/// Marks every cell whose rectangle the disk reaches. (lx, ly) die-local.
void mark_disk(const Context& ctx, std::vector<std::uint8_t>& df, double lx, double ly,
               double r) {
    if (r <= 0.0) return;
    const double x_min = ctx.xs.front(), x_max = ctx.xs.back();
    const double y_min = ctx.ys.front(), y_max = ctx.ys.back();
    if (lx + r < x_min || lx - r > x_max || ly + r < y_min || ly - r > y_max) return;
    const double cw = ctx.layout->grid.cell_w_um();
    const double chh = ctx.layout->grid.cell_h_um();
    int c0 = std::max(0, static_cast<int>(std::floor((lx - r - x_min) / cw)));
    int c1 = std::min(ctx.cols - 1, static_cast<int>(std::floor((lx + r - x_min) / cw)));
    int r0 = std::max(0, static_cast<int>(std::floor((ly - r - y_min) / chh)));
    int r1 = std::min(ctx.rows - 1, static_cast<int>(std::floor((ly + r - y_min) / chh)));
    const double rr = r * r;
    for (int row = r0; row <= r1; ++row) {
        double py = std::clamp(ly, ctx.ys[row], ctx.ys[row + 1]);
        double dy = py - ly;
        for (int col = c0; col <= c1; ++col) {
            double px = std::clamp(lx, ctx.xs[col], ctx.xs[col + 1]);
            double dx = px - lx;
            if (dx * dx + dy * dy <= rr)
                df[static_cast<std::size_t>(row) * ctx.cols + col] = 0;
        }
    }
}

void mark_void(const Context& ctx, std::vector<std::uint8_t>& df, const VoidInstance& v,
               double die_cx, double die_cy) {
    mark_disk(ctx, df, v.x_um - die_cx, v.y_um - die_cy, v.main_r_um);
    for (const TailDisk& t : v.tail) mark_disk(ctx, df, t.x_um - die_cx, t.y_um - die_cy, t.r_um);
}

struct DieOutcome {
    bool ovl = true, df = true, cr = true, all = true;
};

bool member_alive(const std::vector<std::uint32_t>& cells, const DieBuffers& b, int channel) {
    for (std::uint32_t idx : cells) {
        bool ok = channel == 0   ? b.ovl[idx] != 0
                  : channel == 1 ? b.df[idx] != 0
                  : channel == 2 ? b.cr[idx] != 0
                                 : (b.ovl[idx] & b.df[idx] & b.cr[idx]) != 0;
        if (!ok) return false;
    }
    return true;
}

bool groups_survive(const Context& ctx, const DieBuffers& b, int channel) {
    for (const Group& g : ctx.groups) {
        if (ctx.scheme == RedundancyScheme::dedicated) {
            bool any = false;
            for (const auto& member : g.members)
                if (member_alive(member, b, channel)) {
                    any = true;
                    break;
                }
            if (!any) return false;
        } else { // shared: the last member is the spare, replacing one main
            int dead_mains = 0;
            for (std::size_t m = 0; m + 1 < g.members.size(); ++m)
                if (!member_alive(g.members[m], b, channel)) ++dead_mains;
            if (dead_mains >= 2) return false;
            if (dead_mains == 1 && !member_alive(g.members.back(), b, channel)) return false;
        }
    }
    return true;
}

DieOutcome eval_die(const Context& ctx, const DieBuffers& b) {
    bool o = true, d = true, cr = true;
    for (std::uint32_t idx : ctx.critical_cells) {
        o &= b.ovl[idx] != 0;
        d &= b.df[idx] != 0;
        cr &= b.cr[idx] != 0;
        if (!(o | d | cr)) break;
    }
    DieOutcome out;
    out.ovl = o && groups_survive(ctx, b, 0);
    out.df = d && groups_survive(ctx, b, 1);
    out.cr = cr && groups_survive(ctx, b, 2);
    // for critical singles the joint check factorizes; groups need the
    // per-cell conjunction because different members may fail different
    // channels
    out.all = o && d && cr && groups_survive(ctx, b, 3);
    return out;
}

struct Tally {
    std::uint64_t dies = 0, ovl = 0, df = 0, cr = 0, all = 0;
};

void accumulate(Tally& t, const DieOutcome& o) {
    ++t.dies;
    t.ovl += o.ovl;
    t.df += o.df;
    t.cr += o.cr;
    t.all += o.all;
}

// one particle population per wafer, shared by every die site
std::vector<VoidInstance> wafer_voids(const ProcessConfig& c, const DefectParams& dp,
                                      std::uint64_t wafer_id) {
    std::mt19937_64 rng = make_stream(c.seed, wafer_id + 1, 0, Stream::defect);
    const double radius = c.wafer_radius_um;
    const double mean = dp.d_t_per_um2() * kPi * radius * radius;
    std::poisson_distribution<long long> pois(mean);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const long long n = pois(rng);
    std::vector<VoidInstance> voids;
    voids.reserve(static_cast<std::size_t>(n));
    for (long long i = 0; i < n; ++i) {
        double rad = radius * std::sqrt(u01(rng));
        double phi = 2.0 * kPi * u01(rng);
        double t = sample_thickness(u01(rng), dp);
        voids.push_back(make_void(rad * std::cos(phi), rad * std::sin(phi), t, dp, true));
    }
    return voids;
}

Tally run_wafer(const Context& ctx, const std::vector<DieSite>& sites, std::uint64_t wafer_id) {
    const ProcessConfig& c = *ctx.c;
    Tally tally;
    Distortion dist;
    dist.op = ctx.op;
    if (ctx.ch.overlay) {
        std::mt19937_64 rng = make_stream(c.seed, wafer_id + 1, 0, Stream::overlay);
        dist = sample_distortion(ctx, rng);
    }
    std::vector<VoidInstance> voids;
    if (ctx.ch.defect) voids = wafer_voids(c, ctx.dp, wafer_id);

    DieBuffers b;
    const double half_w = c.die_width_um / 2.0;
    const double half_h = c.die_height_um / 2.0;
    for (std::size_t si = 0; si < sites.size(); ++si) {
        const DieSite& site = sites[si];
        reset_buffers(ctx, b);
        overlay_check(ctx, b, dist, site.cx_um, site.cy_um);
        for (const VoidInstance& v : voids) {
            // cheap reject: the whole void lies in a disk of radius
            // main_r + l around the site
            double reach = v.main_r_um;
            if (!v.tail.empty()) {
                const TailDisk& last = v.tail.back();
                reach = std::max(reach, std::hypot(last.x_um - v.x_um, last.y_um - v.y_um) +
                                            v.tail.front().r_um);
            }
            if (std::fabs(v.x_um - site.cx_um) > half_w + reach ||
                std::fabs(v.y_um - site.cy_um) > half_h + reach)
                continue;
            mark_void(ctx, b.df, v, site.cx_um, site.cy_um);
        }
        if (ctx.ch.recess) {
            std::mt19937_64 rng = make_stream(c.seed, wafer_id + 1, si + 1, Stream::recess);
            recess_check(ctx, b, rng);
        }
        accumulate(tally, eval_die(ctx, b));
    }
    return tally;
}

Tally run_die(const Context& ctx, DieBuffers& b, std::uint64_t die_id) {
    const ProcessConfig& c = *ctx.c;
    reset_buffers(ctx, b);
    if (ctx.ch.overlay) {
        std::mt19937_64 rng = make_stream(c.seed, 0, die_id + 1, Stream::overlay);
        Distortion dist = sample_distortion(ctx, rng);
        overlay_check(ctx, b, dist, 0.0, 0.0);
    }
    if (ctx.ch.defect) {
        std::mt19937_64 rng = make_stream(c.seed, 0, die_id + 1, Stream::defect);
        const double mean = ctx.dp.d_t_per_um2() * c.die_width_um * c.die_height_um;
        std::poisson_distribution<long long> pois(mean);
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        const long long n = pois(rng);
        for (long long i = 0; i < n; ++i) {
            double x = (u01(rng) - 0.5) * c.die_width_um;
            double y = (u01(rng) - 0.5) * c.die_height_um;
            double t = sample_thickness(u01(rng), ctx.dp);
            // D2W bonding does not sweep a bond wave across the die, so the
            // particle leaves the main void only
            VoidInstance v = make_void(x, y, t, ctx.dp, false);
            mark_void(ctx, b.df, v, 0.0, 0.0);
        }
    }
    if (ctx.ch.recess) {
        std::mt19937_64 rng = make_stream(c.seed, 0, die_id + 1, Stream::recess);
        recess_check(ctx, b, rng);
    }
    Tally t;
    accumulate(t, eval_die(ctx, b));
    return t;
}

} // namespace

SimCounts simulate_w2w(const ProcessConfig& c, const Layout& layout, std::uint64_t n_wafers,
                       std::uint64_t wafer_offset, SimChannels channels) {
    Context ctx = make_context(c, layout, channels);
    std::vector<DieSite> sites = generate_wafer_map(wafer_spec(c), die_spec(c));
    if (sites.empty()) throw GeometryError("no die fits inside the usable wafer radius");
    std::vector<Tally> per_wafer(n_wafers);
    parallel_for(n_wafers, [&](std::size_t w) {
        per_wafer[w] = run_wafer(ctx, sites, wafer_offset + w);
    });
    SimCounts out;
    out.unit_yields.reserve(n_wafers);
    for (const Tally& t : per_wafer) {
        out.dies += t.dies;
        out.pass_ovl += t.ovl;
        out.pass_df += t.df;
        out.pass_cr += t.cr;
        out.pass_all += t.all;
        out.unit_yields.push_back(static_cast<double>(t.all) / static_cast<double>(t.dies));
    }
    return out;
}

SimCounts simulate_d2w(const ProcessConfig& c, const Layout& layout, std::uint64_t n_dies,
                       std::uint64_t die_offset, SimChannels channels) {
    Context ctx = make_context(c, layout, channels);
    const std::size_t chunk = 128;
    const std::size_t n_chunks = (n_dies + chunk - 1) / chunk;
    std::vector<Tally> per_chunk(n_chunks);
    std::vector<std::vector<double>> chunk_yields(n_chunks);
    parallel_for(n_chunks, [&](std::size_t k) {
        DieBuffers b;
        Tally acc;
        std::vector<double>& ys = chunk_yields[k];
        for (std::uint64_t d = k * chunk; d < std::min<std::uint64_t>((k + 1) * chunk, n_dies);
             ++d) {
            Tally t = run_die(ctx, b, die_offset + d);
            ys.push_back(static_cast<double>(t.all));
            acc.dies += t.dies;
            acc.ovl += t.ovl;
            acc.df += t.df;
            acc.cr += t.cr;
            acc.all += t.all;
        }
        per_chunk[k] = acc;
    });
    SimCounts out;
    out.unit_yields.reserve(n_dies);
    for (std::size_t k = 0; k < n_chunks; ++k) {
        const Tally& t = per_chunk[k];
        out.dies += t.dies;
        out.pass_ovl += t.ovl;
        out.pass_df += t.df;
        out.pass_cr += t.cr;
        out.pass_all += t.all;
        out.unit_yields.insert(out.unit_yields.end(), chunk_yields[k].begin(),
                               chunk_yields[k].end());
    }
    return out;
}

YieldReport simulate(const ProcessConfig& c, const Layout& layout, SimChannels channels) {
    const auto start = std::chrono::steady_clock::now();
    SimCounts sc = c.mode == BondMode::w2w
                       ? simulate_w2w(c, layout, c.n_wafers, 0, channels)
                       : simulate_d2w(c, layout, c.n_dies, 0, channels);
    YieldReport r;
    r.source = "simulation";
    r.seed = c.seed;
    r.n_wafers = c.mode == BondMode::w2w ? c.n_wafers : 0;
    r.n_dies = sc.dies;
    const double dies = static_cast<double>(sc.dies);
    r.y_ovl = static_cast<double>(sc.pass_ovl) / dies;
    r.y_df = static_cast<double>(sc.pass_df) / dies;
    r.y_cr = static_cast<double>(sc.pass_cr) / dies;
    r.y_total = static_cast<double>(sc.pass_all) / dies;
    const std::size_t n = sc.unit_yields.size();
    if (n > 1 && r.y_total > 0.0) {
        double mean = 0.0;
        for (double y : sc.unit_yields) mean += y;
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (double y : sc.unit_yields) var += sq(y - mean);
        var /= static_cast<double>(n - 1);
        r.cv = std::sqrt(var / static_cast<double>(n)) / mean;
    }
    r.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

namespace {

struct BatchStats {
    double mean = 0.0;
    double std_dev = 0.0;
    std::uint64_t pass = 0; // dies passing, pooled over every repetition
    std::uint64_t dies = 0;
    std::uint64_t batch_dies = 0; // dies per single batch
};

BatchStats run_batches(const ProcessConfig& c, const Layout& layout, std::uint64_t n, int reps) {
    if (n < 1 || reps < 2) throw ConfigError("batch CV needs n >= 1 and reps >= 2");
    std::vector<double> yields(static_cast<std::size_t>(reps));
    BatchStats bs;
    for (int rep = 0; rep < reps; ++rep) {
        SimCounts sc = c.mode == BondMode::w2w
                           ? simulate_w2w(c, layout, n, static_cast<std::uint64_t>(rep) * n)
                           : simulate_d2w(c, layout, n, static_cast<std::uint64_t>(rep) * n);
        yields[static_cast<std::size_t>(rep)] =
            static_cast<double>(sc.pass_all) / static_cast<double>(sc.dies);
        bs.pass += sc.pass_all;
        bs.dies += sc.dies;
        bs.batch_dies = sc.dies;
    }
    for (double y : yields) bs.mean += y;
    bs.mean /= static_cast<double>(reps);
    double var = 0.0;
    for (double y : yields) var += sq(y - bs.mean);
    var /= static_cast<double>(reps - 1);
    bs.std_dev = std::sqrt(var);
    return bs;
}

/// True when a run of the config cannot draw two different outcomes: every
/// distortion sigma is zero, no particles can land, and every per-cell
/// recess survival probability is exactly 0 or 1.
bool config_is_stochastic(const Context& ctx) {
    const ProcessConfig& c = *ctx.c;
    if (ctx.ch.overlay &&
        (c.translation_sigma_nm > 0.0 || c.rotation_sigma_urad > 0.0 ||
         c.magnification_sigma_ppm > 0.0 || c.random_misalign_sigma_nm > 0.0))
        return true;
    if (ctx.ch.defect && ctx.dp.d_t_per_cm2 > 0.0) return true;
    if (ctx.ch.recess)
        for (std::size_t i = 0; i < ctx.cell_alive_prob.size(); ++i)
            if (ctx.functional[i] && ctx.cell_alive_prob[i] > 0.0 &&
                ctx.cell_alive_prob[i] < 1.0)
                return true;
    return false;
}

} // namespace

double batch_cv(const ProcessConfig& c, const Layout& layout, std::uint64_t n, int reps) {
    BatchStats bs = run_batches(c, layout, n, reps);
    if (bs.mean <= 0.0) return std::numeric_limits<double>::infinity();
    return bs.std_dev / bs.mean;
}

void dump_void_map(const ProcessConfig& c, std::uint64_t wafer_id, const std::string& csv_path,
                   const std::string& pbm_path, double pixel_um) {
    validate(c);
    DefectParams dp = defect_params(c);
    validate(dp);
    if (pixel_um <= 0.0) throw ConfigError("void map pixel size must be positive");
    std::vector<VoidInstance> voids = wafer_voids(c, dp, wafer_id);
    std::vector<TailDisk> disks;
    for (const VoidInstance& v : voids) {
        disks.push_back(TailDisk{v.x_um, v.y_um, v.main_r_um});
        disks.insert(disks.end(), v.tail.begin(), v.tail.end());
    }

    std::ofstream csv(csv_path);
    if (!csv) throw ConfigError("cannot write " + csv_path);
    csv << "x_um,y_um,r_um\n";
    char line[96];
    for (const TailDisk& d : disks) {
        std::snprintf(line, sizeof line, "%.6f,%.6f,%.6f\n", d.x_um, d.y_um, d.r_um);
        csv << line;
    }
    if (!csv.flush()) throw ConfigError("cannot write " + csv_path);
    if (pbm_path.empty()) return;

    // black pixel = covered by a void; each disk also marks its center so
    // sub-pixel voids stay visible
    const double radius = c.wafer_radius_um;
    const int size = static_cast<int>(std::ceil(2.0 * radius / pixel_um));
    const int row_bytes = (size + 7) / 8;
    std::vector<std::uint8_t> img(static_cast<std::size_t>(row_bytes) * size, 0);
    auto set_px = [&](int px, int py) {
        if (px < 0 || px >= size || py < 0 || py >= size) return;
        img[static_cast<std::size_t>(py) * row_bytes + px / 8] |=
            static_cast<std::uint8_t>(0x80u >> (px % 8));
    };
    auto to_px = [&](double u) { return static_cast<int>(std::floor((u + radius) / pixel_um)); };
    for (const TailDisk& d : disks) {
        set_px(to_px(d.x_um), to_px(d.y_um));
        int x0 = to_px(d.x_um - d.r_um), x1 = to_px(d.x_um + d.r_um);
        int y0 = to_px(d.y_um - d.r_um), y1 = to_px(d.y_um + d.r_um);
        for (int py = y0; py <= y1; ++py)
            for (int px = x0; px <= x1; ++px) {
                double cx = (px + 0.5) * pixel_um - radius;
                double cy = (py + 0.5) * pixel_um - radius;
                if (sq(cx - d.x_um) + sq(cy - d.y_um) <= sq(d.r_um)) set_px(px, py);
            }
    }
    std::ofstream pbm(pbm_path, std::ios::binary);
    if (!pbm) throw ConfigError("cannot write " + pbm_path);
    pbm << "P4\n" << size << " " << size << "\n";
    pbm.write(reinterpret_cast<const char*>(img.data()), static_cast<std::streamsize>(img.size()));
    if (!pbm.flush()) throw ConfigError("cannot write " + pbm_path);
}

ConvergeResult converge(const ProcessConfig& c, const Layout& layout, double cv_target) {
    if (cv_target <= 0.0) throw ConfigError("cv_target must be positive");
    ConvergeResult res;
    const bool stochastic = config_is_stochastic(make_context(c, layout, {}));
    const std::uint64_t ladder[] = {1, 2, 5};
    double achieved = std::numeric_limits<double>::infinity();
    for (std::uint64_t decade = 1;; decade *= 10) {
        for (std::uint64_t step : ladder) {
            std::uint64_t n = step * decade;
            if (n > c.max_samples)
                throw ConfigError("did not converge within sim.max_samples = " +
                                  std::to_string(c.max_samples) + " samples; achieved CV " +
                                  std::to_string(achieved));
            double cv;
            if (!stochastic) {
                cv = 0.0; // one batch settles a run with no random draws
            } else {
                BatchStats bs = run_batches(c, layout, n, 10);
                if (bs.std_dev > 0.0 && bs.mean > 0.0) {
                    cv = bs.std_dev / bs.mean;
                } else {
                    // zero spread from a stochastic run is a degenerate
                    // draw, not convergence; bound the CV with a Jeffreys
                    // posterior on the per-die pass probability instead
                    double p = (static_cast<double>(bs.pass) + 0.5) /
                               (static_cast<double>(bs.dies) + 1.0);
                    cv = std::sqrt((1.0 - p) / (p * static_cast<double>(bs.batch_dies)));
                }
            }
            res.trace.emplace_back(n, cv);
            achieved = cv;
            if (cv < cv_target) {
                res.n_required = n;
                ProcessConfig run = c;
                if (c.mode == BondMode::w2w)
                    run.n_wafers = n;
                else
                    run.n_dies = n;
                res.report = simulate(run, layout);
                res.report.cv = cv;
                return res;
            }
        }
    }
}

} // namespace hby
