#include "hbyield/layout.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "hbyield/errors.hpp"
#include "hbyield/numeric.hpp"
#include "hbyield/rng.hpp"

namespace hby {

namespace {

/// Unbiased bounded draw on the raw engine output. mt19937_64's sequence is
/// pinned by the standard, so layout generation is reproducible across
/// platforms (std::uniform_int_distribution is not).
std::uint64_t bounded(std::mt19937_64& g, std::uint64_t n) {
    assert(n > 0);
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
        std::uint64_t x = g();
        if (x >= threshold) return x % n;
    }
}

template <typename T>
void shuffle_vec(std::vector<T>& v, std::mt19937_64& g) {
    for (std::size_t i = v.size(); i > 1; --i)
        std::swap(v[i - 1], v[bounded(g, i)]);
}

} // namespace

std::vector<DieSite> generate_wafer_map(const WaferSpec& wafer, const DieSpec& die) {
    const double ru = wafer.usable_radius_um();
    if (ru <= 0.0) throw GeometryError("usable wafer radius is not positive");
    const double a = die.width_um, b = die.height_um;
    if (a <= 0.0 || b <= 0.0) throw GeometryError("die dimensions must be positive");

    const long imax = static_cast<long>(std::ceil(ru / a));
    const long jmax = static_cast<long>(std::ceil(ru / b));
    const double r2 = ru * ru;
    std::vector<DieSite> sites;
    for (long j = -jmax; j < jmax; ++j) {
        for (long i = -imax; i < imax; ++i) {
            const double x0 = i * a, x1 = (i + 1) * a;
            const double y0 = j * b, y1 = (j + 1) * b;
            const double xm = std::max(x0 * x0, x1 * x1);
            const double ym = std::max(y0 * y0, y1 * y1);
            if (xm + ym <= r2) sites.push_back({0.5 * (x0 + x1), 0.5 * (y0 + y1)});
        }
    }
    return sites;
}

PadBlockGrid::PadBlockGrid(const DieSpec& die, double cell_w_um, double cell_h_um)
    : die_(die), cell_w_(cell_w_um), cell_h_(cell_h_um) {
    if (cell_w_um <= 0.0 || cell_h_um <= 0.0)
        throw GeometryError("cell dimensions must be positive");
    if (die.width_um <= 0.0 || die.height_um <= 0.0)
        throw GeometryError("die dimensions must be positive");
    cols_ = static_cast<int>(std::ceil(die.width_um / cell_w_um - 1e-9));
    rows_ = static_cast<int>(std::ceil(die.height_um / cell_h_um - 1e-9));
    cols_ = std::max(cols_, 1);
    rows_ = std::max(rows_, 1);
    kinds_.assign(static_cast<std::size_t>(rows_) * cols_, CellKind::empty);
    gid_.assign(static_cast<std::size_t>(rows_) * cols_, -1);
}

double PadBlockGrid::cell_x0(int c) const { return c * cell_w_ - 0.5 * die_.width_um; }
double PadBlockGrid::cell_x1(int c) const {
    return std::min((c + 1) * cell_w_, die_.width_um) - 0.5 * die_.width_um;
}
double PadBlockGrid::cell_y0(int r) const { return r * cell_h_ - 0.5 * die_.height_um; }
double PadBlockGrid::cell_y1(int r) const {
    return std::min((r + 1) * cell_h_, die_.height_um) - 0.5 * die_.height_um;
}

double PadBlockGrid::cell_area_um2(int r, int c) const {
    return (cell_x1(c) - cell_x0(c)) * (cell_y1(r) - cell_y0(r));
}

int PadBlockGrid::count(CellKind k) const {
    int n = 0;
    for (CellKind kk : kinds_)
        if (kk == k) ++n;
    return n;
}

long pads_per_full_cell(const PadBlockGrid& grid, double pitch_um) {
    if (pitch_um <= 0.0) throw GeometryError("pitch must be positive");
    return static_cast<long>(std::floor(grid.cell_w_um() / pitch_um + 1e-9)) *
           static_cast<long>(std::floor(grid.cell_h_um() / pitch_um + 1e-9));
}

long pads_in_cell(const PadBlockGrid& grid, int r, int c, double pitch_um) {
    if (pitch_um <= 0.0) throw GeometryError("pitch must be positive");
    const double w = grid.cell_x1(c) - grid.cell_x0(c);
    const double h = grid.cell_y1(r) - grid.cell_y0(r);
    return static_cast<long>(std::floor(w / pitch_um + 1e-9)) *
           static_cast<long>(std::floor(h / pitch_um + 1e-9));
}

double cu_pattern_density(const PadBlockGrid& grid, double pitch_um, double bottom_pad_d_um) {
    if (pitch_um <= 0.0 || bottom_pad_d_um <= 0.0)
        throw GeometryError("pitch and pad diameter must be positive");
    double non_empty = 0.0;
    for (int r = 0; r < grid.rows(); ++r)
        for (int c = 0; c < grid.cols(); ++c)
            if (grid.kind(r, c) != CellKind::empty) non_empty += grid.cell_area_um2(r, c);
    const double r2 = 0.5 * bottom_pad_d_um;
    return kPi * r2 * r2 / (pitch_um * pitch_um) * non_empty / grid.die().area_um2();
}

namespace {

struct Counts {
    long n_cr = 0, n_rd = 0;
};

Counts split_counts(long n_cells, const KindFractions& f) {
    const double sum = f.critical + f.redundant + f.dummy;
    if (std::abs(sum - 1.0) > 1e-9)
        throw ConfigError("cell kind fractions must sum to 1");
    if (f.critical < 0 || f.redundant < 0 || f.dummy < 0)
        throw ConfigError("cell kind fractions must be non-negative");
    Counts c;
    c.n_cr = std::lround(f.critical * n_cells);
    c.n_rd = std::lround(f.redundant * n_cells);
    c.n_cr = std::min(c.n_cr, n_cells);
    c.n_rd = std::min(c.n_rd, n_cells - c.n_cr);
    return c;
}

/// Assigns kinds along a deterministic cell ordering: the first n_cr become
/// critical, the next n_rd redundant (paired consecutively, so pairs are
/// adjacent along the walk), the rest dummy.
void assign_along(Layout& layout, const std::vector<CellRef>& order, Counts cnt) {
    auto& g = layout.grid;
    long i = 0;
    for (; i < cnt.n_cr; ++i) g.set(order[i].row, order[i].col, CellKind::critical);
    if (cnt.n_rd % 2 == 1) --cnt.n_rd; // a dangling singleton group is not allowed
    layout.plan.scheme = cnt.n_rd > 0 ? RedundancyScheme::dedicated : RedundancyScheme::none;
    std::int32_t gid = 0;
    for (long k = 0; k + 1 < cnt.n_rd; k += 2, ++gid) {
        CellRef m = order[i + k], rp = order[i + k + 1];
        g.set(m.row, m.col, CellKind::redundant, gid);
        g.set(rp.row, rp.col, CellKind::redundant, gid);
        layout.plan.groups.push_back({{{m}, {rp}}});
    }
    i += cnt.n_rd;
    for (; i < static_cast<long>(order.size()); ++i)
        g.set(order[i].row, order[i].col, CellKind::dummy);
}

std::vector<CellRef> peripheral_order(int rows, int cols) {
    std::vector<CellRef> order;
    order.reserve(static_cast<std::size_t>(rows) * cols);
    const int layers = (std::min(rows, cols) + 1) / 2;
    for (int L = 0; L < layers; ++L) {
        const int r0 = L, r1 = rows - 1 - L, c0 = L, c1 = cols - 1 - L;
        for (int c = c0; c <= c1; ++c) order.push_back({r0, c});
        for (int r = r0 + 1; r <= r1; ++r) order.push_back({r, c1});
        if (r1 > r0)
            for (int c = c1 - 1; c >= c0; --c) order.push_back({r1, c});
        if (c1 > c0)
            for (int r = r1 - 1; r > r0; --r) order.push_back({r, c0});
    }
    return order;
}

Layout build_peripheral(const DieSpec& die, double cw, double ch, const KindFractions& f) {
    Layout layout{PadBlockGrid(die, cw, ch), {}};
    const int rows = layout.grid.rows(), cols = layout.grid.cols();
    const auto spiral = peripheral_order(rows, cols);
    const Counts cnt = split_counts(static_cast<long>(spiral.size()), f);

    // Critical cells fill whole boundary rings; the leftover is spread at an
    // even stride around the first unfilled ring so the peripheral density
    // stays uniform instead of bunching into one arc.
    std::vector<char> is_cr(spiral.size(), 0);
    long left = cnt.n_cr;
    std::size_t ring_begin = 0;
    for (int L = 0; left > 0 && ring_begin < spiral.size(); ++L) {
        const int rr = rows - 2 * L, cc = cols - 2 * L;
        const std::size_t ring_n = (rr <= 2 || cc <= 2)
                                       ? static_cast<std::size_t>(std::max(0, rr)) * std::max(0, cc)
                                       : 2 * static_cast<std::size_t>(rr + cc) - 4;
        if (left >= static_cast<long>(ring_n)) {
            for (std::size_t i = 0; i < ring_n; ++i) is_cr[ring_begin + i] = 1;
            left -= static_cast<long>(ring_n);
        } else {
            for (long i = 0; i < left; ++i)
                is_cr[ring_begin + static_cast<std::size_t>(i * double(ring_n) / left)] = 1;
            left = 0;
        }
        ring_begin += ring_n;
    }

    std::vector<CellRef> order;
    order.reserve(spiral.size());
    for (std::size_t i = 0; i < spiral.size(); ++i)
        if (is_cr[i]) order.push_back(spiral[i]);
    for (std::size_t i = 0; i < spiral.size(); ++i)
        if (!is_cr[i]) order.push_back(spiral[i]);
    assign_along(layout, order, cnt);
    return layout;
}

Layout build_centralized(const DieSpec& die, double cw, double ch, const KindFractions& f) {
    Layout layout{PadBlockGrid(die, cw, ch), {}};
    const int rows = layout.grid.rows(), cols = layout.grid.cols();
    const long n = static_cast<long>(rows) * cols;
    Counts cnt = split_counts(n, f);

    // Exact-rectangle critical region, kept compact: score = count error +
    // squareness penalty, both in cells, so the block never degenerates into
    // an edge-to-edge band. The cell count may deviate from the request by
    // up to one cell-row of rounding.
    int best_w = 0, best_h = 0;
    long best_score = -1;
    if (cnt.n_cr > 0) {
        const int hc = static_cast<int>(std::clamp<long>(
            std::lround(std::sqrt(double(cnt.n_cr) * rows / cols)), 1, rows));
        for (int h = std::max(1, hc - 3); h <= std::min(rows, hc + 3); ++h) {
            int w = static_cast<int>(std::clamp<long>(std::lround(double(cnt.n_cr) / h), 1, cols));
            for (int ww = std::max(1, w - 1); ww <= std::min(cols, w + 1); ++ww) {
                long score = std::labs(static_cast<long>(h) * ww - cnt.n_cr) + std::abs(ww - h);
                if (best_score < 0 || score < best_score) {
                    best_score = score;
                    best_w = ww;
                    best_h = h;
                }
            }
        }
    }
    const int r0 = (rows - best_h) / 2, c0 = (cols - best_w) / 2;
    std::vector<CellRef> order;
    order.reserve(n);
    for (int r = r0; r < r0 + best_h; ++r)
        for (int c = c0; c < c0 + best_w; ++c) order.push_back({r, c});
    cnt.n_cr = static_cast<long>(best_w) * best_h;
    cnt.n_rd = std::min(cnt.n_rd, n - cnt.n_cr);

    // Remaining cells ring outward shell by shell, each shell walked along
    // its perimeter so that consecutive cells (and hence redundancy pairs)
    // stay spatially adjacent.
    auto in_grid = [&](int r, int c) { return r >= 0 && r < rows && c >= 0 && c < cols; };
    auto push = [&](int r, int c) {
        if (in_grid(r, c)) order.push_back({r, c});
    };
    for (int d = 1; static_cast<long>(order.size()) < n; ++d) {
        const int rt = r0 - d, rb = r0 + best_h - 1 + d;
        const int cl = c0 - d, cr = c0 + best_w - 1 + d;
        for (int c = cl; c <= cr; ++c) push(rt, c);
        for (int r = rt + 1; r <= rb; ++r) push(r, cr);
        for (int c = cr - 1; c >= cl; --c) push(rb, c);
        for (int r = rb - 1; r > rt; --r) push(r, cl);
    }
    assign_along(layout, order, cnt);
    return layout;
}

Layout build_sparse(const DieSpec& die, double cw, double ch, const KindFractions& f,
                    std::uint64_t seed) {
    Layout layout{PadBlockGrid(die, cw, ch), {}};
    auto& g = layout.grid;
    const int rows = g.rows(), cols = g.cols();
    const long n = static_cast<long>(rows) * cols;
    Counts cnt = split_counts(n, f);
    auto rng = make_stream(seed, 0, 0, Stream::layout);

    auto stratified = [&](long k) {
        // k jittered positions, one per stratum of an nx x ny partition
        std::vector<CellRef> out;
        if (k <= 0) return out;
        int nx = static_cast<int>(std::clamp<long>(
            std::lround(std::sqrt(double(k) * cols / rows)), 1, cols));
        int ny = static_cast<int>((k + nx - 1) / nx);
        for (long s = 0; s < k; ++s) {
            int sr = static_cast<int>(s / nx), sc = static_cast<int>(s % nx);
            int rlo = static_cast<int>(static_cast<long>(sr) * rows / ny);
            int rhi = std::max(rlo + 1, static_cast<int>(static_cast<long>(sr + 1) * rows / ny));
            int clo = static_cast<int>(static_cast<long>(sc) * cols / nx);
            int chi = std::max(clo + 1, static_cast<int>(static_cast<long>(sc + 1) * cols / nx));
            rlo = std::min(rlo, rows - 1);
            rhi = std::min(rhi, rows);
            clo = std::min(clo, cols - 1);
            chi = std::min(chi, cols);
            int r = rlo + static_cast<int>(bounded(rng, static_cast<std::uint64_t>(rhi - rlo)));
            int c = clo + static_cast<int>(bounded(rng, static_cast<std::uint64_t>(chi - clo)));
            out.push_back({r, c});
        }
        return out;
    };

    auto free_at = [&](int r, int c) {
        return r >= 0 && r < rows && c >= 0 && c < cols && g.kind(r, c) == CellKind::empty;
    };
    auto next_free = [&](CellRef want) -> CellRef {
        if (free_at(want.row, want.col)) return want;
        for (int radius = 1; radius < rows + cols; ++radius)
            for (int dr = -radius; dr <= radius; ++dr)
                for (int dc = -radius; dc <= radius; ++dc) {
                    if (std::max(std::abs(dr), std::abs(dc)) != radius) continue;
                    if (free_at(want.row + dr, want.col + dc))
                        return {want.row + dr, want.col + dc};
                }
        throw GeometryError("no free cell left in sparse layout");
    };

    for (const CellRef& want : stratified(cnt.n_cr)) {
        CellRef at = next_free(want);
        g.set(at.row, at.col, CellKind::critical);
    }
    long n_pairs = cnt.n_rd / 2;
    layout.plan.scheme = n_pairs > 0 ? RedundancyScheme::dedicated : RedundancyScheme::none;
    std::int32_t gid = 0;
    for (const CellRef& want : stratified(n_pairs)) {
        CellRef m = next_free(want);
        g.set(m.row, m.col, CellKind::redundant, gid);
        CellRef rp = next_free(m);
        g.set(rp.row, rp.col, CellKind::redundant, gid);
        layout.plan.groups.push_back({{{m}, {rp}}});
        ++gid;
    }
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            if (g.kind(r, c) == CellKind::empty) g.set(r, c, CellKind::dummy);
    return layout;
}

} // namespace

Layout build_layout(PatternKind pattern, const DieSpec& die, double cell_w_um, double cell_h_um,
                    const KindFractions& fractions, std::uint64_t seed) {
    switch (pattern) {
    case PatternKind::full: {
        Layout layout{PadBlockGrid(die, cell_w_um, cell_h_um), {}};
        for (int r = 0; r < layout.grid.rows(); ++r)
            for (int c = 0; c < layout.grid.cols(); ++c)
                layout.grid.set(r, c, CellKind::critical);
        return layout;
    }
    case PatternKind::peripheral:
        return build_peripheral(die, cell_w_um, cell_h_um, fractions);
    case PatternKind::centralized:
        return build_centralized(die, cell_w_um, cell_h_um, fractions);
    case PatternKind::sparse:
        return build_sparse(die, cell_w_um, cell_h_um, fractions, seed);
    }
    throw ConfigError("unknown layout pattern");
}

Layout build_random_redundant_layout(const DieSpec& die, double block_um, double spacing_um,
                                     std::uint64_t seed) {
    Layout layout{PadBlockGrid(die, block_um, block_um), {}};
    auto& g = layout.grid;
    const int rows = g.rows(), cols = g.cols();

    if (spacing_um == 0.0) {
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) g.set(r, c, CellKind::critical);
        return layout;
    }
    if (spacing_um < 0.0) throw GeometryError("replica spacing must be non-negative");

    const double tol = 0.5 * block_um;
    const int maxd = static_cast<int>(std::ceil((spacing_um + tol) / block_um));
    std::vector<CellRef> offsets;
    for (int dr = -maxd; dr <= maxd; ++dr)
        for (int dc = -maxd; dc <= maxd; ++dc) {
            if (dr == 0 && dc == 0) continue;
            double d = std::hypot(dc * block_um, dr * block_um);
            if (d >= spacing_um - tol && d <= spacing_um + tol) offsets.push_back({dr, dc});
        }
    if (offsets.empty())
        throw GeometryError("no block offset realizes replica spacing " +
                            std::to_string(spacing_um) + " um at block size " +
                            std::to_string(block_um) + " um");

    std::vector<CellRef> order;
    order.reserve(static_cast<std::size_t>(rows) * cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) order.push_back({r, c});
    auto uidx = [&](int r, int c) { return static_cast<std::size_t>(r) * cols + c; };

    // Greedy matching strands blocks, so a stranded block steals a used
    // partner and the displaced block continues the walk until it finds a
    // free one. The walk budget only runs out when no perfect matching
    // exists (odd pockets, unreachable corners).
    const std::size_t n_cells = static_cast<std::size_t>(rows) * cols;
    std::string stranded;
    for (std::uint64_t attempt = 0; attempt < 4; ++attempt) {
        auto rng = make_stream(seed, attempt, 0, Stream::layout);
        shuffle_vec(order, rng);
        std::vector<std::int32_t> mate(n_cells, -1);
        std::vector<CellRef> offs = offsets;
        bool ok = true;
        for (const CellRef& start : order) {
            if (mate[uidx(start.row, start.col)] >= 0) continue;
            CellRef cur = start;
            long budget = static_cast<long>(8 * n_cells + 1024);
            bool matched = false;
            while (budget-- > 0) {
                shuffle_vec(offs, rng);
                bool any = false, is_free = false;
                CellRef found{};
                for (const CellRef& o : offs) {
                    int pr = cur.row + o.row, pc = cur.col + o.col;
                    if (pr < 0 || pr >= rows || pc < 0 || pc >= cols) continue;
                    if (!any) {
                        any = true;
                        found = {pr, pc};
                    }
                    if (mate[uidx(pr, pc)] < 0) {
                        found = {pr, pc};
                        is_free = true;
                        break;
                    }
                }
                if (!any) break; // no partner in bounds at all
                std::size_t ci = uidx(cur.row, cur.col), fi = uidx(found.row, found.col);
                if (is_free) {
                    mate[ci] = static_cast<std::int32_t>(fi);
                    mate[fi] = static_cast<std::int32_t>(ci);
                    matched = true;
                    break;
                }
                // steal: displace found's mate and continue from it
                std::int32_t qi = mate[fi];
                mate[qi] = -1;
                mate[ci] = static_cast<std::int32_t>(fi);
                mate[fi] = static_cast<std::int32_t>(ci);
                cur = {qi / cols, qi % cols};
            }
            if (!matched) {
                stranded = "stranded block (" + std::to_string(cur.row) + "," +
                           std::to_string(cur.col) + "): no free partner at spacing " +
                           std::to_string(spacing_um) + " um";
                ok = false;
                break;
            }
        }
        if (!ok) continue;
        layout.plan.scheme = RedundancyScheme::dedicated;
        std::int32_t gid = 0;
        for (const CellRef& m : order) {
            std::size_t mi = uidx(m.row, m.col);
            std::int32_t pi = mate[mi];
            if (pi < static_cast<std::int32_t>(mi)) continue; // emitted from the other side
            CellRef rp{pi / cols, pi % cols};
            g.set(m.row, m.col, CellKind::redundant, gid);
            g.set(rp.row, rp.col, CellKind::redundant, gid);
            layout.plan.groups.push_back({{{m}, {rp}}});
            ++gid;
        }
        return layout;
    }
    throw GeometryError(stranded);
}

Layout build_shared_redundant_layout(const DieSpec& die, double block_um, int mains_per_spare) {
    if (mains_per_spare < 1) throw ConfigError("mains_per_spare must be >= 1");
    Layout layout{PadBlockGrid(die, block_um, block_um), {}};
    auto& g = layout.grid;
    const int rows = g.rows(), cols = g.cols();
    const int gsz = mains_per_spare + 1;

    int th = 1, tw = gsz;
    for (int h = 1; h * h <= gsz; ++h)
        if (gsz % h == 0) {
            th = h;
            tw = gsz / h;
        }

    layout.plan.scheme = RedundancyScheme::shared;
    layout.plan.mains_per_spare = mains_per_spare;
    std::int32_t gid = 0;
    for (int tr = 0; tr < rows; tr += th)
        for (int tc = 0; tc < cols; tc += tw) {
            std::vector<CellRef> cells;
            for (int r = tr; r < std::min(tr + th, rows); ++r)
                for (int c = tc; c < std::min(tc + tw, cols); ++c) cells.push_back({r, c});
            if (cells.size() < 2) {
                for (const CellRef& cr : cells) g.set(cr.row, cr.col, CellKind::critical);
                continue;
            }
            std::size_t spare_at = cells.size() == static_cast<std::size_t>(gsz)
                                       ? static_cast<std::size_t>((th / 2) * std::min(tw, cols - tc) +
                                                                  std::min(tw, cols - tc) / 2)
                                       : 0;
            spare_at = std::min(spare_at, cells.size() - 1);
            RedundancyGroup grp;
            for (std::size_t k = 0; k < cells.size(); ++k)
                if (k != spare_at) grp.members.push_back({cells[k]});
            grp.members.push_back({cells[spare_at]});
            for (const CellRef& cr : cells) g.set(cr.row, cr.col, CellKind::redundant, gid);
            layout.plan.groups.push_back(std::move(grp));
            ++gid;
        }
    return layout;
}

Layout refined(const Layout& layout, int factor) {
    if (factor < 1) throw ConfigError("refinement factor must be >= 1");
    if (factor == 1) return layout;
    const auto& g = layout.grid;
    Layout out{PadBlockGrid(g.die(), g.cell_w_um() / factor, g.cell_h_um() / factor), {}};
    auto& og = out.grid;
    for (int r = 0; r < og.rows(); ++r)
        for (int c = 0; c < og.cols(); ++c) {
            int pr = std::min(r / factor, g.rows() - 1);
            int pc = std::min(c / factor, g.cols() - 1);
            og.set(r, c, g.kind(pr, pc), g.group_id(pr, pc));
        }
    out.plan.scheme = layout.plan.scheme;
    out.plan.mains_per_spare = layout.plan.mains_per_spare;
    for (const auto& grp : layout.plan.groups) {
        RedundancyGroup ng;
        for (const auto& member : grp.members) {
            std::vector<CellRef> cells;
            for (const CellRef& cr : member)
                for (int i = 0; i < factor; ++i)
                    for (int j = 0; j < factor; ++j) {
                        int rr = cr.row * factor + i, cc = cr.col * factor + j;
                        if (rr < og.rows() && cc < og.cols()) cells.push_back({rr, cc});
                    }
            ng.members.push_back(std::move(cells));
        }
        out.plan.groups.push_back(std::move(ng));
    }
    return out;
}

void validate(const Layout& layout) {
    const auto& g = layout.grid;
    const auto& plan = layout.plan;
    std::vector<char> covered(static_cast<std::size_t>(g.rows()) * g.cols(), 0);
    for (std::size_t gi = 0; gi < plan.groups.size(); ++gi) {
        const auto& grp = plan.groups[gi];
        std::size_t total = 0;
        if (grp.members.size() < 2)
            throw GeometryError("redundancy group " + std::to_string(gi) +
                                " has fewer than 2 members");
        for (const auto& member : grp.members) {
            if (member.empty())
                throw GeometryError("redundancy group " + std::to_string(gi) +
                                    " has an empty member");
            total += member.size();
            for (const CellRef& cr : member) {
                if (cr.row < 0 || cr.row >= g.rows() || cr.col < 0 || cr.col >= g.cols())
                    throw GeometryError("redundancy plan cell out of bounds");
                if (g.kind(cr.row, cr.col) != CellKind::redundant)
                    throw GeometryError("plan cell (" + std::to_string(cr.row) + "," +
                                        std::to_string(cr.col) + ") is not a redundant cell");
                if (g.group_id(cr.row, cr.col) != static_cast<std::int32_t>(gi))
                    throw GeometryError("plan/grid group id mismatch at (" +
                                        std::to_string(cr.row) + "," + std::to_string(cr.col) +
                                        ")");
                auto& flag = covered[static_cast<std::size_t>(cr.row) * g.cols() + cr.col];
                if (flag)
                    throw GeometryError("cell (" + std::to_string(cr.row) + "," +
                                        std::to_string(cr.col) + ") appears in two members");
                flag = 1;
            }
        }
        if (total < 2)
            throw GeometryError("redundancy group " + std::to_string(gi) + " has a single cell");
    }
    for (int r = 0; r < g.rows(); ++r)
        for (int c = 0; c < g.cols(); ++c) {
            bool is_rd = g.kind(r, c) == CellKind::redundant;
            bool cov = covered[static_cast<std::size_t>(r) * g.cols() + c];
            if (is_rd && !cov)
                throw GeometryError("redundant cell (" + std::to_string(r) + "," +
                                    std::to_string(c) + ") belongs to no group");
            if (!is_rd && cov)
                throw GeometryError("non-redundant cell (" + std::to_string(r) + "," +
                                    std::to_string(c) + ") referenced by the plan");
        }
    if (plan.scheme == RedundancyScheme::none && !plan.groups.empty())
        throw GeometryError("scheme none with non-empty group list");
}

namespace {

std::string kind_token(CellKind k, std::int32_t gid) {
    switch (k) {
    case CellKind::empty: return "E";
    case CellKind::dummy: return "D";
    case CellKind::power_ground: return "P";
    case CellKind::critical: return "C";
    case CellKind::redundant: return "R:" + std::to_string(gid);
    }
    return "E";
}

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

} // namespace

void save_grid_csv(const PadBlockGrid& grid, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write layout file: " + path);
    out << "#die_mm=" << fmt_g(grid.die().width_um / 1000.0) << ","
        << fmt_g(grid.die().height_um / 1000.0) << "\n";
    out << "#grid_um=" << fmt_g(grid.cell_w_um()) << "," << fmt_g(grid.cell_h_um()) << "\n";
    for (int r = 0; r < grid.rows(); ++r) {
        for (int c = 0; c < grid.cols(); ++c) {
            if (c) out << ",";
            out << kind_token(grid.kind(r, c), grid.group_id(r, c));
        }
        out << "\n";
    }
}

PadBlockGrid load_grid_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read layout file: " + path);
    double die_w = 0, die_h = 0, cw = 0, chh = 0;
    bool have_die = false, have_grid = false;
    std::vector<std::vector<std::string>> cells;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.rfind("#die_mm=", 0) == 0) {
                if (std::sscanf(line.c_str() + 8, "%lf,%lf", &die_w, &die_h) != 2)
                    throw ConfigError("bad #die_mm header in " + path);
                have_die = true;
            } else if (line.rfind("#grid_um=", 0) == 0) {
                if (std::sscanf(line.c_str() + 9, "%lf,%lf", &cw, &chh) != 2)
                    throw ConfigError("bad #grid_um header in " + path);
                have_grid = true;
            }
            continue;
        }
        std::vector<std::string> row;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) row.push_back(tok);
        cells.push_back(std::move(row));
    }
    if (!have_die || !have_grid)
        throw ConfigError("layout file missing #die_mm/#grid_um headers: " + path);
    PadBlockGrid grid(DieSpec{die_w * 1000.0, die_h * 1000.0}, cw, chh);
    if (static_cast<int>(cells.size()) != grid.rows())
        throw ConfigError("layout row count does not match die/grid headers in " + path);
    for (int r = 0; r < grid.rows(); ++r) {
        if (static_cast<int>(cells[r].size()) != grid.cols())
            throw ConfigError("layout column count mismatch at row " + std::to_string(r));
        for (int c = 0; c < grid.cols(); ++c) {
            const std::string& t = cells[r][c];
            if (t == "E")
                grid.set(r, c, CellKind::empty);
            else if (t == "D")
                grid.set(r, c, CellKind::dummy);
            else if (t == "P")
                grid.set(r, c, CellKind::power_ground);
            else if (t == "C")
                grid.set(r, c, CellKind::critical);
            else if (t.rfind("R:", 0) == 0)
                grid.set(r, c, CellKind::redundant,
                         static_cast<std::int32_t>(std::stol(t.substr(2))));
            else
                throw ConfigError("unknown cell token '" + t + "' at (" + std::to_string(r) +
                                  "," + std::to_string(c) + ")");
        }
    }
    return grid;
}

void save_layout(const Layout& layout, const std::string& grid_path,
                 const std::string& plan_path) {
    save_grid_csv(layout.grid, grid_path);
    std::ofstream out(plan_path);
    if (!out) throw ConfigError("cannot write plan file: " + plan_path);
    switch (layout.plan.scheme) {
    case RedundancyScheme::none: out << "#scheme=none\n"; break;
    case RedundancyScheme::dedicated: out << "#scheme=dedicated\n"; break;
    case RedundancyScheme::shared:
        out << "#scheme=shared:" << layout.plan.mains_per_spare << "\n";
        break;
    }
    out << "group_id,cell_row,cell_col,role,member\n";
    for (std::size_t gi = 0; gi < layout.plan.groups.size(); ++gi) {
        const auto& grp = layout.plan.groups[gi];
        for (std::size_t mi = 0; mi < grp.members.size(); ++mi) {
            const bool is_main = layout.plan.scheme == RedundancyScheme::shared
                                     ? mi + 1 < grp.members.size()
                                     : mi == 0;
            for (const CellRef& cr : grp.members[mi])
                out << gi << "," << cr.row << "," << cr.col << ","
                    << (is_main ? "main" : "replica") << "," << mi << "\n";
        }
    }
}

Layout load_layout(const std::string& grid_path, const std::string& plan_path) {
    Layout layout;
    layout.grid = load_grid_csv(grid_path);
    std::ifstream in(plan_path);
    if (!in) throw ConfigError("cannot read plan file: " + plan_path);
    std::string line;
    bool have_scheme = false, have_header = false;
    // gid -> member index -> cells; and gid -> member index -> role
    std::map<std::int32_t, std::map<int, std::vector<CellRef>>> acc;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line == "#scheme=none")
                layout.plan.scheme = RedundancyScheme::none;
            else if (line == "#scheme=dedicated")
                layout.plan.scheme = RedundancyScheme::dedicated;
            else if (line.rfind("#scheme=shared:", 0) == 0) {
                layout.plan.scheme = RedundancyScheme::shared;
                layout.plan.mains_per_spare = std::stoi(line.substr(15));
            } else
                throw ConfigError("bad #scheme header in " + plan_path);
            have_scheme = true;
            continue;
        }
        if (!have_header) {
            if (line.rfind("group_id,cell_row,cell_col,role", 0) != 0)
                throw ConfigError("bad plan header in " + plan_path);
            have_header = true;
            continue;
        }
        std::stringstream ss(line);
        std::string tok;
        std::vector<std::string> f;
        while (std::getline(ss, tok, ',')) f.push_back(tok);
        if (f.size() < 4) throw ConfigError("bad plan row: " + line);
        std::int32_t gid = static_cast<std::int32_t>(std::stol(f[0]));
        CellRef cr{static_cast<std::int32_t>(std::stol(f[1])),
                   static_cast<std::int32_t>(std::stol(f[2]))};
        if (f[3] != "main" && f[3] != "replica")
            throw ConfigError("bad role '" + f[3] + "' in plan row: " + line);
        int member = f.size() >= 5 ? std::stoi(f[4]) : (f[3] == "main" ? 0 : 1);
        acc[gid][member].push_back(cr);
    }
    if (!have_scheme) throw ConfigError("plan file missing #scheme header: " + plan_path);
    std::int32_t expect = 0;
    for (auto& [gid, members] : acc) {
        if (gid != expect++)
            throw ConfigError("plan group ids must be contiguous from 0");
        RedundancyGroup grp;
        int mexpect = 0;
        for (auto& [mi, cells] : members) {
            if (mi != mexpect++)
                throw ConfigError("plan member indices must be contiguous from 0 in group " +
                                  std::to_string(gid));
            grp.members.push_back(std::move(cells));
        }
        layout.plan.groups.push_back(std::move(grp));
    }
    validate(layout);
    return layout;
}

} // namespace hby
