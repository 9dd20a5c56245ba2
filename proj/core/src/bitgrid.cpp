#include "hbyield/bitgrid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <set>

#include "hbyield/errors.hpp"
#include "hbyield/numeric.hpp"

namespace hby {

BitGrid::BitGrid(int rows, int cols) : rows_(rows), cols_(cols) {
    if (rows < 0 || cols < 0) throw GeometryError("negative raster dimensions");
    wpr_ = (cols + 63) / 64;
    words_.assign(static_cast<std::size_t>(rows) * wpr_, 0);
}

long BitGrid::count() const {
    long n = 0;
    for (std::uint64_t w : words_) n += std::popcount(w);
    return n;
}

bool BitGrid::any() const {
    return std::any_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w != 0; });
}

void BitGrid::clear() { std::fill(words_.begin(), words_.end(), 0); }

void BitGrid::mask_tail() {
    if (wpr_ == 0) return;
    const int rem = cols_ & 63;
    if (rem == 0) return;
    const std::uint64_t mask = (1ull << rem) - 1;
    for (int r = 0; r < rows_; ++r) words_[static_cast<std::size_t>(r) * wpr_ + wpr_ - 1] &= mask;
}

BitGrid& BitGrid::operator|=(const BitGrid& o) {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw GeometryError("raster dimension mismatch");
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
    return *this;
}

BitGrid& BitGrid::operator&=(const BitGrid& o) {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw GeometryError("raster dimension mismatch");
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
    return *this;
}

namespace {

/// dst |= src shifted left by sc bits (bit index grows toward higher c).
/// sc may be negative. Word counts may differ; excess source bits drop.
void or_row_shifted(std::uint64_t* dst, int dst_words, const std::uint64_t* src, int src_words,
                    int sc) {
    if (sc >= 0) {
        const int k = sc >> 6, b = sc & 63;
        for (int w = dst_words - 1; w >= k; --w) {
            const int s = w - k;
            std::uint64_t v = s < src_words ? src[s] << b : 0;
            if (b && s - 1 >= 0 && s - 1 < src_words) v |= src[s - 1] >> (64 - b);
            dst[w] |= v;
        }
    } else {
        const int s0 = -sc;
        const int k = s0 >> 6, b = s0 & 63;
        for (int w = 0; w < dst_words; ++w) {
            const int s = w + k;
            if (s >= src_words) break;
            std::uint64_t v = src[s] >> b;
            if (b && s + 1 < src_words) v |= src[s + 1] << (64 - b);
            dst[w] |= v;
        }
    }
}

} // namespace

void BitGrid::or_shifted(const BitGrid& src, int dr, int dc) {
    for (int r = 0; r < rows_; ++r) {
        const int rs = r - dr;
        if (rs < 0 || rs >= src.rows_) continue;
        or_row_shifted(&words_[static_cast<std::size_t>(r) * wpr_], wpr_,
                       &src.words_[static_cast<std::size_t>(rs) * src.wpr_], src.wpr_, dc);
    }
    mask_tail();
}

void BitGrid::and_shifted(const BitGrid& src, int dr, int dc) {
    BitGrid shifted(rows_, cols_);
    shifted.or_shifted(src, dr, dc);
    *this &= shifted;
}

Offset StructuringElement::min_offset() const {
    Offset m{0, 0};
    for (const Offset& o : offsets) {
        m.dr = std::min(m.dr, o.dr);
        m.dc = std::min(m.dc, o.dc);
    }
    return m;
}

Offset StructuringElement::max_offset() const {
    Offset m{0, 0};
    for (const Offset& o : offsets) {
        m.dr = std::max(m.dr, o.dr);
        m.dc = std::max(m.dc, o.dc);
    }
    return m;
}

StructuringElement disk_se(double radius_um, double cell_w_um, double cell_h_um) {
    if (cell_w_um <= 0 || cell_h_um <= 0) throw GeometryError("cell dimensions must be positive");
    if (radius_um < 0) throw GeometryError("disk radius must be non-negative");
    // A cell belongs to the element when the disk around the anchor cell
    // center reaches the cell's rectangle. Testing the rectangle rather than
    // the cell center keeps the dilated area free of O(cell) bias.
    StructuringElement se;
    const int mr = static_cast<int>(std::ceil((radius_um + cell_h_um / 2) / cell_h_um));
    const int mc = static_cast<int>(std::ceil((radius_um + cell_w_um / 2) / cell_w_um));
    const double r2 = sq(radius_um) * (1 + 1e-12);
    for (int dr = -mr; dr <= mr; ++dr)
        for (int dc = -mc; dc <= mc; ++dc) {
            const double dx = std::max(std::abs(dc) * cell_w_um - cell_w_um / 2, 0.0);
            const double dy = std::max(std::abs(dr) * cell_h_um - cell_h_um / 2, 0.0);
            if (sq(dx) + sq(dy) <= r2) se.offsets.push_back({dr, dc});
        }
    return se;
}

StructuringElement segment_se(double l_um, double theta_rad, double cell_w_um,
                              double cell_h_um) {
    if (cell_w_um <= 0 || cell_h_um <= 0) throw GeometryError("cell dimensions must be positive");
    if (l_um < 0) throw GeometryError("segment length must be non-negative");
    // Exact traversal of every cell rectangle the segment passes through.
    // Cell (r,c) covers [c*cw - cw/2, c*cw + cw/2) x [r*ch - ch/2, ...); the
    // segment starts at the anchor center, so cell (0,0) is always in. A
    // crossing exactly at t = l (or through a corner) does not enter the
    // grazed cell, which keeps se(theta + pi) the exact point reflection.
    std::set<Offset> cells;
    cells.insert({0, 0});
    const double dx = std::cos(theta_rad), dy = std::sin(theta_rad);
    const double inf = std::numeric_limits<double>::infinity();
    std::int32_t c = 0, r = 0;
    const std::int32_t step_c = dx > 0 ? 1 : -1, step_r = dy > 0 ? 1 : -1;
    double t_max_x = std::abs(dx) < 1e-15 ? inf : (0.5 * cell_w_um) / std::abs(dx);
    double t_max_y = std::abs(dy) < 1e-15 ? inf : (0.5 * cell_h_um) / std::abs(dy);
    const double t_dx = std::abs(dx) < 1e-15 ? inf : cell_w_um / std::abs(dx);
    const double t_dy = std::abs(dy) < 1e-15 ? inf : cell_h_um / std::abs(dy);
    while (std::min(t_max_x, t_max_y) < l_um) {
        if (t_max_x < t_max_y) {
            c += step_c;
            t_max_x += t_dx;
        } else if (t_max_y < t_max_x) {
            r += step_r;
            t_max_y += t_dy;
        } else { // exact corner: step diagonally
            c += step_c;
            r += step_r;
            t_max_x += t_dx;
            t_max_y += t_dy;
        }
        cells.insert({r, c});
    }
    StructuringElement se;
    se.offsets.assign(cells.begin(), cells.end());
    return se;
}

StructuringElement reflected(const StructuringElement& se) {
    StructuringElement out;
    out.offsets.reserve(se.offsets.size());
    for (const Offset& o : se.offsets) out.offsets.push_back({-o.dr, -o.dc});
    std::sort(out.offsets.begin(), out.offsets.end());
    return out;
}

BitGrid dilate(const BitGrid& in, const StructuringElement& se) {
    BitGrid out(in.rows(), in.cols());
    for (const Offset& o : se.offsets) out.or_shifted(in, -o.dr, -o.dc);
    return out;
}

void dump_pbm(const BitGrid& grid, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write bitmap file: " + path);
    out << "P1\n" << grid.cols() << " " << grid.rows() << "\n";
    for (int r = 0; r < grid.rows(); ++r) {
        for (int c = 0; c < grid.cols(); ++c) out << (grid.get(r, c) ? '1' : '0');
        out << "\n";
    }
}

} // namespace hby
