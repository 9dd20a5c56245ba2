#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hby {

/// Word-packed boolean raster. Bit (r,c) lives in word r*wpr + c/64.
class BitGrid {
public:
    BitGrid() = default;
    BitGrid(int rows, int cols);

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    bool get(int r, int c) const {
        return (words_[word_index(r, c)] >> (c & 63)) & 1u;
    }
    void set(int r, int c, bool v = true) {
        const std::uint64_t bit = 1ull << (c & 63);
        if (v)
            words_[word_index(r, c)] |= bit;
        else
            words_[word_index(r, c)] &= ~bit;
    }

    long count() const;
    bool any() const;
    void clear();

    BitGrid& operator|=(const BitGrid& o);
    BitGrid& operator&=(const BitGrid& o);
    bool operator==(const BitGrid&) const = default;

    /// this(r,c) |= src(r - dr, c - dc); out-of-range source bits read as 0.
    /// Dimensions may differ.
    void or_shifted(const BitGrid& src, int dr, int dc);

    /// this(r,c) &= src(r - dr, c - dc), same shift convention.
    void and_shifted(const BitGrid& src, int dr, int dc);

private:
    std::size_t word_index(int r, int c) const {
        return static_cast<std::size_t>(r) * wpr_ + (c >> 6);
    }
    void mask_tail();

    int rows_ = 0, cols_ = 0;
    int wpr_ = 0; // words per row
    std::vector<std::uint64_t> words_;
};

/// Integer cell offset of a structuring element.
struct Offset {
    std::int32_t dr = 0;
    std::int32_t dc = 0;

    bool operator==(const Offset&) const = default;
    auto operator<=>(const Offset&) const = default;
};

/// A structuring element is a set of cell offsets relative to its anchor.
/// Dilation uses the convention out(c) = OR over o of in(c + o), i.e. out
/// marks every anchor position from which the element reaches a set input
/// cell.
struct StructuringElement {
    std::vector<Offset> offsets;

    Offset min_offset() const;
    Offset max_offset() const;
};

/// Cells whose rectangle the disk of radius_um around the anchor cell
/// center reaches. Always contains the origin; testing rectangles instead
/// of centers keeps dilated areas free of O(cell) bias.
StructuringElement disk_se(double radius_um, double cell_w_um, double cell_h_um);

/// Cells whose rectangle the segment from the anchor cell center crosses,
/// length l_um at angle theta (x toward +c, y toward +r), by exact grid
/// traversal. se(theta + pi) is the point reflection of se(theta).
StructuringElement segment_se(double l_um, double theta_rad, double cell_w_um, double cell_h_um);

/// Point reflection through the anchor.
StructuringElement reflected(const StructuringElement& se);

/// out(c) = OR over o in se of in(c + o); result has in's dimensions.
BitGrid dilate(const BitGrid& in, const StructuringElement& se);

/// Plain PBM (P1) bitmap dump, row 0 first.
void dump_pbm(const BitGrid& grid, const std::string& path);

} // namespace hby
