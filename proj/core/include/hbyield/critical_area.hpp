#pragma once

#include "hbyield/bitgrid.hpp"
#include "hbyield/layout.hpp"

namespace hby {

/// Kill map of a defect shape against a pad layout, in defect-center
/// position space on the layout's own cell raster. Cell (0,0) of the map is
/// the die cell (0,0) shifted by (pad_r, pad_c): the map is padded by the
/// structuring element's bounding box because a defect centered outside the
/// die can still reach it.
///
/// A position kills the die when the defect shape placed there
///   - touches any critical cell, or
///   - touches every member of a dedicated redundancy group, or
///   - touches >= 2 mains of a shared group, or a main and its spare.
struct KillMap {
    BitGrid map;
    int pad_r = 0;
    int pad_c = 0;
};

KillMap kill_map(const Layout& layout, const StructuringElement& se);

/// Wafer-plane area of the kill map in um^2 (cell count times cell area).
/// Exceeds the die area once the shape is large enough to reach the die
/// from outside.
double critical_area_um2(const Layout& layout, const StructuringElement& se);

} // namespace hby
