#include "hbyield/critical_area.hpp"

#include <algorithm>
#include <map>

#include "hbyield/errors.hpp"

namespace hby {

namespace {

/// Shared scratch for one kill-map evaluation: reflected shape (a single
/// cell's dilation is cell + shat) and cached pairwise intersections for the
/// dominant case of two-single-cell dedicated groups, keyed by cell offset.
struct ShapeCache {
    explicit ShapeCache(const StructuringElement& se) : shat(reflected(se).offsets) {}

    const std::vector<Offset>& isect(Offset d) {
        auto it = pair_isect.find(d);
        if (it != pair_isect.end()) return it->second;
        std::vector<Offset> out;
        for (const Offset& o : shat)
            if (std::binary_search(shat.begin(), shat.end(), Offset{o.dr - d.dr, o.dc - d.dc}))
                out.push_back(o);
        return pair_isect.emplace(d, std::move(out)).first->second;
    }

    std::vector<Offset> shat; // sorted by reflected()
    std::map<Offset, std::vector<Offset>> pair_isect;
};

} // namespace

KillMap kill_map(const Layout& layout, const StructuringElement& se) {
    const PadBlockGrid& g = layout.grid;
    if (se.offsets.empty()) throw GeometryError("empty structuring element");
    const Offset lo = se.min_offset(), hi = se.max_offset();
    const int pad_r = std::max(0, hi.dr), pad_c = std::max(0, hi.dc);
    const int rows = g.rows() + pad_r + std::max(0, -lo.dr);
    const int cols = g.cols() + pad_c + std::max(0, -lo.dc);

    KillMap km;
    km.pad_r = pad_r;
    km.pad_c = pad_c;

    BitGrid crit(rows, cols);
    bool any_crit = false;
    for (int r = 0; r < g.rows(); ++r)
        for (int c = 0; c < g.cols(); ++c)
            if (g.kind(r, c) == CellKind::critical) {
                crit.set(r + pad_r, c + pad_c);
                any_crit = true;
            }
    km.map = any_crit ? dilate(crit, se) : BitGrid(rows, cols);

    if (layout.plan.empty()) return km;

    ShapeCache cache(se);
    BitGrid scratch(rows, cols), acc(rows, cols), seen(rows, cols), tmp(rows, cols);
    auto build_member = [&](BitGrid& dst, const std::vector<CellRef>& member) {
        dst.clear();
        for (const CellRef& cr : member)
            for (const Offset& o : cache.shat)
                dst.set(cr.row + pad_r + o.dr, cr.col + pad_c + o.dc);
    };

    for (const RedundancyGroup& grp : layout.plan.groups) {
        if (layout.plan.scheme == RedundancyScheme::dedicated) {
            if (grp.members.size() == 2 && grp.members[0].size() == 1 &&
                grp.members[1].size() == 1) {
                const CellRef a = grp.members[0][0], b = grp.members[1][0];
                for (const Offset& o :
                     cache.isect({b.row - a.row, b.col - a.col}))
                    km.map.set(a.row + pad_r + o.dr, a.col + pad_c + o.dc);
                continue;
            }
            build_member(acc, grp.members[0]);
            for (std::size_t m = 1; m < grp.members.size(); ++m) {
                build_member(scratch, grp.members[m]);
                acc &= scratch;
                if (!acc.any()) break;
            }
            km.map |= acc;
        } else {
            // shared: kill when >= 2 mains are hit, or a main and the spare
            seen.clear();
            for (std::size_t m = 0; m + 1 < grp.members.size(); ++m) {
                build_member(scratch, grp.members[m]);
                tmp = seen;
                tmp &= scratch;
                km.map |= tmp;
                seen |= scratch;
            }
            build_member(scratch, grp.members.back());
            seen &= scratch;
            km.map |= seen;
        }
    }
    return km;
}

double critical_area_um2(const Layout& layout, const StructuringElement& se) {
    const KillMap km = kill_map(layout, se);
    return static_cast<double>(km.map.count()) * layout.grid.cell_w_um() *
           layout.grid.cell_h_um();
}

} // namespace hby
