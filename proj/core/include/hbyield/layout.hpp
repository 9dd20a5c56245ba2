#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hby {

struct DieSpec {
    double width_um = 10000.0;
    double height_um = 10000.0;

    double area_um2() const { return width_um * height_um; }

    bool operator==(const DieSpec&) const = default;
};

struct WaferSpec {
    double radius_um = 150000.0;
    double edge_exclusion_um = 0.0;

    double usable_radius_um() const { return radius_um - edge_exclusion_um; }
};

/// Die center position in wafer coordinates (wafer center at the origin).
struct DieSite {
    double cx_um = 0.0;
    double cy_um = 0.0;
};

/// All dies whose four corners lie inside the usable radius, on an
/// axis-aligned grid whose grid lines pass through the wafer center.
/// Row-major order starting from the (-x,-y) corner.
std::vector<DieSite> generate_wafer_map(const WaferSpec& wafer, const DieSpec& die);

enum class CellKind : std::uint8_t { empty, dummy, power_ground, critical, redundant };

enum class RedundancyScheme : std::uint8_t { none, dedicated, shared };

struct CellRef {
    std::int32_t row = 0;
    std::int32_t col = 0;

    bool operator==(const CellRef&) const = default;
};

/// One member is the cell set of one replica block. In a dedicated group
/// every member carries the same signals (group survives while any member
/// lives). In a shared group the first n members are mains and the last
/// member is the spare that can replace exactly one failed main.
struct RedundancyGroup {
    std::vector<std::vector<CellRef>> members;
};

struct RedundancyPlan {
    RedundancyScheme scheme = RedundancyScheme::none;
    int mains_per_spare = 0;
    std::vector<RedundancyGroup> groups;

    bool empty() const { return groups.empty(); }
};

/// Block-atomic pad map of one die: each cell is a pad block whose pads all
/// share one kind. Cell (0,0) sits at the (-x,-y) die corner; coordinates
/// returned by cell_* helpers are die-local with the origin at the die
/// center. The grid covers ceil(die/cell) cells; cells straddling the die
/// edge are truncated in area accounting but present in the raster.
class PadBlockGrid {
public:
    PadBlockGrid() = default;
    PadBlockGrid(const DieSpec& die, double cell_w_um, double cell_h_um);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    double cell_w_um() const { return cell_w_; }
    double cell_h_um() const { return cell_h_; }
    const DieSpec& die() const { return die_; }

    CellKind kind(int r, int c) const { return kinds_[idx(r, c)]; }
    std::int32_t group_id(int r, int c) const { return gid_[idx(r, c)]; }

    void set(int r, int c, CellKind k, std::int32_t gid = -1) {
        kinds_[idx(r, c)] = k;
        gid_[idx(r, c)] = gid;
    }

    bool is_functional(int r, int c) const {
        CellKind k = kind(r, c);
        return k == CellKind::critical || k == CellKind::redundant;
    }

    /// Cell extents in die-local coordinates (die center at the origin),
    /// truncated at the die boundary.
    double cell_x0(int c) const;
    double cell_x1(int c) const;
    double cell_y0(int r) const;
    double cell_y1(int r) const;
    /// In-die area of the cell (truncated for edge cells).
    double cell_area_um2(int r, int c) const;

    int count(CellKind k) const;

    bool operator==(const PadBlockGrid&) const = default;

private:
    std::size_t idx(int r, int c) const { return static_cast<std::size_t>(r) * cols_ + c; }

    DieSpec die_;
    int rows_ = 0, cols_ = 0;
    double cell_w_ = 0.0, cell_h_ = 0.0;
    std::vector<CellKind> kinds_;
    std::vector<std::int32_t> gid_;
};

struct Layout {
    PadBlockGrid grid;
    RedundancyPlan plan;
};

enum class PatternKind : std::uint8_t { full, sparse, peripheral, centralized };

struct KindFractions {
    double critical = 1.0;
    double redundant = 0.0;
    double dummy = 0.0;
};

/// Builds one of the four canonical pad layouts. Fractions must sum to 1
/// (1e-9 tolerance); counts are rounded half away from zero, critical first,
/// then redundant, remainder dummy. Redundant cells are paired into
/// dedicated groups of two adjacent blocks; a trailing unpaired redundant
/// cell is demoted to dummy. `full` forces critical = 1.
Layout build_layout(PatternKind pattern, const DieSpec& die, double cell_w_um, double cell_h_um,
                    const KindFractions& fractions, std::uint64_t seed);

/// 100% redundant-block layout for replica-spacing studies: half the blocks
/// are mains, half replicas, paired at the requested center-to-center
/// Euclidean spacing (+- half a block). Greedy deterministic matching given
/// the seed; throws GeometryError naming the first stranded block when no
/// candidate at that spacing remains. spacing_um == 0 yields all-critical
/// singles with an empty plan.
Layout build_random_redundant_layout(const DieSpec& die, double block_um, double spacing_um,
                                     std::uint64_t seed);

/// Shared-redundancy layout: compact tiles of (mains_per_spare + 1) blocks,
/// one spare per tile at the tile center. Leftover edge cells form smaller
/// shared groups, or critical singles when alone.
Layout build_shared_redundant_layout(const DieSpec& die, double block_um, int mains_per_spare);

/// Uniform pad count of a full cell: floor(cell_w/pitch) * floor(cell_h/pitch).
long pads_per_full_cell(const PadBlockGrid& grid, double pitch_um);

/// Pad count of one cell with edge truncation.
long pads_in_cell(const PadBlockGrid& grid, int r, int c, double pitch_um);

/// Cu pattern density D_Cu: pad disc area over pitch cell times the
/// non-empty area fraction of the die.
double cu_pattern_density(const PadBlockGrid& grid, double pitch_um, double bottom_pad_d_um);

/// Splits every cell into factor x factor subcells (same kinds, same groups,
/// plan remapped). Used when block granularity is coarser than the raster.
Layout refined(const Layout& layout, int factor);

/// Structural validation: group sizes, role/kind agreement, fraction sanity.
/// Throws GeometryError on violation.
void validate(const Layout& layout);

/// Layout file round trip. Format: two header comment lines
///   #die_mm=<w>,<h>
///   #grid_um=<cw>,<ch>
/// then rows of comma separated cell tokens E, D, P, C, R:<group_id>,
/// row 0 first. The companion plan file carries
///   #scheme=none|dedicated|shared:<n>
/// and rows group_id,cell_row,cell_col,role,member with role main|replica.
void save_layout(const Layout& layout, const std::string& grid_path, const std::string& plan_path);
Layout load_layout(const std::string& grid_path, const std::string& plan_path);
void save_grid_csv(const PadBlockGrid& grid, const std::string& path);
PadBlockGrid load_grid_csv(const std::string& path);

} // namespace hby
