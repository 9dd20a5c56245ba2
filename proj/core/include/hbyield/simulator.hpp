#pragma once

#include <cstdint>
#include <vector>

#include "hbyield/config.hpp"
#include "hbyield/layout.hpp"
#include "hbyield/report.hpp"

namespace hby {

struct TailDisk {
    double x_um = 0.0;
    double y_um = 0.0;
    double r_um = 0.0;
};

/// Void footprint of one particle: a main disk at the landing site plus,
/// for W2W bonds, tail disks marching radially away from the wafer center.
/// Tail radii fall linearly to tail_shrink_ratio of the first disk and are
/// scaled so their summed area equals the fitted S.
struct VoidInstance {
    double x_um = 0.0; // landing site, wafer coords (W2W) or die coords (D2W)
    double y_um = 0.0;
    double main_r_um = 0.0;
    double theta_rad = 0.0; // outward direction
    std::vector<TailDisk> tail;
};

/// Builds the void of a particle of thickness t landed at (x, y), measured
/// from the wafer (or die) center. with_tail selects the W2W morphology.
VoidInstance make_void(double x_um, double y_um, double t_um, const DefectParams& p,
                       bool with_tail);

/// Channel switches; a disabled check passes every cell.
struct SimChannels {
    bool overlay = true;
    bool defect = true;
    bool recess = true;
};

/// Die-survival tallies of one run. Component counters apply each check in
/// isolation; pass_all requires every cell to clear all enabled checks
/// jointly, with redundancy groups rescued per their scheme.
struct SimCounts {
    std::uint64_t dies = 0;
    std::uint64_t pass_ovl = 0;
    std::uint64_t pass_df = 0;
    std::uint64_t pass_cr = 0;
    std::uint64_t pass_all = 0;
    std::vector<double> unit_yields; // per wafer (W2W) or per die (D2W)
};

/// W2W run: n_wafers wafers, each with one sampled distortion set, one
/// Poisson particle population with full void morphology, and per-cell
/// recess draws; every die site on the wafer map is examined.
/// wafer_offset shifts the wafer entity ids so batches stay independent.
SimCounts simulate_w2w(const ProcessConfig& c, const Layout& layout, std::uint64_t n_wafers,
                       std::uint64_t wafer_offset = 0, SimChannels channels = {});

/// D2W run: n_dies independent dies, distortions sampled per die, main
/// voids only.
SimCounts simulate_d2w(const ProcessConfig& c, const Layout& layout, std::uint64_t n_dies,
                       std::uint64_t die_offset = 0, SimChannels channels = {});

/// Full Monte Carlo run per the config ([sim] section selects the counts
/// and seed); reports component and overall survival rates plus the CV of
/// the overall yield estimate.
YieldReport simulate(const ProcessConfig& c, const Layout& layout, SimChannels channels = {});

/// CV = std/mean of the overall yield over `reps` independent batches of
/// n sample units (wafers or dies per the mode).
double batch_cv(const ProcessConfig& c, const Layout& layout, std::uint64_t n, int reps = 10);

struct ConvergeResult {
    std::uint64_t n_required = 0;
    YieldReport report;
    std::vector<std::pair<std::uint64_t, double>> trace; // (n, cv) per candidate
};

/// Walks a 1-2-5 ladder of batch sizes until batch_cv drops below
/// cv_target; returns the smallest passing candidate and a report over its
/// repetition set. Throws ConfigError with the achieved CV when the ladder
/// exceeds max_samples without converging.
ConvergeResult converge(const ProcessConfig& c, const Layout& layout, double cv_target);

/// Writes the void disks of one simulated wafer as CSV rows x_um,y_um,r_um
/// (exactly the population simulate_w2w draws for the same seed and wafer
/// id) and, when pbm_path is non-empty, a raster of the wafer plane with
/// void pixels set for visual inspection.
void dump_void_map(const ProcessConfig& c, std::uint64_t wafer_id, const std::string& csv_path,
                   const std::string& pbm_path = "", double pixel_um = 100.0);

} // namespace hby
