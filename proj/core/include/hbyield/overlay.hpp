#pragma once

#include <utility>
#include <vector>

#include "layout.hpp"

namespace hby {

/// Misalignment model inputs. Lengths in um, rotation in urad, magnification
/// in ppm. The analytical model consumes the distribution means; the
/// simulator additionally samples around them.
struct OverlayParams {
    double sigma1_um = 0.02;  // random (pad-level) misalignment std
    double tx_um = 0.0;       // x translation
    double ty_um = 0.0;       // y translation
    double alpha_urad = 0.05; // rotation
    double magnification_ppm = 0.05;

    // pad geometry feeding the survival bound
    double pitch_um = 1.0;
    double d1_um = 0.3; // top pad diameter, d1 <= d2
    double d2_um = 0.5; // bottom pad diameter
    double k_ca = 0.5;  // min surviving contact area, fraction of top pad area
    double k_cd = 0.5;  // min surviving critical distance, fraction of ideal
};

/// Magnification is linear in bonded-wafer warpage: E = k_mag * B.
/// k_mag in 1/m, warpage in um; returns ppm.
inline double magnification_from_warpage(double k_mag_per_m, double warpage_um) {
    return k_mag_per_m * warpage_um; // (1/m) * um = 1e-6 = ppm
}

struct Shift {
    double dx_um = 0.0;
    double dy_um = 0.0;
    double s_um = 0.0;
};

/// Systematic misalignment at (x, y): dx = Tx - alpha*y + E*x,
/// dy = Ty + alpha*x + E*y, s = hypot(dx, dy). Coordinates are wafer-global
/// for W2W and die-local for D2W.
Shift systematic_shift(const OverlayParams& p, double x_um, double y_um);

/// Overlap area of the top pad (radius r1) shifted s against the bottom pad
/// (radius r2 >= r1): full top-pad area while contained, a circular lens in
/// between, zero once separated. Continuous at both seams.
double contact_area(double s_um, double r1_um, double r2_um);

/// Largest misalignment a single pad survives: the smaller of the
/// contact-area bound (s* with contact_area(s*) = k_ca*pi*r1^2, found by
/// bisection, the area being continuous and non-increasing in s) and the
/// critical-distance bound (1-k_cd)*p - d1/2 + (k_cd-1/2)*d2.
double max_allowed_misalignment(const OverlayParams& p);

/// P(|s_i + u| < delta) for the random misalignment u ~ N(0, sigma1):
/// Phi((delta-s)/sigma1) - Phi((-delta-s)/sigma1). sigma1 == 0 degenerates
/// to the indicator of |s_i| < delta.
double pad_pos(double delta_um, double s_i_um, double sigma1_um);

/// Vertices of the convex hull of every functional (critical + redundant)
/// cell's corners, in die-local coordinates. s is a convex function of
/// position (norm of an affine map), so its maximum over the functional
/// region lands on a hull vertex; site loops evaluate only these. Empty
/// when the layout has no functional cell.
std::vector<std::pair<double, double>> functional_corner_hull(const PadBlockGrid& grid);

/// Worst systematic misalignment over the functional cells of a die
/// centered at (cx, cy), evaluated on the corner hull. Throws GeometryError
/// if the layout has no functional cell.
double max_functional_shift_um(const PadBlockGrid& grid, const OverlayParams& p, double cx_um,
                               double cy_um);

/// Die survival probability under the overlay channel: the minimum pad POS,
/// i.e. pad_pos at the worst functional corner.
double die_pos_overlay(const PadBlockGrid& grid, const OverlayParams& p, double cx_um,
                       double cy_um);

/// W2W overlay yield: mean die POS over every wafer-map site, with the
/// misalignment field evaluated in wafer coordinates.
double yield_ovl_w2w(const WaferSpec& wafer, const DieSpec& die, const PadBlockGrid& grid,
                     const OverlayParams& p);

/// D2W overlay yield: single-die POS in die-local coordinates. Placement on
/// the target wafer does not enter; every die sees the same distortion field.
double yield_ovl_d2w(const PadBlockGrid& grid, const OverlayParams& p);

} // namespace hby
