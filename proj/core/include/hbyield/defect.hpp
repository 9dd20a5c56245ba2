#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hbyield/layout.hpp"

namespace hby {

/// Particle population and void-geometry fitting constants. Thicknesses and
/// lengths in um; d_t is the total particle density across all thicknesses.
struct DefectParams {
    double d_t_per_cm2 = 0.1;
    double t0_um = 0.1;  // minimum particle thickness
    double z = 3.0;      // thickness power-law shape, > 1
    double k_r = 1.8e-4; // main void vs location, um^(-1/2)
    double k_r0 = 230.0; // main void intercept, um^(1/2)
    double k_l = 6.2e-2; // tail length vs location, um^(-1/2)
    double k_n = 9e-5;   // tail void count vs location, um^(-3/2)
    double k_s = 2.7;    // tail void total area vs location, um^(1/2)

    /// Lets the straight-line tail approximation carry the main void too:
    /// the structuring element gains a disk at the segment origin of radius
    /// (k_r/k_l) l + k_r0 sqrt(t0), the main void of the thinnest particle
    /// whose tail reaches l. Off reproduces the plain line geometry.
    bool main_void_in_w2w = false;

    /// Tail voids shrink linearly toward the tail end; radius of the last
    /// one over the first. Used by the defect simulator, not the model.
    double tail_shrink_ratio = 0.25;

    double d_t_per_um2() const { return d_t_per_cm2 * 1e-8; }
};

/// ConfigError unless z > 1, t0 > 0, d_t >= 0, all k's >= 0 and the shrink
/// ratio lies in (0, 1].
void validate(const DefectParams& p);

/// Particle thickness density at t, per um^2 of plane area per um of
/// thickness; zero at or below t0.
double thickness_pdf(double t_um, const DefectParams& p);

/// Inverse-CDF draw from the thickness distribution; u01 in [0, 1).
double sample_thickness(double u01, const DefectParams& p);

struct VoidGeometry {
    double r_mv_um = 0.0;   // main void radius
    double l_um = 0.0;      // tail length
    double n_tail = 0.0;    // tail void count (fractional fit value)
    double s_tail_um2 = 0.0; // total tail void area
};

/// Linear-in-location, sqrt-thickness void fitting models for a particle of
/// thickness t at distance location_um from the wafer center.
VoidGeometry void_geometry(double location_um, double t_um, const DefectParams& p);

/// Tail-length density knee k_l R sqrt(t0): tails of on-wafer particles at
/// minimum thickness cannot exceed it.
double tail_breakpoint_um(double wafer_r_um, const DefectParams& p);

/// Density of void tail length per um^2 of wafer per um of length,
/// marginalized over uniform particle location and the thickness law.
/// Integrates to d_t.
double tail_length_pdf(double l_um, double wafer_r_um, const DefectParams& p);

/// Radius of the disk with the die's area: the location-model radius that
/// preserves the expected particle count per die.
double die_effective_radius_um(const DieSpec& die);

/// Smallest possible main void, k_r0 sqrt(t0); the density is zero there.
double main_void_min_um(const DefectParams& p);

/// Main-void density knee (k_r R + k_r0) sqrt(t0).
double main_void_breakpoint_um(double die_eff_r_um, const DefectParams& p);

/// Density of main void radius per um^2 per um, location marginalized over
/// the effective-radius disk. Integrates to d_t.
double main_void_pdf(double r_um, double die_eff_r_um, const DefectParams& p);

enum class LutMode : std::uint8_t { w2w, d2w };

/// Critical areas of one layout against a family of defect shapes: segments
/// over (l, theta) for W2W tails, disks over r for D2W main voids. The
/// fingerprint ties the table to the exact layout, axes, and shape config
/// that produced it.
struct CriticalAreaLUT {
    LutMode mode = LutMode::w2w;
    std::vector<double> l_um;       // W2W length axis
    std::vector<double> theta_rad;  // W2W orientation axis
    std::vector<double> r_um;       // D2W radius axis
    std::vector<double> area_um2;   // row-major [l][theta], or [r]
    std::uint64_t fingerprint = 0;

    double at(std::size_t i, std::size_t j) const { return area_um2[i * theta_rad.size() + j]; }

    bool operator==(const CriticalAreaLUT&) const = default;
};

/// Default integration axes. The length axis spends a quarter of its points
/// linearly up to the knee where the density peaks, then stretches
/// log-spaced to 8x the knee (under 0.05% of the full-die failure mass lies
/// beyond); a leading zero row anchors the short-defect mass. The radius
/// axis does the same with a linear sliver across its narrow first branch
/// and a 16x knee reach.
std::vector<double> default_l_grid(double wafer_r_um, const DefectParams& p, int n = 64);
std::vector<double> default_theta_grid(int n = 16);
std::vector<double> default_r_grid(const DieSpec& die, const DefectParams& p, int n = 64);

/// Content hash of everything the table depends on: mode, layout structure,
/// raster resolution, axes, and (W2W) the main-void flag with its shape
/// constants. Density and shape-law exponents do not enter; they only weight
/// the integration.
std::uint64_t lut_fingerprint(const Layout& layout, LutMode mode,
                              const std::vector<double>& axis,
                              const std::vector<double>& theta_rad, const DefectParams& p);

CriticalAreaLUT build_lut_w2w(const Layout& layout, const std::vector<double>& l_grid,
                              const std::vector<double>& theta_grid, const DefectParams& p);
CriticalAreaLUT build_lut_d2w(const Layout& layout, const std::vector<double>& r_grid);

struct LambdaResult {
    double lambda = 0.0;         // expected fatal defects per die
    double tail_estimate = 0.0;  // estimated mass beyond the grid end
    std::string warning;         // set when tail_estimate > 1% of lambda
};

/// Expected fatal tail defects: trapezoid over the length axis of
/// A(l, theta) f_l(l), averaged over uniformly weighted orientations.
LambdaResult lambda_w2w(const CriticalAreaLUT& lut, double wafer_r_um, const DefectParams& p);

/// Expected fatal main-void defects: trapezoid over the radius axis.
LambdaResult lambda_d2w(const CriticalAreaLUT& lut, const DieSpec& die, const DefectParams& p);

double yield_df_w2w(const CriticalAreaLUT& lut, double wafer_r_um, const DefectParams& p);
double yield_df_d2w(const CriticalAreaLUT& lut, const DieSpec& die, const DefectParams& p);

} // namespace hby
