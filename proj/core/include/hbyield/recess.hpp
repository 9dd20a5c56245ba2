#pragma once

#include <utility>
#include <vector>

#include "layout.hpp"

namespace hby {

/// Combined pad-height survival model inputs. Heights in nm with the
/// dielectric surface at zero, so a recessed pad has a negative mean.
struct RecessParams {
    double mu_top_nm = -10.0; // top pad height mean (10 nm recess)
    double sigma_top_nm = 1.0;
    double mu_bot_nm = -10.0; // bottom pad height mean
    double sigma_bot_nm = 1.0;

    // budget the annealing expansion can close: lower bound zeta- = -expansion
    double cu_expansion_nm = 40.0;

    // asperity roughness and dielectric bonding inputs
    double sigma_z_nm = 1.0; // asperity height std
    double r_z_um = 1.0;     // asperity cap radius
    double e_d_gpa = 73.0;   // dielectric Young's modulus
    double nu_d = 0.17;      // dielectric Poisson ratio (modulus normalization)
    double w_jm2 = 1.2;      // bonding energy under full contact
    double t_d_um = 1.5;     // dielectric thickness

    // peeling-stress fit sigma_peel = k_peel * D_Cu * (h - h0)
    double k_peel_n_m3 = 6.55e15;
    double h0_nm = 75.0;

    // optional override of the bonding-fraction curve as sorted
    // (theta_ad, fraction) pairs, linearly interpolated and clamped at the
    // ends; empty selects the built-in curve 1/(1 + (theta_ad/3)^2)
    std::vector<std::pair<double, double>> bond_curve;
};

/// Dimensionless adhesion parameter of the two-rough-surfaces contact:
/// theta_ad = E* sigma_eff^(3/2) / (w sqrt(R_z)) with the pairwise
/// normalizations E* = E_d / (2(1-nu^2)) and sigma_eff = sqrt(2) sigma_z.
double adhesion_parameter(const RecessParams& p);

/// Normalized effective dielectric contact area A_b* in (0, 1], a monotone
/// decreasing map of the adhesion parameter. Perfectly smooth surfaces
/// (sigma_z -> 0) bond fully.
double effective_contact_area(const RecessParams& p);

/// Max peeling stress the dielectric interface tolerates:
/// sigma_tol = A_b* sqrt(2 E_d w / t_d).
double tolerable_peeling_stress_pa(const RecessParams& p);
double tolerable_peeling_stress_mpa(const RecessParams& p);

struct HeightBounds {
    double zeta_minus_nm = 0.0;
    double zeta_plus_nm = 0.0;
    double h_peel_nm = 0.0; // delamination onset height before the protrusion clamp
};

/// Survival window for the combined pad height h: zeta- = -cu_expansion
/// (deeper recesses stay unfilled), zeta+ = min(0, h_peel) where
/// h_peel = h0 + sigma_tol / (k_peel * D_Cu) (protrusion delaminates).
/// An inverted window (zeta- >= zeta+) is a zero-survival regime, not an
/// error.
HeightBounds height_bounds(const RecessParams& p, double d_cu);

/// Per-pad failure probability 1 - P(zeta- < h < zeta+) for
/// h ~ N(mu_top+mu_bot, sigma_top^2+sigma_bot^2), computed as the sum of the
/// two tail masses so it keeps relative precision when failures are 10+
/// sigma out.
double pad_fail_recess(const RecessParams& p, double d_cu);

/// P(zeta- < h < zeta+); the complement of pad_fail_recess.
double pad_pos_recess(const RecessParams& p, double d_cu);

/// Die yield under the recess channel, evaluated in log space. Critical
/// cells require every pad alive. A redundancy group survives while at
/// least one member block keeps all its pads (dedicated), or while at most
/// one main block fails and the spare block is intact to replace it
/// (shared). The same formula serves W2W and D2W. pad_fail is the per-pad
/// failure probability (see pad_fail_recess).
double yield_recess(const Layout& layout, double pitch_um, double pad_fail);

/// Convenience composition: failure probability from params, then the yield.
double yield_recess(const Layout& layout, const RecessParams& p, double d_cu, double pitch_um);

} // namespace hby
