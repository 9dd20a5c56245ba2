#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "hbyield/defect.hpp"
#include "hbyield/layout.hpp"
#include "hbyield/overlay.hpp"
#include "hbyield/recess.hpp"

namespace hby {

enum class BondMode : std::uint8_t { w2w, d2w };

BondMode parse_mode(const std::string& s);
std::string to_string(BondMode m);

/// How the magnification distortion is specified: directly in ppm, or as a
/// bonded-wafer warpage in um scaled by k_magnification_per_m.  Exactly one
/// of the two keys may appear in a config file.
enum class MagSource : std::uint8_t { direct, warpage };

/// Full parameter set of a run, grouped into the sections of the config
/// file format: [design] geometry and layout, [process] distribution
/// means/sigmas, [model] fitted coefficients and integration knobs, [sim]
/// Monte Carlo controls.  Defaults are the baseline process of the study.
struct ProcessConfig {
    // [design]
    BondMode mode = BondMode::w2w;
    double pitch_um = 1.0;
    double top_pad_um = 0.3;
    double bottom_pad_um = 0.5;
    double die_width_um = 10000.0;
    double die_height_um = 10000.0;
    double wafer_radius_um = 150000.0;
    double edge_exclusion_um = 0.0;
    double resolution_w2w_um = 400.0;
    double resolution_d2w_um = 100.0;
    PatternKind pattern = PatternKind::full;
    double critical_fraction = 1.0;
    double redundant_fraction = 0.0;
    double dummy_fraction = 0.0;
    std::uint64_t layout_seed = 1;

    // [process]
    double random_misalign_sigma_nm = 20.0;
    double translation_x_mean_nm = 0.0;
    double translation_y_mean_nm = 0.0;
    double translation_sigma_nm = 20.0;
    double rotation_mean_urad = 0.05;
    double rotation_sigma_urad = 0.01;
    MagSource mag_source = MagSource::direct;
    double magnification_mean_ppm = 0.05;
    double magnification_sigma_ppm = 0.01;
    double warpage_um = 0.0;
    double particle_density_per_cm2 = 0.1;
    double min_particle_thickness_um = 0.1;
    double thickness_exponent = 3.0;
    double recess_top_mean_nm = 10.0;
    double recess_top_sigma_nm = 1.0;
    double recess_bot_mean_nm = 10.0;
    double recess_bot_sigma_nm = 1.0;
    double roughness_sigma_nm = 1.0;
    double asperity_radius_um = 1.0;
    double cu_expansion_nm = 40.0;

    // [model]
    double k_contact_area = 0.5;
    double k_critical_distance = 0.5;
    double k_magnification_per_m = 0.09;
    double bond_energy_jm2 = 1.2;
    double dielectric_modulus_gpa = 73.0;
    double dielectric_poisson = 0.17;
    double dielectric_thickness_um = 1.5;
    double k_peel_n_m3 = 6.55e15;
    double peel_onset_nm = 75.0;
    double k_r = 1.8e-4;
    double k_r0 = 230.0;
    double k_l = 6.2e-2;
    double k_n = 9e-5;
    double k_s = 2.7;
    std::uint64_t length_points = 64;
    std::uint64_t orientation_points = 16;
    std::uint64_t radius_points = 64;
    bool main_void_in_w2w = false;
    double tail_shrink_ratio = 0.25;

    // [sim]
    std::uint64_t n_wafers = 10;
    std::uint64_t n_dies = 10000;
    std::uint64_t seed = 1;
    double cv_target = 0.01;
    std::uint64_t max_samples = 10000;

    bool operator==(const ProcessConfig&) const = default;
};

/// Parses "[section]\nkey = value" text.  '#' and ';' start comments.
/// Unknown sections or keys, malformed values, double assignment of a key,
/// or supplying both magnification_mean_ppm and warpage_um raise
/// ConfigError.  Values are range-checked via validate().
ProcessConfig parse_config(std::istream& in, const std::string& origin);
ProcessConfig load_config(const std::string& path);

/// Applies one "section.key=value" override on top of a parsed config.
/// Overriding magnification_mean_ppm or warpage_um switches the
/// magnification source to the overridden key (last one wins).
void apply_override(ProcessConfig& c, const std::string& spec);

/// Serializes so that parse(dump(c)) == c.  Only the active magnification
/// key is written.
std::string dump_config(const ProcessConfig& c);

/// Range checks every field; throws ConfigError with the offending key.
void validate(const ProcessConfig& c);

// Derived views for the component models.
double resolution_um(const ProcessConfig& c);
double effective_magnification_ppm(const ProcessConfig& c);
OverlayParams overlay_params(const ProcessConfig& c);
RecessParams recess_params(const ProcessConfig& c);
DefectParams defect_params(const ProcessConfig& c);
DieSpec die_spec(const ProcessConfig& c);
WaferSpec wafer_spec(const ProcessConfig& c);

/// Builds the pad-block layout described by the [design] section.
Layout make_layout(const ProcessConfig& c);

} // namespace hby
