#include "hbyield/config.hpp"

#include <cstddef>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include "hbyield/errors.hpp"

namespace hby {

BondMode parse_mode(const std::string& s) {
    if (s == "w2w") return BondMode::w2w;
    if (s == "d2w") return BondMode::d2w;
    throw ConfigError("mode must be w2w or d2w, got '" + s + "'");
}

std::string to_string(BondMode m) { return m == BondMode::w2w ? "w2w" : "d2w"; }

namespace {

PatternKind parse_pattern(const std::string& s) {
    if (s == "full") return PatternKind::full;
    if (s == "sparse") return PatternKind::sparse;
    if (s == "peripheral") return PatternKind::peripheral;
    if (s == "centralized") return PatternKind::centralized;
    throw ConfigError("pattern must be full, sparse, peripheral or centralized, got '" + s + "'");
}

std::string to_string(PatternKind k) {
    switch (k) {
        case PatternKind::full: return "full";
        case PatternKind::sparse: return "sparse";
        case PatternKind::peripheral: return "peripheral";
        default: return "centralized";
    }
}

enum class Kind { f64, u64, boolean, mode, pattern };

struct KeySpec {
    const char* section;
    const char* key;
    Kind kind;
    std::size_t offset;
};

#define F64(sec, name) {sec, #name, Kind::f64, offsetof(ProcessConfig, name)}
#define U64(sec, name) {sec, #name, Kind::u64, offsetof(ProcessConfig, name)}

const std::vector<KeySpec>& registry() {
    static const std::vector<KeySpec> keys = {
        {"design", "mode", Kind::mode, offsetof(ProcessConfig, mode)},
        F64("design", pitch_um),
        F64("design", top_pad_um),
        F64("design", bottom_pad_um),
        F64("design", die_width_um),
        F64("design", die_height_um),
        F64("design", wafer_radius_um),
        F64("design", edge_exclusion_um),
        F64("design", resolution_w2w_um),
        F64("design", resolution_d2w_um),
        {"design", "pattern", Kind::pattern, offsetof(ProcessConfig, pattern)},
        F64("design", critical_fraction),
        F64("design", redundant_fraction),
        F64("design", dummy_fraction),
        U64("design", layout_seed),
        F64("process", random_misalign_sigma_nm),
        F64("process", translation_x_mean_nm),
        F64("process", translation_y_mean_nm),
        F64("process", translation_sigma_nm),
        F64("process", rotation_mean_urad),
        F64("process", rotation_sigma_urad),
        F64("process", magnification_mean_ppm),
        F64("process", magnification_sigma_ppm),
        F64("process", warpage_um),
        F64("process", particle_density_per_cm2),
        F64("process", min_particle_thickness_um),
        F64("process", thickness_exponent),
        F64("process", recess_top_mean_nm),
        F64("process", recess_top_sigma_nm),
        F64("process", recess_bot_mean_nm),
        F64("process", recess_bot_sigma_nm),
        F64("process", roughness_sigma_nm),
        F64("process", asperity_radius_um),
        F64("process", cu_expansion_nm),
        F64("model", k_contact_area),
        F64("model", k_critical_distance),
        F64("model", k_magnification_per_m),
        F64("model", bond_energy_jm2),
        F64("model", dielectric_modulus_gpa),
        F64("model", dielectric_poisson),
        F64("model", dielectric_thickness_um),
        F64("model", k_peel_n_m3),
        F64("model", peel_onset_nm),
        F64("model", k_r),
        F64("model", k_r0),
        F64("model", k_l),
        F64("model", k_n),
        F64("model", k_s),
        U64("model", length_points),
        U64("model", orientation_points),
        U64("model", radius_points),
        {"model", "main_void_in_w2w", Kind::boolean, offsetof(ProcessConfig, main_void_in_w2w)},
        F64("model", tail_shrink_ratio),
        U64("sim", n_wafers),
        U64("sim", n_dies),
        U64("sim", seed),
        F64("sim", cv_target),
        U64("sim", max_samples),
    };
    return keys;
}

#undef F64
#undef U64

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_f64(const std::string& s, const std::string& key) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(key + ": expected a number, got '" + s + "'");
}

std::uint64_t parse_u64(const std::string& s, const std::string& key) {
    try {
        std::size_t used = 0;
        if (!s.empty() && s[0] != '-') {
            std::uint64_t v = std::stoull(s, &used);
            if (used == s.size()) return v;
        }
    } catch (const std::exception&) {
    }
    throw ConfigError(key + ": expected a non-negative integer, got '" + s + "'");
}

bool parse_bool(const std::string& s, const std::string& key) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw ConfigError(key + ": expected true or false, got '" + s + "'");
}

void assign(ProcessConfig& c, const KeySpec& spec, const std::string& value) {
    char* base = reinterpret_cast<char*>(&c);
    const std::string full = std::string(spec.section) + "." + spec.key;
    switch (spec.kind) {
        case Kind::f64: *reinterpret_cast<double*>(base + spec.offset) = parse_f64(value, full); break;
        case Kind::u64:
            *reinterpret_cast<std::uint64_t*>(base + spec.offset) = parse_u64(value, full);
            break;
        case Kind::boolean:
            *reinterpret_cast<bool*>(base + spec.offset) = parse_bool(value, full);
            break;
        case Kind::mode: *reinterpret_cast<BondMode*>(base + spec.offset) = parse_mode(value); break;
        case Kind::pattern:
            *reinterpret_cast<PatternKind*>(base + spec.offset) = parse_pattern(value);
            break;
    }
}

std::string format(const ProcessConfig& c, const KeySpec& spec) {
    const char* base = reinterpret_cast<const char*>(&c);
    switch (spec.kind) {
        case Kind::f64: {
            char buf[40];
            std::snprintf(buf, sizeof(buf), "%.17g", *reinterpret_cast<const double*>(base + spec.offset));
            return buf;
        }
        case Kind::u64:
            return std::to_string(*reinterpret_cast<const std::uint64_t*>(base + spec.offset));
        case Kind::boolean:
            return *reinterpret_cast<const bool*>(base + spec.offset) ? "true" : "false";
        case Kind::mode: return to_string(*reinterpret_cast<const BondMode*>(base + spec.offset));
        default: return to_string(*reinterpret_cast<const PatternKind*>(base + spec.offset));
    }
}

const KeySpec* find_key(const std::string& section, const std::string& key) {
    for (const KeySpec& spec : registry())
        if (section == spec.section && key == spec.key) return &spec;
    return nullptr;
}

bool known_section(const std::string& section) {
    for (const KeySpec& spec : registry())
        if (section == spec.section) return true;
    return false;
}

void check(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

} // namespace

ProcessConfig parse_config(std::istream& in, const std::string& origin) {
    ProcessConfig c;
    std::string section;
    std::string line;
    int lineno = 0;
    std::set<std::string> assigned;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t cut = line.find_first_of("#;");
        if (cut != std::string::npos) line.erase(cut);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = origin + ":" + std::to_string(lineno);
        if (line.front() == '[') {
            check(line.back() == ']', where + ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            check(known_section(section), where + ": unknown section [" + section + "]");
            continue;
        }
        std::size_t eq = line.find('=');
        check(eq != std::string::npos, where + ": expected key = value");
        check(!section.empty(), where + ": key outside any section");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        const KeySpec* spec = find_key(section, key);
        check(spec != nullptr, where + ": unknown key '" + section + "." + key + "'");
        const std::string full = section + "." + key;
        check(assigned.insert(full).second, where + ": duplicate key '" + full + "'");
        assign(c, *spec, value);
    }
    const bool has_mag = assigned.count("process.magnification_mean_ppm") > 0;
    const bool has_warp = assigned.count("process.warpage_um") > 0;
    check(!(has_mag && has_warp),
          origin + ": supply either process.magnification_mean_ppm or process.warpage_um, not both");
    c.mag_source = has_warp ? MagSource::warpage : MagSource::direct;
    validate(c);
    return c;
}

ProcessConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config file '" + path + "'");
    return parse_config(f, path);
}

void apply_override(ProcessConfig& c, const std::string& spec_str) {
    std::size_t eq = spec_str.find('=');
    check(eq != std::string::npos, "override '" + spec_str + "': expected section.key=value");
    std::string key = trim(spec_str.substr(0, eq));
    std::string value = trim(spec_str.substr(eq + 1));
    std::size_t dot = key.find('.');
    check(dot != std::string::npos, "override '" + spec_str + "': expected section.key=value");
    std::string section = key.substr(0, dot);
    std::string name = key.substr(dot + 1);
    const KeySpec* spec = find_key(section, name);
    check(spec != nullptr, "override: unknown key '" + key + "'");
    assign(c, *spec, value);
    if (key == "process.warpage_um") c.mag_source = MagSource::warpage;
    if (key == "process.magnification_mean_ppm") c.mag_source = MagSource::direct;
}

std::string dump_config(const ProcessConfig& c) {
    std::ostringstream out;
    std::string section;
    for (const KeySpec& spec : registry()) {
        if (c.mag_source == MagSource::direct && std::string(spec.key) == "warpage_um") continue;
        if (c.mag_source == MagSource::warpage &&
            std::string(spec.key) == "magnification_mean_ppm")
            continue;
        if (section != spec.section) {
            if (!section.empty()) out << "\n";
            section = spec.section;
            out << "[" << section << "]\n";
        }
        out << spec.key << " = " << format(c, spec) << "\n";
    }
    return out.str();
}

void validate(const ProcessConfig& c) {
    check(c.pitch_um > 0, "design.pitch_um must be positive");
    check(c.top_pad_um > 0, "design.top_pad_um must be positive");
    check(c.top_pad_um <= c.bottom_pad_um,
          "design.top_pad_um must not exceed design.bottom_pad_um");
    check(c.bottom_pad_um < c.pitch_um, "design.bottom_pad_um must be below design.pitch_um");
    check(c.die_width_um > 0 && c.die_height_um > 0, "design die dimensions must be positive");
    check(c.wafer_radius_um > 0, "design.wafer_radius_um must be positive");
    check(c.edge_exclusion_um >= 0 && c.edge_exclusion_um < c.wafer_radius_um,
          "design.edge_exclusion_um must lie in [0, wafer radius)");
    for (double r : {c.resolution_w2w_um, c.resolution_d2w_um}) {
        check(r > 0, "design resolution must be positive");
        check(r <= c.die_width_um && r <= c.die_height_um,
              "design resolution must not exceed the die dimensions");
    }
    check(c.critical_fraction >= 0 && c.redundant_fraction >= 0 && c.dummy_fraction >= 0,
          "design fractions must be non-negative");
    check(c.critical_fraction + c.redundant_fraction + c.dummy_fraction <= 1.0 + 1e-12,
          "design fractions must sum to at most 1");
    for (double s : {c.random_misalign_sigma_nm, c.translation_sigma_nm, c.rotation_sigma_urad,
                     c.magnification_sigma_ppm, c.recess_top_sigma_nm, c.recess_bot_sigma_nm,
                     c.roughness_sigma_nm})
        check(s >= 0, "process sigmas must be non-negative");
    check(c.warpage_um >= 0, "process.warpage_um must be non-negative");
    check(c.particle_density_per_cm2 >= 0,
          "process.particle_density_per_cm2 must be non-negative");
    check(c.min_particle_thickness_um > 0, "process.min_particle_thickness_um must be positive");
    check(c.thickness_exponent > 1, "process.thickness_exponent must exceed 1");
    check(c.asperity_radius_um > 0, "process.asperity_radius_um must be positive");
    check(c.cu_expansion_nm >= 0, "process.cu_expansion_nm must be non-negative");
    check(c.k_contact_area > 0 && c.k_contact_area <= 1,
          "model.k_contact_area must lie in (0, 1]");
    check(c.k_critical_distance >= 0 && c.k_critical_distance <= 1,
          "model.k_critical_distance must lie in [0, 1]");
    check(c.k_magnification_per_m >= 0, "model.k_magnification_per_m must be non-negative");
    check(c.bond_energy_jm2 > 0, "model.bond_energy_jm2 must be positive");
    check(c.dielectric_modulus_gpa > 0, "model.dielectric_modulus_gpa must be positive");
    check(c.dielectric_poisson >= 0 && c.dielectric_poisson < 0.5,
          "model.dielectric_poisson must lie in [0, 0.5)");
    check(c.dielectric_thickness_um > 0, "model.dielectric_thickness_um must be positive");
    check(c.k_peel_n_m3 > 0, "model.k_peel_n_m3 must be positive");
    for (double k : {c.k_r, c.k_r0, c.k_l, c.k_n, c.k_s})
        check(k >= 0, "model void-fit coefficients must be non-negative");
    check(c.length_points >= 8, "model.length_points must be at least 8");
    check(c.orientation_points >= 4, "model.orientation_points must be at least 4");
    check(c.radius_points >= 8, "model.radius_points must be at least 8");
    check(c.tail_shrink_ratio > 0 && c.tail_shrink_ratio <= 1,
          "model.tail_shrink_ratio must lie in (0, 1]");
    check(c.n_wafers >= 1, "sim.n_wafers must be at least 1");
    check(c.n_dies >= 1, "sim.n_dies must be at least 1");
    check(c.cv_target > 0, "sim.cv_target must be positive");
    check(c.max_samples >= 1, "sim.max_samples must be at least 1");
}

double resolution_um(const ProcessConfig& c) {
    return c.mode == BondMode::w2w ? c.resolution_w2w_um : c.resolution_d2w_um;
}

double effective_magnification_ppm(const ProcessConfig& c) {
    if (c.mag_source == MagSource::warpage)
        return magnification_from_warpage(c.k_magnification_per_m, c.warpage_um);
    return c.magnification_mean_ppm;
}

OverlayParams overlay_params(const ProcessConfig& c) {
    OverlayParams p;
    p.sigma1_um = c.random_misalign_sigma_nm * 1e-3;
    p.tx_um = c.translation_x_mean_nm * 1e-3;
    p.ty_um = c.translation_y_mean_nm * 1e-3;
    p.alpha_urad = c.rotation_mean_urad;
    p.magnification_ppm = effective_magnification_ppm(c);
    p.pitch_um = c.pitch_um;
    p.d1_um = c.top_pad_um;
    p.d2_um = c.bottom_pad_um;
    p.k_ca = c.k_contact_area;
    p.k_cd = c.k_critical_distance;
    return p;
}

RecessParams recess_params(const ProcessConfig& c) {
    RecessParams p;
    p.mu_top_nm = -c.recess_top_mean_nm;
    p.sigma_top_nm = c.recess_top_sigma_nm;
    p.mu_bot_nm = -c.recess_bot_mean_nm;
    p.sigma_bot_nm = c.recess_bot_sigma_nm;
    p.cu_expansion_nm = c.cu_expansion_nm;
    p.sigma_z_nm = c.roughness_sigma_nm;
    p.r_z_um = c.asperity_radius_um;
    p.e_d_gpa = c.dielectric_modulus_gpa;
    p.nu_d = c.dielectric_poisson;
    p.w_jm2 = c.bond_energy_jm2;
    p.t_d_um = c.dielectric_thickness_um;
    p.k_peel_n_m3 = c.k_peel_n_m3;
    p.h0_nm = c.peel_onset_nm;
    return p;
}

DefectParams defect_params(const ProcessConfig& c) {
    DefectParams p;
    p.d_t_per_cm2 = c.particle_density_per_cm2;
    p.t0_um = c.min_particle_thickness_um;
    p.z = c.thickness_exponent;
    p.k_r = c.k_r;
    p.k_r0 = c.k_r0;
    p.k_l = c.k_l;
    p.k_n = c.k_n;
    p.k_s = c.k_s;
    p.main_void_in_w2w = c.main_void_in_w2w;
    p.tail_shrink_ratio = c.tail_shrink_ratio;
    return p;
}

DieSpec die_spec(const ProcessConfig& c) { return DieSpec{c.die_width_um, c.die_height_um}; }

WaferSpec wafer_spec(const ProcessConfig& c) {
    return WaferSpec{c.wafer_radius_um, c.edge_exclusion_um};
}

Layout make_layout(const ProcessConfig& c) {
    KindFractions f;
    f.critical = c.critical_fraction;
    f.redundant = c.redundant_fraction;
    f.dummy = c.dummy_fraction;
    double res = resolution_um(c);
    return build_layout(c.pattern, die_spec(c), res, res, f, c.layout_seed);
}

} // namespace hby
