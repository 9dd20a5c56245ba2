#include "hbyield/lut_cache.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hbyield/errors.hpp"

namespace hby {

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_double(const std::string& s) {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw ConfigError("bad numeric field '" + s + "' in table file");
    return v;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    return out;
}

} // namespace

void save_lut_csv(const CriticalAreaLUT& lut, const std::string& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw ConfigError("cannot write table file '" + path + "'");
    char fp[20];
    std::snprintf(fp, sizeof(fp), "%016llx", static_cast<unsigned long long>(lut.fingerprint));
    f << "# critical-area table v1\n";
    f << "# fingerprint " << fp << "\n";
    if (lut.mode == LutMode::w2w) {
        f << "# mode w2w " << lut.l_um.size() << " " << lut.theta_rad.size() << "\n";
        f << "l_um,theta_rad,area_um2\n";
        for (std::size_t i = 0; i < lut.l_um.size(); ++i)
            for (std::size_t j = 0; j < lut.theta_rad.size(); ++j)
                f << fmt_double(lut.l_um[i]) << ',' << fmt_double(lut.theta_rad[j]) << ','
                  << fmt_double(lut.at(i, j)) << '\n';
    } else {
        f << "# mode d2w " << lut.r_um.size() << "\n";
        f << "r_um,area_um2\n";
        for (std::size_t i = 0; i < lut.r_um.size(); ++i)
            f << fmt_double(lut.r_um[i]) << ',' << fmt_double(lut.area_um2[i]) << '\n';
    }
    if (!f) throw ConfigError("failed writing table file '" + path + "'");
}

CriticalAreaLUT load_lut_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read table file '" + path + "'");
    std::string line;
    if (!std::getline(f, line) || line != "# critical-area table v1")
        throw ConfigError("missing table header in '" + path + "'");
    if (!std::getline(f, line) || line.rfind("# fingerprint ", 0) != 0)
        throw ConfigError("missing fingerprint line in '" + path + "'");
    CriticalAreaLUT lut;
    lut.fingerprint = std::stoull(line.substr(14), nullptr, 16);
    if (!std::getline(f, line) || line.rfind("# mode ", 0) != 0)
        throw ConfigError("missing mode line in '" + path + "'");
    std::stringstream ms(line.substr(7));
    std::string mode;
    ms >> mode;
    std::string header;
    if (!std::getline(f, header)) throw ConfigError("missing column header in '" + path + "'");

    if (mode == "w2w") {
        std::size_t nl = 0, nt = 0;
        ms >> nl >> nt;
        if (nl == 0 || nt == 0) throw ConfigError("bad axis sizes in '" + path + "'");
        if (header != "l_um,theta_rad,area_um2")
            throw ConfigError("unexpected columns in '" + path + "'");
        lut.mode = LutMode::w2w;
        lut.area_um2.reserve(nl * nt);
        for (std::size_t i = 0; i < nl; ++i)
            for (std::size_t j = 0; j < nt; ++j) {
                if (!std::getline(f, line)) throw ConfigError("truncated table in '" + path + "'");
                std::vector<std::string> fields = split_csv(line);
                if (fields.size() != 3) throw ConfigError("bad row in '" + path + "'");
                double l = parse_double(fields[0]);
                double th = parse_double(fields[1]);
                if (j == 0) lut.l_um.push_back(l);
                if (i == 0) lut.theta_rad.push_back(th);
                if (l != lut.l_um[i] || th != lut.theta_rad[j])
                    throw ConfigError("inconsistent axes in '" + path + "'");
                lut.area_um2.push_back(parse_double(fields[2]));
            }
    } else if (mode == "d2w") {
        std::size_t nr = 0;
        ms >> nr;
        if (nr == 0) throw ConfigError("bad axis size in '" + path + "'");
        if (header != "r_um,area_um2") throw ConfigError("unexpected columns in '" + path + "'");
        lut.mode = LutMode::d2w;
        for (std::size_t i = 0; i < nr; ++i) {
            if (!std::getline(f, line)) throw ConfigError("truncated table in '" + path + "'");
            std::vector<std::string> fields = split_csv(line);
            if (fields.size() != 2) throw ConfigError("bad row in '" + path + "'");
            lut.r_um.push_back(parse_double(fields[0]));
            lut.area_um2.push_back(parse_double(fields[1]));
        }
    } else {
        throw ConfigError("unknown table mode '" + mode + "' in '" + path + "'");
    }
    if (std::getline(f, line) && !line.empty())
        throw ConfigError("trailing data in '" + path + "'");
    return lut;
}

LutCache::LutCache(std::string dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::string LutCache::entry_path(std::uint64_t fingerprint) const {
    char name[24];
    std::snprintf(name, sizeof(name), "%016llx.csv", static_cast<unsigned long long>(fingerprint));
    return (std::filesystem::path(dir_) / name).string();
}

bool LutCache::contains(std::uint64_t fingerprint) const {
    return std::filesystem::exists(entry_path(fingerprint));
}

CriticalAreaLUT LutCache::get(std::uint64_t fingerprint,
                              const std::function<CriticalAreaLUT()>& build,
                              std::string* warning) {
    auto hit = mem_.find(fingerprint);
    if (hit != mem_.end()) return hit->second;
    const std::string path = entry_path(fingerprint);
    if (std::filesystem::exists(path)) {
        try {
            CriticalAreaLUT lut = load_lut_csv(path);
            if (lut.fingerprint != fingerprint)
                throw ConfigError("fingerprint mismatch in '" + path + "'");
            mem_.emplace(fingerprint, lut);
            return lut;
        } catch (const std::exception& e) {
            if (warning) {
                if (!warning->empty()) *warning += "; ";
                *warning += std::string("rebuilding corrupted cache entry: ") + e.what();
            }
        }
    }
    CriticalAreaLUT lut = build();
    if (lut.fingerprint != fingerprint)
        throw ConfigError("built table fingerprint does not match the requested key");
    save_lut_csv(lut, path);
    mem_.emplace(fingerprint, lut);
    return lut;
}

} // namespace hby
