#pragma once

#include <functional>
#include <map>
#include <string>

#include "hbyield/defect.hpp"

namespace hby {

/// Writes a critical-area table as CSV.  W2W tables carry one row per
/// (length, orientation) pair with columns l_um,theta_rad,area_um2; D2W
/// tables carry r_um,area_um2.  Values round-trip bit-exactly.
void save_lut_csv(const CriticalAreaLUT& lut, const std::string& path);

/// Reads a table written by save_lut_csv.  Throws ConfigError on malformed
/// or truncated input.
CriticalAreaLUT load_lut_csv(const std::string& path);

/// Fingerprint-keyed store of critical-area tables with build-on-miss.
/// Tables already fetched this process are served from memory; otherwise
/// each entry lives in <dir>/<fingerprint-hex>.csv.  A hit returns the
/// stored table, which is bit-identical to a rebuild; a corrupted file is
/// rebuilt and rewritten, with a note appended to *warning.
class LutCache {
public:
    explicit LutCache(std::string dir);

    CriticalAreaLUT get(std::uint64_t fingerprint,
                        const std::function<CriticalAreaLUT()>& build,
                        std::string* warning = nullptr);

    std::string entry_path(std::uint64_t fingerprint) const;
    bool contains(std::uint64_t fingerprint) const;

private:
    std::string dir_;
    std::map<std::uint64_t, CriticalAreaLUT> mem_;
};

} // namespace hby
