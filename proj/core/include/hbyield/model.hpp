#pragma once

#include <string>

#include "hbyield/config.hpp"
#include "hbyield/layout.hpp"
#include "hbyield/lut_cache.hpp"
#include "hbyield/report.hpp"

namespace hby {

/// Evaluates the three analytical yield components for the configured mode
/// and multiplies them.  A cache, when given, supplies the critical-area
/// table on fingerprint hit and stores it on miss.  Grid-truncation or
/// cache notes are appended to *warning.
YieldReport run_model(const ProcessConfig& c, const Layout& layout, LutCache* cache = nullptr,
                      std::string* warning = nullptr);

/// The defect component alone (used by sweeps that leave the other channels
/// at baseline).
double model_yield_df(const ProcessConfig& c, const Layout& layout, LutCache* cache = nullptr,
                      std::string* warning = nullptr);

} // namespace hby
