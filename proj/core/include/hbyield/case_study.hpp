#pragma once

#include <string>
#include <vector>

#include "hbyield/config.hpp"
#include "hbyield/lut_cache.hpp"

namespace hby {

/// The five built-in scenario sweeps, in the order they are documented.
std::vector<std::string> case_study_names();

/// Runs one named sweep with the analytical model and returns its CSV text,
/// header line first. The sweep starts from `base`: swept fields (and the
/// fields that define the scenario, e.g. the pad fractions of the layout
/// sweep) are overwritten row by row, everything else is honored, so
/// overrides can rescale a study for a quick run. A shared cache makes
/// repeated rows over the same layout cheap. Unknown names raise ConfigError.
///
/// Schemas:
///   defect_density      mode,density_per_cm2,chiplet_mm2,component,yield
///   pitch               mode,pitch_um,component,yield
///   chiplet_size        mode,chiplet_mm2,n_chiplets,component,yield
///   pad_layouts         mode,pattern,component,yield
///   redundancy_spacing  mode,scheme,spacing_um,component,yield
std::string run_case_study(const std::string& name, const ProcessConfig& base = {},
                           LutCache* cache = nullptr);

} // namespace hby
