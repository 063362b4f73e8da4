#pragma once

#include <string>
#include <vector>

#include "dssalloc/analysis.hpp"

namespace dssalloc {

struct PresetCurve {
  std::string label;  // e.g. "m=3" or "r=14"
  Scenario scenario;
};

struct Preset {
  std::string name;
  std::string description;
  std::vector<PresetCurve> curves;
};

const std::vector<Preset>& presets();

/// Throws ConfigError for an unknown name.
const Preset& find_preset(const std::string& name);

}  // namespace dssalloc
