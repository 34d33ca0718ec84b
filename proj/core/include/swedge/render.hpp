#pragma once

// Text grids for layouts and dependency-free SVG line plots.

#include <string>
#include <vector>

#include "swedge/bias.hpp"
#include "swedge/design.hpp"
#include "swedge/effects.hpp"
#include "swedge/study.hpp"

namespace swedge {

/// One row per cluster, one column per period; cells show "0" or the
/// exposure labels of the active interventions.
std::string ascii_grid(const DesignLayout& layout);

struct BiasPanel {
  std::string title;
  EffectCurve curve;
  WeightMatrix h;
};

/// One panel per entry: true delta_{k,e} against e with the flat expected
/// estimate E(theta_k) and the realized average drawn as horizontal lines.
std::string bias_svg(const std::vector<BiasPanel>& panels);

/// Power (%) against delta1, one line per (design, n, intervention).
std::string power_svg(const std::vector<PowerRow>& rows);

}  // namespace swedge
