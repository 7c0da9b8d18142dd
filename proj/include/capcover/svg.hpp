// SVG 1.1 rendering of caps on S^2 in orthographic projection, viewed from
// +v (left panel) and -v (right panel).

#pragma once

#include <optional>
#include <string>

#include "capcover/sphere.hpp"

namespace capcover {

struct PlotInput {
  Instance instance;
  std::optional<Cap> cover;             // dashed boundary
  std::optional<Vector> witness_normal;  // separating great circle
};

// View axis: the cover center when a cover is given, otherwise e_3.
// Throws ValidationError unless the instance has dim 2. The output depends
// only on the input values.
std::string render_svg(const PlotInput& input, int panel_size = 400);

}  // namespace capcover
