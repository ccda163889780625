#pragma once

#include <string>
#include <vector>

#include "navkit/geometry.hpp"
#include "navkit/scene.hpp"

namespace navkit {

using Polyline2 = std::vector<Vec2>;

/// Optional overlays; a layer group is emitted only when its list is non-empty.
struct VizLayers {
    std::vector<Polyline2> gt_paths;
    std::vector<Polyline2> traces;
    std::vector<Polyline2> plans;
};

/// Pixels per metre.
inline constexpr double kVizScale = 20.0;

const char* class_color(SemanticClass c);

/// Layered SVG: cells (one rect per horizontal run of a class), graph
/// skeleton, then gt paths, traces and plans. World +y points up.
/// Output depends only on the inputs.
std::string viz_svg(const Scene& scene, const VizLayers& layers = {});

}  // namespace navkit
