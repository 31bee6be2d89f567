#pragma once

#include <string>

#include "crashsynth/road_map.hpp"
#include "crashsynth/scenario.hpp"

namespace crashsynth {

// Draws the scenario's site (lane rectangles, junction footprint), the
// collision area and one waypoint-labeled polyline per planned action into a
// standalone SVG document. Byte-deterministic for fixed inputs. Throws
// SemanticError when the scenario's site is not in the network.
std::string render_scenario_svg(const ReconstructedScenario& scenario,
                                const RoadNetwork& network);

}  // namespace crashsynth
