#pragma once

#include <map>
#include <string>

#include "crashsynth/geometry.hpp"
#include "crashsynth/road_map.hpp"

namespace crashsynth {
namespace mapgen {

// Parameters for one synthetic site. Junction sites get one arm per compass
// point (minus the missing arm for t-junctions), each arm carrying an inbound
// and an outbound one-way road under right-hand traffic.
struct SiteSpec {
  std::string id;
  RoadType type = RoadType::Intersection;
  geom::Vec2 center{0.0, 0.0};
  int lanes = 2;
  double lane_width = 3.5;
  double leg_length = 60.0;
  double speed_limit_mps = 13.4;

  // TJunction: the arm that does not exist (the stem comes from the opposite
  // side). Ignored for other types.
  CompassDirection missing_arm = CompassDirection::Northbound;

  // StraightRoad: travel direction of the primary carriageway.
  CompassDirection axis = CompassDirection::Northbound;

  // Drops the opposing carriageway (straight roads) or the opposing main
  // direction (t-junctions).
  bool one_way = false;

  // Per-travel-direction lane count overrides.
  std::map<CompassDirection, int> lane_overrides;
};

// Appends the site's roads, junction polygon and connectivity to `net`.
void add_site(RoadNetwork& net, const SiteSpec& spec);

RoadNetwork single_site(const SiteSpec& spec);

// Twelve-site map mixing intersections (two of them lane-starved),
// t-junctions and straight roads, spaced far enough apart not to interact.
RoadNetwork standard_grid();

}  // namespace mapgen
}  // namespace crashsynth
