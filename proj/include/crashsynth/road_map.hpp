#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "crashsynth/abstract.hpp"
#include "crashsynth/geometry.hpp"

namespace crashsynth {

struct Lane {
  std::string id;
  // 1-based position within the road, 1 = leftmost in travel direction.
  int index = 1;
  double width_m = 3.5;
  geom::Vec2 entrance;
  geom::Vec2 exit;

  geom::Vec2 direction() const { return geom::normalized(exit - entrance); }
  double length() const { return geom::distance(entrance, exit); }
  geom::Polygon rectangle() const { return geom::segment_rectangle(entrance, exit, width_m * 0.5); }
  // Lane rectangle shrunk laterally so a vehicle of the given width fits
  // without its footprint crossing the lane boundary. Empty when the vehicle
  // is wider than the lane.
  geom::Polygon corridor(double vehicle_width) const;
};

struct Road {
  std::string id;
  CompassDirection direction = CompassDirection::Northbound;
  double speed_limit_mps = 13.4;
  std::vector<Lane> lanes;

  const Lane& lane_at(int index) const;
  // Unit travel direction, taken from the first lane's geometry.
  geom::Vec2 direction_vector() const;
};

struct Site {
  std::string id;
  RoadType type = RoadType::Intersection;
  std::vector<std::string> legs;
  // Convex junction footprint; empty for straight-road sites.
  geom::Polygon junction_polygon;
};

struct RoadNetwork {
  std::vector<Site> sites;
  std::vector<Road> roads;
  std::vector<std::pair<std::string, std::string>> connectivity;

  int road_index(const std::string& id) const;
  const Road& road(const std::string& id) const { return roads[road_index(id)]; }
  int site_index(const std::string& id) const;
  const Site& site(const std::string& id) const { return sites[site_index(id)]; }
  // Successor roads of `road_id` in connectivity order.
  std::vector<int> successors(const std::string& road_id) const;
};

// Parses and validates the map document. Throws SchemaError / SemanticError.
RoadNetwork parse_map(const std::string& json_text);
RoadNetwork parse_map_file(const std::string& path);
std::string serialize_map(const RoadNetwork& network, int indent = 2);

// Minimum lane count the site must offer: for each participant its running
// lane plus one lane per lane change (changes move one lane to the right),
// floored at the running lane itself.
int cal_max_lanes(const AccidentAbstract& abstract);

// Indices of sites matching the requested road type whose every leg carries
// at least `required_lanes` lanes, in map order.
std::vector<int> enumerate_candidates(const RoadNetwork& network, RoadType type,
                                      int required_lanes);

struct ParticipantBinding {
  int road = -1;  // index into network.roads, the participant's source leg
  int lane = 1;   // 1-based lane index on that road
  // Unit movement direction in map coordinates. Equals the bound road's
  // direction for vehicles; for pedestrians it can differ (a crossing
  // pedestrian moves across its bound road).
  geom::Vec2 travel{0.0, 1.0};
};

struct SiteBinding {
  int site = -1;
  std::map<std::string, ParticipantBinding> participants;
};

// Assigns the abstract's compass directions onto the site's inbound legs so
// that every pair of participants keeps its relative orientation class
// (same / opposing / perpendicular), injectively over distinct directions.
// Deterministic: the first valid assignment in leg order wins. Throws
// UnmappableDirections when no assignment exists.
SiteBinding convert_info(const RoadNetwork& network, int site_index,
                         const AccidentAbstract& abstract);

// Relative orientation of two compass directions or two road axes.
enum class OrientationClass { Same, Opposing, Perpendicular };
OrientationClass orientation_class(CompassDirection a, CompassDirection b);
OrientationClass orientation_class(const geom::Vec2& a, const geom::Vec2& b);

// Roads of a junction site that flow into the junction (exit on the junction
// boundary); for straight-road sites, all legs.
std::vector<int> inbound_legs(const RoadNetwork& network, const Site& site);

// Connectivity successors of `road` classified by geometry relative to its
// travel direction. Returns network road index or nullopt.
std::optional<int> straight_successor(const RoadNetwork& network, int road);
std::optional<int> left_successor(const RoadNetwork& network, int road);
std::optional<int> right_successor(const RoadNetwork& network, int road);
std::optional<int> uturn_successor(const RoadNetwork& network, int road);

// Opposing-direction road at the same site/carriageway, if any.
std::optional<int> opposing_road(const RoadNetwork& network, const Site& site, int road);

// Band just beyond the rightmost lane edge used for off-carriageway actions
// (entry zones, run-off strips, pedestrian walkways).
geom::Polygon roadside_strip(const Road& road, double strip_width = 2.5);

}  // namespace crashsynth
