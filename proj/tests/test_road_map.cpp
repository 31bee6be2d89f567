#include <doctest.h>

#include "crashsynth/errors.hpp"
#include "crashsynth/map_gen.hpp"
#include "crashsynth/road_map.hpp"

using namespace crashsynth;

namespace {

RoadNetwork cross(int lanes = 2, double width = 3.5) {
  mapgen::SiteSpec s;
  s.id = "x";
  s.type = RoadType::Intersection;
  s.lanes = lanes;
  s.lane_width = width;
  return mapgen::single_site(s);
}

AccidentAbstract simple_abstract(CompassDirection d1, CompassDirection d2,
                                 CrashType type = CrashType::Frontal) {
  AbstractDraft draft;
  ParticipantSpec p;
  p.id = "P1";
  p.direction = d1;
  p.actions = {DrivingAction::FollowLane};
  draft.participants.push_back(p);
  p.id = "P2";
  p.direction = d2;
  draft.participants.push_back(p);
  draft.crash_type = type;
  draft.striker_id = "P1";
  return finalize_abstract(apply_defaults(draft));
}

}  // namespace

TEST_CASE("generated cross site round-trips through the map serializer") {
  RoadNetwork net = cross();
  CHECK(net.roads.size() == 8);
  CHECK(net.sites.size() == 1);
  CHECK(net.connectivity.size() == 16);

  RoadNetwork again = parse_map(serialize_map(net));
  CHECK(again.roads.size() == net.roads.size());
  CHECK(again.sites.size() == 1);
  CHECK(again.connectivity == net.connectivity);
  CHECK(again.road("x_in_n").lanes.size() == 2);
}

TEST_CASE("map validation rejects broken documents") {
  RoadNetwork net = cross();
  std::string good = serialize_map(net);

  // Dangling connectivity target.
  RoadNetwork bad = net;
  bad.connectivity.emplace_back("x_in_n", "nowhere");
  CHECK_THROWS_AS(parse_map(serialize_map(bad)), SemanticError);

  // Duplicate road id.
  bad = net;
  bad.roads.push_back(bad.roads.front());
  CHECK_THROWS_AS(parse_map(serialize_map(bad)), SemanticError);

  // Lane indices must be exactly 1..n.
  bad = net;
  bad.roads.front().lanes.back().index = 7;
  CHECK_THROWS_AS(parse_map(serialize_map(bad)), SemanticError);

  // Junction sites need a junction polygon.
  bad = net;
  bad.sites.front().junction_polygon.clear();
  CHECK_THROWS_AS(parse_map(serialize_map(bad)), SemanticError);

  CHECK_THROWS_AS(parse_map("{"), SchemaError);
  CHECK_THROWS_AS(parse_map("{\"roads\": []}"), SchemaError);
  (void)good;
}

TEST_CASE("right-hand lane placement of the generated geometry") {
  RoadNetwork net = cross(2, 3.5);
  const Road& in_n = net.road("x_in_n");
  // Northbound lanes sit east of the carriageway centerline, lane 1 leftmost.
  CHECK(in_n.lanes[0].entrance.x == doctest::Approx(1.75));
  CHECK(in_n.lanes[1].entrance.x == doctest::Approx(5.25));
  CHECK(in_n.lanes[0].exit.y == doctest::Approx(-7.0));
  const Road& out_w = net.road("x_out_w");
  CHECK(out_w.lanes[0].entrance.y == doctest::Approx(1.75));
  CHECK(out_w.lanes[0].entrance.x == doctest::Approx(-7.0));

  const Site& site = net.sites.front();
  CHECK(geom::polygon_area(site.junction_polygon) == doctest::Approx(14.0 * 14.0));
}

TEST_CASE("cal_max_lanes counts rightward lane changes") {
  AccidentAbstract a = simple_abstract(CompassDirection::Northbound, CompassDirection::Southbound);
  CHECK(cal_max_lanes(a) == 1);
  a.participants[0].running_lane = 2;
  CHECK(cal_max_lanes(a) == 2);
  a.participants[1].actions = {DrivingAction::ChangeLane, DrivingAction::FollowLane};
  CHECK(cal_max_lanes(a) == 2);
  a.participants[1].actions = {DrivingAction::ChangeLane, DrivingAction::ChangeLane};
  CHECK(cal_max_lanes(a) == 3);
}

TEST_CASE("candidate sites are filtered by type and lane count") {
  RoadNetwork net = mapgen::standard_grid();
  auto all_x = enumerate_candidates(net, RoadType::Intersection, 1);
  CHECK(all_x.size() == 6);
  auto two_lane_x = enumerate_candidates(net, RoadType::Intersection, 2);
  // The single-lane site and the narrow-leg site drop out.
  CHECK(two_lane_x.size() == 4);
  auto three_lane_x = enumerate_candidates(net, RoadType::Intersection, 3);
  CHECK(three_lane_x.size() == 1);
  CHECK(enumerate_candidates(net, RoadType::TJunction, 2).size() == 4);
  CHECK(enumerate_candidates(net, RoadType::StraightRoad, 2).size() == 2);
  CHECK(enumerate_candidates(net, RoadType::StraightRoad, 3).size() == 1);
}

TEST_CASE("orientation classes for compass directions and vectors") {
  CHECK(orientation_class(CompassDirection::Northbound, CompassDirection::Northbound) ==
        OrientationClass::Same);
  CHECK(orientation_class(CompassDirection::Northbound, CompassDirection::Southbound) ==
        OrientationClass::Opposing);
  CHECK(orientation_class(CompassDirection::Northbound, CompassDirection::Eastbound) ==
        OrientationClass::Perpendicular);
  CHECK(orientation_class({0, 1}, {0.1, 1}) == OrientationClass::Same);
  CHECK(orientation_class({0, 1}, {0, -1}) == OrientationClass::Opposing);
  CHECK(orientation_class({0, 1}, {1, 0}) == OrientationClass::Perpendicular);
}

TEST_CASE("inbound legs of a junction flow toward its centroid") {
  RoadNetwork net = cross();
  std::vector<int> in = inbound_legs(net, net.sites.front());
  CHECK(in.size() == 4);
  for (int idx : in) {
    CHECK(net.roads[idx].id.find("_in_") != std::string::npos);
  }
}

TEST_CASE("successor classification by geometry") {
  RoadNetwork net = cross();
  int in_n = net.road_index("x_in_n");
  auto straight = straight_successor(net, in_n);
  auto left = left_successor(net, in_n);
  auto right = right_successor(net, in_n);
  auto back = uturn_successor(net, in_n);
  REQUIRE(straight);
  REQUIRE(left);
  REQUIRE(right);
  REQUIRE(back);
  CHECK(net.roads[*straight].id == "x_out_n");
  CHECK(net.roads[*left].id == "x_out_w");
  CHECK(net.roads[*right].id == "x_out_e");
  CHECK(net.roads[*back].id == "x_out_s");
}

TEST_CASE("t-junction stems have no straight successor") {
  mapgen::SiteSpec s;
  s.id = "t";
  s.type = RoadType::TJunction;
  s.missing_arm = CompassDirection::Northbound;
  RoadNetwork net = mapgen::single_site(s);
  int stem = net.road_index("t_in_n");
  CHECK_FALSE(straight_successor(net, stem));
  REQUIRE(left_successor(net, stem));
  REQUIRE(right_successor(net, stem));
  CHECK(net.roads[*left_successor(net, stem)].id == "t_out_w");
  CHECK(net.roads[*right_successor(net, stem)].id == "t_out_e");
}

TEST_CASE("opposing road picks the adjacent carriageway half") {
  RoadNetwork net = cross();
  const Site& site = net.sites.front();
  auto opp = opposing_road(net, site, net.road_index("x_in_n"));
  REQUIRE(opp);
  CHECK(net.roads[*opp].id == "x_out_s");

  mapgen::SiteSpec s;
  s.id = "str";
  s.type = RoadType::StraightRoad;
  RoadNetwork line = mapgen::single_site(s);
  auto opp2 = opposing_road(line, line.sites.front(), line.road_index("str_n"));
  REQUIRE(opp2);
  CHECK(line.roads[*opp2].id == "str_s");
}

TEST_CASE("direction mapping preserves pairwise orientation classes") {
  RoadNetwork net = cross();
  AccidentAbstract a =
      simple_abstract(CompassDirection::Eastbound, CompassDirection::Westbound);
  SiteBinding b = convert_info(net, 0, a);
  const Road& r1 = net.roads[b.participants.at("P1").road];
  const Road& r2 = net.roads[b.participants.at("P2").road];
  CHECK(orientation_class(r1.direction_vector(), r2.direction_vector()) ==
        OrientationClass::Opposing);

  AccidentAbstract perp =
      simple_abstract(CompassDirection::Northbound, CompassDirection::Eastbound,
                      CrashType::FrontToSide);
  SiteBinding bp = convert_info(net, 0, perp);
  CHECK(orientation_class(net.roads[bp.participants.at("P1").road].direction_vector(),
                          net.roads[bp.participants.at("P2").road].direction_vector()) ==
        OrientationClass::Perpendicular);

  // Same direction shares the leg.
  AccidentAbstract same =
      simple_abstract(CompassDirection::Westbound, CompassDirection::Westbound,
                      CrashType::RearEnd);
  SiteBinding bs = convert_info(net, 0, same);
  CHECK(bs.participants.at("P1").road == bs.participants.at("P2").road);
}

TEST_CASE("unmappable direction layouts throw") {
  // One-way main t-junction: only one main direction exists, so an opposing
  // vehicle pair crossing the main cannot be placed.
  mapgen::SiteSpec s;
  s.id = "t1w";
  s.type = RoadType::TJunction;
  s.missing_arm = CompassDirection::Northbound;
  s.one_way = true;
  RoadNetwork net = mapgen::single_site(s);

  AccidentAbstract three = simple_abstract(CompassDirection::Eastbound, CompassDirection::Westbound);
  ParticipantSpec extra;
  extra.id = "P3";
  extra.direction = CompassDirection::Northbound;
  extra.actions = {DrivingAction::TurnLeft};
  three.participants.push_back(extra);
  CHECK_THROWS_AS(convert_info(net, 0, three), UnmappableDirections);
}

TEST_CASE("lane bounds are checked during binding") {
  RoadNetwork net = cross(1);
  AccidentAbstract a = simple_abstract(CompassDirection::Northbound, CompassDirection::Southbound);
  a.participants[0].running_lane = 2;
  a.lane_num = 2;
  CHECK_THROWS_AS(convert_info(net, 0, a), UnmappableDirections);
}

TEST_CASE("pedestrians bind relative to the anchor vehicle") {
  RoadNetwork net = cross();
  AbstractDraft draft;
  ParticipantSpec car;
  car.id = "P1";
  car.direction = CompassDirection::Northbound;
  car.actions = {DrivingAction::FollowLane};
  draft.participants.push_back(car);
  ParticipantSpec ped;
  ped.id = "P2";
  ped.kind = ParticipantKind::Pedestrian;
  ped.direction = CompassDirection::Eastbound;
  ped.actions = {DrivingAction::PedestrianCross};
  draft.participants.push_back(ped);
  draft.crash_type = CrashType::FrontToSide;
  draft.striker_id = "P1";
  AccidentAbstract a = finalize_abstract(apply_defaults(draft));

  SiteBinding b = convert_info(net, 0, a);
  const ParticipantBinding& pb = b.participants.at("P2");
  const ParticipantBinding& vb = b.participants.at("P1");
  // Crossing pedestrian moves perpendicular to the vehicle and binds to a
  // leg it can cross.
  CHECK(std::abs(geom::dot(pb.travel, vb.travel)) < 0.3);
  CHECK(orientation_class(pb.travel, net.roads[pb.road].direction_vector()) ==
        OrientationClass::Perpendicular);
}

TEST_CASE("roadside strip hugs the rightmost lane") {
  RoadNetwork net = cross(2, 3.5);
  const Road& in_n = net.road("x_in_n");
  geom::Polygon strip = roadside_strip(in_n);
  // Rightmost northbound lane centerline is x = 5.25, half width 1.75, strip
  // width 2.5: strip spans x in [7.0, 9.5].
  geom::Vec2 c = geom::polygon_centroid(strip);
  CHECK(c.x == doctest::Approx(8.25));
  CHECK(geom::polygon_area(strip) == doctest::Approx(2.5 * in_n.lanes[0].length()));
}

TEST_CASE("lane corridor shrinks by the vehicle half width") {
  RoadNetwork net = cross(2, 3.5);
  const Lane& l = net.road("x_in_n").lanes[0];
  geom::Polygon corridor = l.corridor(1.8);
  REQUIRE_FALSE(corridor.empty());
  // 3.5 wide lane minus 1.8 vehicle leaves a 1.7 wide corridor.
  double area = geom::polygon_area(corridor);
  CHECK(area == doctest::Approx(1.7 * l.length()));
  CHECK(l.corridor(3.6).empty());
}
