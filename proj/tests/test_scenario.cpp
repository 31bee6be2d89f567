#include <doctest.h>

#include <cmath>

#include "crashsynth/errors.hpp"
#include "crashsynth/map_gen.hpp"
#include "crashsynth/planner.hpp"
#include "crashsynth/scenario.hpp"

using namespace crashsynth;

namespace {

RoadNetwork straight_map() {
  mapgen::SiteSpec s;
  s.id = "str";
  s.type = RoadType::StraightRoad;
  return mapgen::single_site(s);
}

AccidentAbstract rear_end_abstract() {
  AbstractDraft draft;
  draft.collision_location = RoadType::StraightRoad;
  ParticipantSpec p;
  p.id = "P1";
  p.direction = CompassDirection::Northbound;
  p.actions = {DrivingAction::FollowLane};
  draft.participants.push_back(p);
  p.id = "P2";
  p.actions = {DrivingAction::Stop};
  draft.participants.push_back(p);
  draft.striker_id = "P1";
  draft.crash_type = CrashType::RearEnd;
  return finalize_abstract(apply_defaults(draft));
}

ReconstructedScenario planned_scenario(const RoadNetwork& net) {
  SolverConfig cfg;
  PlanResult result = plan_scenario(rear_end_abstract(), net, cfg, 1);
  REQUIRE(result.status == PlanStatus::Ok);
  return result.scenarios.front();
}

}  // namespace

TEST_CASE("scenario JSON round-trips exactly") {
  RoadNetwork net = straight_map();
  ReconstructedScenario s = planned_scenario(net);

  const std::string text = serialize_scenario(s);
  ReconstructedScenario loaded = parse_scenario(text);

  CHECK(loaded.site_id == s.site_id);
  CHECK(loaded.abstract == s.abstract);
  REQUIRE(loaded.participants.size() == s.participants.size());
  for (std::size_t i = 0; i < s.participants.size(); ++i) {
    const auto& a = s.participants[i];
    const auto& b = loaded.participants[i];
    CHECK(a.id == b.id);
    CHECK(a.is_striker == b.is_striker);
    REQUIRE(a.actions.size() == b.actions.size());
    for (std::size_t k = 0; k < a.actions.size(); ++k) {
      CHECK(a.actions[k].geometry.action == b.actions[k].geometry.action);
      REQUIRE(a.actions[k].waypoints.size() == b.actions[k].waypoints.size());
      for (std::size_t w = 0; w < a.actions[k].waypoints.size(); ++w) {
        CHECK(a.actions[k].waypoints[w].x == b.actions[k].waypoints[w].x);
        CHECK(a.actions[k].waypoints[w].y == b.actions[k].waypoints[w].y);
        CHECK(a.actions[k].waypoints[w].v == b.actions[k].waypoints[w].v);
      }
      for (std::size_t c = 0; c < a.actions[k].dt.size(); ++c) {
        CHECK(std::abs(a.actions[k].dt[c] - b.actions[k].dt[c]) < 1e-9);
      }
    }
  }
  REQUIRE(loaded.collision_area.size() == s.collision_area.size());

  // Parsing and re-serializing is byte-stable.
  CHECK(serialize_scenario(loaded) == text);
}

TEST_CASE("scenario waypoint times accumulate across chained actions") {
  RoadNetwork net = straight_map();
  ReconstructedScenario s = planned_scenario(net);

  const std::string text = serialize_scenario(s);
  // The last waypoint time of each participant equals its plan duration.
  ReconstructedScenario loaded = parse_scenario(text);
  for (const auto& p : loaded.participants) {
    double sum = 0.0;
    for (const auto& act : p.actions) {
      for (double d : act.dt) sum += d;
    }
    CHECK(sum == doctest::Approx(s.participant(p.id).total_time()).epsilon(1e-9));
  }
}

TEST_CASE("scenario parser rejects malformed documents") {
  RoadNetwork net = straight_map();
  ReconstructedScenario s = planned_scenario(net);
  const std::string good = serialize_scenario(s);

  CHECK_THROWS_AS(parse_scenario("not json"), SchemaError);
  CHECK_THROWS_AS(parse_scenario("[]"), SchemaError);
  CHECK_THROWS_AS(parse_scenario("{}"), SchemaError);

  // Decreasing waypoint time.
  {
    ReconstructedScenario broken = s;
    broken.participants[0].actions[0].dt[0] = -1.0;
    CHECK_THROWS_AS(parse_scenario(serialize_scenario(broken)), SemanticError);
  }

  // Role contradicting the abstract (the last "striker" occurrence is the
  // top-level participant role, not the abstract's).
  {
    std::string bad = good;
    const auto pos = bad.rfind("\"striker\"");
    REQUIRE(pos != std::string::npos);
    bad.replace(pos, 9, "\"victim\"");
    CHECK_THROWS_AS(parse_scenario(bad), SemanticError);
  }

  // Collision area with too few vertices.
  {
    ReconstructedScenario broken = s;
    broken.collision_area.resize(2);
    CHECK_THROWS_AS(parse_scenario(serialize_scenario(broken)), SchemaError);
  }
}

TEST_CASE("rebinding a loaded scenario restores catalog geometry") {
  RoadNetwork net = straight_map();
  ReconstructedScenario s = planned_scenario(net);
  SolverConfig cfg;

  ReconstructedScenario loaded = parse_scenario(serialize_scenario(s));
  // Regions are not serialized.
  CHECK(loaded.striker().actions.front().geometry.start_region.empty());

  rebind_scenario(loaded, net, cfg);
  for (std::size_t i = 0; i < s.participants.size(); ++i) {
    const auto& orig = s.participants[i];
    const auto& back = loaded.participants[i];
    for (std::size_t k = 0; k < orig.actions.size(); ++k) {
      const ActionGeometry& g0 = orig.actions[k].geometry;
      const ActionGeometry& g1 = back.actions[k].geometry;
      CHECK(g1.action == g0.action);
      CHECK(g1.stop_at_end == g0.stop_at_end);
      CHECK(g1.apply_fd == g0.apply_fd);
      REQUIRE(g1.start_region.size() == g0.start_region.size());
      CHECK(geom::polygon_area(g1.start_region) ==
            doctest::Approx(geom::polygon_area(g0.start_region)));
      CHECK(back.actions[k].source_road == orig.actions[k].source_road);
      CHECK(back.actions[k].source_lane == orig.actions[k].source_lane);
    }
  }

  // Rebinding refuses plans that disagree with the abstract.
  ReconstructedScenario mismatched = parse_scenario(serialize_scenario(s));
  mismatched.participants[0].actions[0].geometry.action = DrivingAction::UTurn;
  CHECK_THROWS_AS(rebind_scenario(mismatched, net, cfg), SemanticError);
}
