#include <doctest.h>

#include <cmath>

#include "crashsynth/errors.hpp"
#include "crashsynth/map_gen.hpp"
#include "crashsynth/planner.hpp"
#include "crashsynth/validation.hpp"

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

struct Fixture {
  RoadNetwork net = straight_map();
  SolverConfig cfg;
  ReconstructedScenario scenario;

  Fixture() {
    PlanResult result = plan_scenario(rear_end_abstract(), net, cfg, 1);
    REQUIRE(result.status == PlanStatus::Ok);
    scenario = result.scenarios.front();
  }
};

const Fixture& fixture() {
  static Fixture f;
  return f;
}

}  // namespace

TEST_CASE("replay samples the plan on a fixed grid ending at the final waypoint") {
  const Fixture& f = fixture();
  const ParticipantScenarioPlan& striker = f.scenario.striker();
  auto ticks = replay_plan(striker, f.cfg.replay_dt);

  REQUIRE(ticks.size() >= 2);
  CHECK(ticks.front().t == 0.0);
  CHECK(ticks.back().t == doctest::Approx(striker.total_time()));
  const Waypoint& w0 = striker.actions.front().waypoints.front();
  const Waypoint& we = striker.final_waypoint();
  CHECK(ticks.front().pos.x == doctest::Approx(w0.x));
  CHECK(ticks.front().pos.y == doctest::Approx(w0.y));
  CHECK(ticks.back().pos.x == doctest::Approx(we.x));
  CHECK(ticks.back().pos.y == doctest::Approx(we.y));

  for (std::size_t i = 1; i < ticks.size(); ++i) {
    CHECK(ticks[i].t > ticks[i - 1].t);
    CHECK(ticks[i].t - ticks[i - 1].t <= f.cfg.replay_dt + 1e-12);
    CHECK(std::abs(geom::norm(ticks[i].heading) - 1.0) < 1e-9);
  }
}

TEST_CASE("simulation check passes a planned scenario") {
  const Fixture& f = fixture();
  SimVerdict verdict = check_sim(f.scenario, f.net, f.cfg);
  CHECK(verdict.passed());
}

TEST_CASE("simulation check flags corridor escapes") {
  const Fixture& f = fixture();
  ReconstructedScenario broken = f.scenario;
  // Push the victim's whole trajectory laterally out of the corridor but not
  // into another exempt region.
  for (auto& act : broken.participants[1].actions) {
    for (auto& w : act.waypoints) w.x += 1.4;
  }
  SimVerdict verdict = check_sim(broken, f.net, f.cfg);
  CHECK_FALSE(verdict.passed());
  bool corridor = false;
  for (const auto& fail : verdict.failures) {
    if (fail.check == "corridor") {
      corridor = true;
      CHECK(sim_failure_bucket(fail) == "crossing");
    }
  }
  CHECK(corridor);
}

TEST_CASE("simulation check flags heading bands and simultaneity") {
  const Fixture& f = fixture();

  ReconstructedScenario relabeled = f.scenario;
  relabeled.abstract.crash.crash_type = CrashType::Frontal;
  SimVerdict verdict = check_sim(relabeled, f.net, f.cfg);
  bool angle = false;
  for (const auto& fail : verdict.failures) {
    if (fail.check == "angle_match") {
      angle = true;
      CHECK(sim_failure_bucket(fail) == "crash-type mismatch");
    }
  }
  CHECK(angle);

  ReconstructedScenario late = f.scenario;
  for (auto& d : late.participants[1].actions.back().dt) d += 0.3;
  SimVerdict late_verdict = check_sim(late, f.net, f.cfg);
  bool simultaneity = false;
  for (const auto& fail : late_verdict.failures) {
    if (fail.check == "simultaneity") simultaneity = true;
  }
  CHECK(simultaneity);
}

TEST_CASE("SRR counts a report as reconstructed only when every scenario passed") {
  std::vector<ReportVerdicts> reports = {
      {"r1", {true, true}},
      {"r2", {true, false}},
      {"r3", {}},
      {"r4", {true}},
  };
  CHECK(compute_srr(reports) == doctest::Approx(0.5));
  CHECK_THROWS_AS(compute_srr({}), EmptyInput);

  // 47 clean reports out of 50 give the headline rate.
  std::vector<ReportVerdicts> fifty;
  for (int i = 0; i < 50; ++i) fifty.push_back({"r", {i >= 3}});
  CHECK(compute_srr(fifty) == doctest::Approx(0.94));
}

TEST_CASE("test generation emits one case per vehicle with verbatim npc schedules") {
  const Fixture& f = fixture();
  std::vector<TestCase> cases = generate_tests(f.scenario, f.cfg);
  REQUIRE(cases.size() == 2);
  CHECK(cases[0].ego_id == "P1");
  CHECK(cases[1].ego_id == "P2");

  const TestCase& tc = cases[0];
  CHECK(tc.oracle_v_min == doctest::Approx(0.5));
  REQUIRE(tc.npcs.size() == 1);
  CHECK(tc.npcs[0].id == "P2");

  const ParticipantScenarioPlan& victim = f.scenario.participant("P2");
  const auto& sched = tc.npcs[0].schedule;
  REQUIRE(sched.size() >= 2);
  CHECK(sched.front().x == doctest::Approx(victim.actions.front().waypoints.front().x));
  CHECK(sched.back().x == doctest::Approx(victim.final_waypoint().x));
  CHECK(sched.back().t == doctest::Approx(victim.total_time()));

  // Ego keeps only its start pose and destination.
  const ParticipantScenarioPlan& striker = f.scenario.striker();
  CHECK(tc.ego_start.position.x ==
        doctest::Approx(striker.actions.front().waypoints.front().x));
  CHECK(tc.ego_destination.y == doctest::Approx(striker.final_waypoint().y));
}

TEST_CASE("test cases round-trip through JSON") {
  const Fixture& f = fixture();
  std::vector<TestCase> cases = generate_tests(f.scenario, f.cfg);
  const std::string text = serialize_test_case(cases[0]);
  TestCase loaded = parse_test_case(text);
  CHECK(loaded.ego_id == cases[0].ego_id);
  CHECK(loaded.ego_start.heading_deg == doctest::Approx(cases[0].ego_start.heading_deg));
  REQUIRE(loaded.npcs.size() == 1);
  CHECK(loaded.npcs[0].schedule.size() == cases[0].npcs[0].schedule.size());
  CHECK(serialize_test_case(loaded) == text);

  std::string bad = text;
  const auto pos = bad.find("collision_moving_ego");
  bad.replace(pos, 20, "collision_parked_ego");
  CHECK_THROWS_AS(parse_test_case(bad), SchemaError);
  CHECK_THROWS_AS(parse_test_case("{}"), SchemaError);
}

TEST_CASE("collision oracle separates moving and parked ego impacts") {
  SolverConfig cfg;
  NpcTrack parked;
  parked.id = "N1";
  parked.schedule = {{0.0, 20.0, 0.0, 0.0}, {60.0, 20.0, 0.0, 0.0}};

  // Ego drives east into the parked npc.
  Pose start;
  start.position = {0.0, 0.0};
  start.heading_deg = 0.0;
  auto moving = constant_velocity_track(start, {30.0, 0.0}, 10.0, 6.0, cfg.replay_dt);
  OracleOutcome hit = collision_oracle(moving, {parked}, cfg);
  CHECK(hit.verdict == OracleVerdict::Collision);
  CHECK(hit.npc_id == "N1");
  CHECK(hit.t > 0.0);
  CHECK(hit.t < 2.0);

  // Ego parked at the impact point, npc drives into it.
  Pose at_impact;
  at_impact.position = {20.0, 0.0};
  at_impact.heading_deg = 0.0;
  auto parked_ego = constant_velocity_track(at_impact, at_impact.position, 0.0, 6.0, cfg.replay_dt);
  NpcTrack mover;
  mover.id = "N2";
  mover.schedule = {{0.0, 0.0, 0.0, 10.0}, {2.0, 20.0, 0.0, 10.0}};
  OracleOutcome passive = collision_oracle(parked_ego, {mover}, cfg);
  CHECK(passive.verdict == OracleVerdict::PassiveCollision);
  CHECK(passive.npc_id == "N2");

  // Slow ego below v_min is still passive.
  auto slow = constant_velocity_track(start, {30.0, 0.0}, 0.4, 60.0, cfg.replay_dt);
  CHECK(collision_oracle(slow, {parked}, cfg).verdict == OracleVerdict::PassiveCollision);

  // No overlap when the npc is far away.
  NpcTrack far;
  far.id = "N3";
  far.schedule = {{0.0, 100.0, 50.0, 0.0}, {60.0, 100.0, 50.0, 0.0}};
  CHECK(collision_oracle(moving, {far}, cfg).verdict == OracleVerdict::NoCollision);

  CHECK_THROWS_AS(collision_oracle({}, {parked}, cfg), MissingEgoChannel);
}

TEST_CASE("constant velocity track parks at zero speed and stops at the destination") {
  Pose start;
  start.position = {5.0, 5.0};
  start.heading_deg = 90.0;
  auto parked = constant_velocity_track(start, {5.0, 25.0}, 0.0, 1.0, 0.05);
  for (const auto& tick : parked) {
    CHECK(tick.pos.x == doctest::Approx(5.0));
    CHECK(tick.pos.y == doctest::Approx(5.0));
    CHECK(tick.v == 0.0);
  }

  auto moving = constant_velocity_track(start, {5.0, 25.0}, 10.0, 3.0, 0.05);
  CHECK(moving.back().pos.y == doctest::Approx(25.0));
  CHECK(moving.back().v == 0.0);  // arrived and stopped
  CHECK(moving.front().v == doctest::Approx(10.0));
}
