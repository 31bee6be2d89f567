#pragma once

#include <string>
#include <vector>

#include "crashsynth/scenario.hpp"
#include "crashsynth/solver.hpp"

namespace crashsynth {

// One sample of a replayed trajectory.
struct SimTick {
  double t = 0.0;
  geom::Vec2 pos;
  double v = 0.0;
  geom::Vec2 heading{1.0, 0.0};
  int action_index = 0;  // which plan action the tick falls into
};

// Samples the plan at a fixed step with linear interpolation between
// waypoints; headings follow the segment directions. Always includes the
// final waypoint as the last tick.
std::vector<SimTick> replay_plan(const ParticipantScenarioPlan& plan, double dt);

struct SimFailure {
  std::string check;  // corridor | angle_match | simultaneity
  std::string participant;
  double t = 0.0;
  std::string detail;
};

struct SimVerdict {
  std::vector<SimFailure> failures;

  bool passed() const { return failures.empty(); }
};

// Simulation-level acceptance of a scenario: every vehicle stays within its
// lane corridor (junction-interior ticks and lane-leaving maneuvers are
// exempt), the final relative heading matches the crash type, and all
// participants reach the crash within the simultaneity tolerance. The
// scenario must carry catalog geometry (fresh from planning or rebound).
SimVerdict check_sim(const ReconstructedScenario& s, const RoadNetwork& network,
                     const SolverConfig& config);

// Table-style failure bucket for a simulation check failure.
std::string sim_failure_bucket(const SimFailure& f);

// Replay outcome of all scenarios of one accident report.
struct ReportVerdicts {
  std::string report_id;
  std::vector<bool> scenario_passed;
};

// Scenario reconstruction rate: a report counts as reconstructed only when it
// has at least one scenario and every one of its scenarios passed. Throws
// EmptyInput on an empty list.
double compute_srr(const std::vector<ReportVerdicts>& reports);

// --- Test-case generation -------------------------------------------------

struct Pose {
  geom::Vec2 position;
  double heading_deg = 0.0;
};

struct ScheduleEntry {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double v = 0.0;
};

struct NpcTrack {
  std::string id;
  std::vector<ScheduleEntry> schedule;
};

// A scenario turned into an ADS test: one participant becomes the ego (only
// its start pose and destination survive), everyone else replays verbatim.
struct TestCase {
  std::string ego_id;
  Pose ego_start;
  geom::Vec2 ego_destination;
  std::vector<NpcTrack> npcs;
  double oracle_v_min = 0.5;
  Weather weather = Weather::Clear;
  Lighting lighting = Lighting::Daylight;
};

// One test case per vehicle participant, in plan order.
std::vector<TestCase> generate_tests(const ReconstructedScenario& s, const SolverConfig& config);

std::string serialize_test_case(const TestCase& tc, int indent = 2);
TestCase parse_test_case(const std::string& json_text);
TestCase parse_test_case_file(const std::string& path);

// --- Collision oracle ------------------------------------------------------

enum class OracleVerdict { NoCollision, PassiveCollision, Collision };

std::string to_string(OracleVerdict v);

struct OracleOutcome {
  OracleVerdict verdict = OracleVerdict::NoCollision;
  double t = -1.0;      // first overlap time, -1 when none
  std::string npc_id;   // first overlapping npc
};

// Scores an ego trace against the npc schedules with footprint overlap
// tests: overlap while the ego moves at or above v_min is a Collision,
// overlap below v_min is a PassiveCollision. Throws MissingEgoChannel when
// the ego trace is empty.
OracleOutcome collision_oracle(const std::vector<SimTick>& ego, const std::vector<NpcTrack>& npcs,
                               const SolverConfig& config);

// Minimal ego stand-in: drives the straight line to the destination at a
// constant speed (zero speed parks it), sampled like replay_plan.
std::vector<SimTick> constant_velocity_track(const Pose& start, const geom::Vec2& destination,
                                             double speed, double duration, double dt);

}  // namespace crashsynth
