#include "crashsynth/validation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "crashsynth/constraint_builder.hpp"
#include "crashsynth/errors.hpp"
#include "json.hpp"

namespace crashsynth {

using nlohmann::json;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct TimedPoint {
  double t;
  geom::Vec2 pos;
  double v;
  int action_index;
};

// Flattens the plan onto one time axis, dropping the duplicated chain points.
std::vector<TimedPoint> timeline(const ParticipantScenarioPlan& plan) {
  std::vector<TimedPoint> points;
  double t = 0.0;
  for (std::size_t k = 0; k < plan.actions.size(); ++k) {
    const auto& act = plan.actions[k];
    for (std::size_t i = 0; i < act.waypoints.size(); ++i) {
      if (i > 0) t += act.dt[i - 1];
      if (i == 0 && !points.empty()) continue;  // same point as the previous action's end
      points.push_back({t, act.waypoints[i].pos(), act.waypoints[i].v, static_cast<int>(k)});
    }
  }
  return points;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

bool corridor_exempt(DrivingAction a) {
  switch (a) {
    case DrivingAction::ChangeLane:
    case DrivingAction::Retrograde:
    case DrivingAction::DriveOffRoad:
    case DrivingAction::DriveIntoRoads:
    case DrivingAction::UTurn:
    case DrivingAction::PedestrianCross:
    case DrivingAction::PedestrianWalk:
      return true;
    default:
      return false;
  }
}

double heading_deg(const geom::Vec2& dir) { return std::atan2(dir.y, dir.x) * 180.0 / kPi; }

// Position, speed and heading of an npc schedule at time t: linear between
// entries, held at the ends.
SimTick sample_npc(const NpcTrack& npc, double t) {
  const auto& sched = npc.schedule;
  SimTick tick;
  tick.t = t;
  if (sched.size() == 1 || t <= sched.front().t) {
    tick.pos = {sched.front().x, sched.front().y};
    tick.v = sched.front().v;
  } else if (t >= sched.back().t) {
    tick.pos = {sched.back().x, sched.back().y};
    tick.v = 0.0;  // a crashed npc stays put
  } else {
    std::size_t i = 1;
    while (sched[i].t < t) ++i;
    const auto& a = sched[i - 1];
    const auto& b = sched[i];
    const double u = (t - a.t) / (b.t - a.t);
    tick.pos = {a.x + (b.x - a.x) * u, a.y + (b.y - a.y) * u};
    tick.v = a.v + (b.v - a.v) * u;
  }

  // Heading of the schedule segment the sample falls into, searching
  // backwards for a non-degenerate one when stopped.
  geom::Vec2 dir{1.0, 0.0};
  for (std::size_t i = 1; i < sched.size(); ++i) {
    if (sched[i].t >= t || i + 1 == sched.size()) {
      for (std::size_t j = i; j >= 1; --j) {
        geom::Vec2 d = geom::Vec2{sched[j].x, sched[j].y} - geom::Vec2{sched[j - 1].x, sched[j - 1].y};
        if (geom::norm(d) > 1e-9) {
          dir = geom::normalized(d);
          break;
        }
      }
      break;
    }
  }
  tick.heading = dir;
  return tick;
}

}  // namespace

std::vector<SimTick> replay_plan(const ParticipantScenarioPlan& plan, double dt) {
  const std::vector<TimedPoint> points = timeline(plan);
  std::vector<SimTick> ticks;
  if (points.size() < 2) throw SemanticError("participant " + plan.id + " has no trajectory");
  const double total = points.back().t;

  geom::Vec2 last_heading{1.0, 0.0};
  std::size_t seg = 1;
  for (double t = 0.0;; t += dt) {
    if (t > total) t = total;
    while (seg + 1 < points.size() && points[seg].t < t) ++seg;
    const TimedPoint& a = points[seg - 1];
    const TimedPoint& b = points[seg];
    const double span = b.t - a.t;
    const double u = span > 1e-12 ? std::clamp((t - a.t) / span, 0.0, 1.0) : 0.0;

    SimTick tick;
    tick.t = t;
    tick.pos = a.pos + (b.pos - a.pos) * u;
    tick.v = a.v + (b.v - a.v) * u;
    tick.action_index = b.action_index;
    geom::Vec2 d = b.pos - a.pos;
    if (geom::norm(d) > 1e-9) last_heading = geom::normalized(d);
    tick.heading = last_heading;
    ticks.push_back(tick);
    if (t >= total) break;
  }
  return ticks;
}

SimVerdict check_sim(const ReconstructedScenario& s, const RoadNetwork& network,
                     const SolverConfig& config) {
  SimVerdict verdict;
  const Site& site = network.site(s.site_id);
  const geom::Polygon& junction = site.junction_polygon;

  for (const auto& p : s.participants) {
    if (p.kind != ParticipantKind::Vehicle) continue;
    const std::vector<SimTick> ticks = replay_plan(p, config.replay_dt);
    for (const SimTick& tick : ticks) {
      const PlannedAction& act = p.actions[static_cast<std::size_t>(tick.action_index)];
      if (corridor_exempt(act.geometry.action)) continue;
      if (junction.size() >= 3 && geom::point_in_convex(junction, tick.pos, 1e-9)) continue;

      bool inside = false;
      double worst = 1e300;
      for (const std::optional<int>& road_opt :
           {std::optional<int>(act.source_road), act.dest_road}) {
        if (!road_opt || *road_opt < 0) continue;
        const Road& road = network.roads[static_cast<std::size_t>(*road_opt)];
        const int lane_index = (*road_opt == act.source_road) ? act.source_lane
                                                              : act.dest_lane.value_or(1);
        const Lane& lane = road.lane_at(lane_index);
        const double half = (lane.width_m - config.vehicle_width) * 0.5;
        const double off =
            std::abs(geom::lateral_offset(tick.pos, lane.entrance, lane.direction()));
        worst = std::min(worst, off - half);
        if (off <= half + 1e-9) {
          inside = true;
          break;
        }
      }
      if (!inside) {
        verdict.failures.push_back({"corridor", p.id, tick.t,
                                    "lateral excess " + fmt(worst) + " m during " +
                                        to_string(act.geometry.action)});
        break;  // one corridor failure per participant is enough
      }
    }
  }

  // Final relative heading must sit inside the crash-type band.
  double lo_deg = 0.0, hi_deg = 180.0;
  crash_angle_band(s.abstract.crash.crash_type, lo_deg, hi_deg);
  const std::vector<SimTick> striker_ticks = replay_plan(s.striker(), config.replay_dt);
  const SimTick& striker_final = striker_ticks.back();
  for (const std::string& vid : s.abstract.crash.victim_ids) {
    const std::vector<SimTick> victim_ticks = replay_plan(s.participant(vid), config.replay_dt);
    const double angle =
        geom::angle_between_deg(striker_final.heading, victim_ticks.back().heading);
    if (angle < lo_deg - 1e-7 || angle > hi_deg + 1e-7) {
      verdict.failures.push_back({"angle_match", vid, victim_ticks.back().t,
                                  "relative heading " + fmt(angle) + " outside [" +
                                      fmt(lo_deg) + ", " + fmt(hi_deg) + "] for " +
                                      to_string(s.abstract.crash.crash_type)});
    }

    const double skew = std::abs(s.participant(vid).total_time() - s.striker().total_time());
    if (skew > config.simultaneity_tol_s) {
      verdict.failures.push_back({"simultaneity", vid, victim_ticks.back().t,
                                  "arrival skew " + fmt(skew) + " s exceeds " +
                                      fmt(config.simultaneity_tol_s) + " s"});
    }
  }
  return verdict;
}

std::string sim_failure_bucket(const SimFailure& f) {
  if (f.check == "corridor") return "crossing";
  if (f.check == "angle_match") return "crash-type mismatch";
  return "trajectory-planning failure";
}

double compute_srr(const std::vector<ReportVerdicts>& reports) {
  if (reports.empty()) throw EmptyInput("SRR over zero reports");
  std::size_t passed = 0;
  for (const auto& r : reports) {
    if (r.scenario_passed.empty()) continue;
    bool all = true;
    for (bool ok : r.scenario_passed) all = all && ok;
    if (all) ++passed;
  }
  return static_cast<double>(passed) / static_cast<double>(reports.size());
}

std::vector<TestCase> generate_tests(const ReconstructedScenario& s, const SolverConfig& config) {
  std::vector<TestCase> cases;
  for (const auto& ego : s.participants) {
    if (ego.kind != ParticipantKind::Vehicle) continue;

    TestCase tc;
    tc.ego_id = ego.id;
    tc.oracle_v_min = config.oracle_v_min;
    tc.weather = s.abstract.weather;
    tc.lighting = s.abstract.lighting;

    const auto& first = ego.actions.front().waypoints;
    tc.ego_start.position = first.front().pos();
    tc.ego_start.heading_deg = heading_deg(geom::normalized(first[1].pos() - first[0].pos()));
    tc.ego_destination = ego.final_waypoint().pos();

    for (const auto& other : s.participants) {
      if (other.id == ego.id) continue;
      NpcTrack npc;
      npc.id = other.id;
      for (const TimedPoint& pt : timeline(other)) {
        npc.schedule.push_back({pt.t, pt.pos.x, pt.pos.y, pt.v});
      }
      tc.npcs.push_back(std::move(npc));
    }
    cases.push_back(std::move(tc));
  }
  return cases;
}

std::string serialize_test_case(const TestCase& tc, int indent) {
  json j;
  j["ego"] = {{"id", tc.ego_id},
              {"start_pose",
               {{"x", tc.ego_start.position.x},
                {"y", tc.ego_start.position.y},
                {"heading_deg", tc.ego_start.heading_deg}}},
              {"destination", {{"x", tc.ego_destination.x}, {"y", tc.ego_destination.y}}}};
  json npcs = json::array();
  for (const auto& npc : tc.npcs) {
    json sched = json::array();
    for (const auto& e : npc.schedule) {
      sched.push_back({{"t", e.t}, {"x", e.x}, {"y", e.y}, {"v", e.v}});
    }
    npcs.push_back({{"id", npc.id}, {"schedule", std::move(sched)}});
  }
  j["npcs"] = std::move(npcs);
  j["oracle"] = {{"type", "collision_moving_ego"}, {"v_min_mps", tc.oracle_v_min}};
  j["environment"] = {{"weather", to_string(tc.weather)}, {"lighting", to_string(tc.lighting)}};
  return j.dump(indent) + "\n";
}

TestCase parse_test_case(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("test case is not valid JSON: ") + e.what());
  }
  for (const char* key : {"ego", "npcs", "oracle"}) {
    if (!j.contains(key)) throw SchemaError(std::string("test case missing '") + key + "'");
  }

  TestCase tc;
  const json& ego = j.at("ego");
  if (!ego.contains("id") || !ego.contains("start_pose") || !ego.contains("destination")) {
    throw SchemaError("'ego' needs id, start_pose and destination");
  }
  tc.ego_id = ego.at("id").get<std::string>();
  const json& pose = ego.at("start_pose");
  tc.ego_start.position = {pose.at("x").get<double>(), pose.at("y").get<double>()};
  tc.ego_start.heading_deg = pose.at("heading_deg").get<double>();
  tc.ego_destination = {ego.at("destination").at("x").get<double>(),
                        ego.at("destination").at("y").get<double>()};

  const json& oracle = j.at("oracle");
  if (oracle.at("type").get<std::string>() != "collision_moving_ego") {
    throw SchemaError("unknown oracle type " + oracle.at("type").dump());
  }
  tc.oracle_v_min = oracle.at("v_min_mps").get<double>();

  if (j.contains("environment")) {
    tc.weather = parse_weather(j.at("environment").at("weather").get<std::string>());
    tc.lighting = parse_lighting(j.at("environment").at("lighting").get<std::string>());
  }

  for (const json& jn : j.at("npcs")) {
    NpcTrack npc;
    npc.id = jn.at("id").get<std::string>();
    if (!jn.contains("schedule") || !jn.at("schedule").is_array() || jn.at("schedule").empty()) {
      throw SchemaError("npc " + npc.id + " needs a non-empty schedule");
    }
    double last_t = -1.0;
    for (const json& je : jn.at("schedule")) {
      ScheduleEntry e{je.at("t").get<double>(), je.at("x").get<double>(),
                      je.at("y").get<double>(), je.at("v").get<double>()};
      if (e.t <= last_t) throw SemanticError("npc schedule times must be strictly increasing");
      last_t = e.t;
      npc.schedule.push_back(e);
    }
    tc.npcs.push_back(std::move(npc));
  }
  return tc;
}

TestCase parse_test_case_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open test case file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_test_case(buf.str());
}

std::string to_string(OracleVerdict v) {
  switch (v) {
    case OracleVerdict::NoCollision: return "no_collision";
    case OracleVerdict::PassiveCollision: return "passive_collision";
    case OracleVerdict::Collision: return "collision";
  }
  return "no_collision";
}

OracleOutcome collision_oracle(const std::vector<SimTick>& ego, const std::vector<NpcTrack>& npcs,
                               const SolverConfig& config) {
  if (ego.empty()) throw MissingEgoChannel("oracle needs a non-empty ego trace");

  OracleOutcome outcome;
  for (const SimTick& tick : ego) {
    geom::Obb ego_box{tick.pos, tick.heading, config.vehicle_length, config.vehicle_width};
    for (const NpcTrack& npc : npcs) {
      if (npc.schedule.empty()) continue;
      const SimTick nt = sample_npc(npc, tick.t);
      // All channels are scored with the vehicle footprint; the oracle does
      // not know participant kinds.
      geom::Obb npc_box{nt.pos, nt.heading, config.vehicle_length, config.vehicle_width};
      if (geom::obb_overlap(ego_box, npc_box)) {
        outcome.verdict = tick.v >= config.oracle_v_min ? OracleVerdict::Collision
                                                        : OracleVerdict::PassiveCollision;
        outcome.t = tick.t;
        outcome.npc_id = npc.id;
        return outcome;
      }
    }
  }
  return outcome;
}

std::vector<SimTick> constant_velocity_track(const Pose& start, const geom::Vec2& destination,
                                             double speed, double duration, double dt) {
  const geom::Vec2 offset = destination - start.position;
  const double dist = geom::norm(offset);
  geom::Vec2 dir{std::cos(start.heading_deg * kPi / 180.0),
                 std::sin(start.heading_deg * kPi / 180.0)};
  if (speed > 0.0 && dist > 1e-9) dir = geom::normalized(offset);

  std::vector<SimTick> ticks;
  for (double t = 0.0;; t += dt) {
    if (t > duration) t = duration;
    SimTick tick;
    tick.t = t;
    const double travelled = speed > 0.0 ? std::min(speed * t, dist) : 0.0;
    tick.pos = start.position + dir * travelled;
    tick.v = (speed > 0.0 && travelled < dist) ? speed : 0.0;
    tick.heading = dir;
    ticks.push_back(tick);
    if (t >= duration) break;
  }
  return ticks;
}

}  // namespace crashsynth
