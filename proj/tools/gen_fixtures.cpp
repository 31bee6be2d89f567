// Generates the bundled fixture corpus: synthetic maps for each road type,
// accident abstracts spanning the action vocabulary, and annotated report
// directories for the extraction harness. With --check it also plans every
// abstract against its road-type maps and prints a feasibility table so the
// corpus can be tuned against the reconstruction-rate thresholds.
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "crashsynth/abstract.hpp"
#include "crashsynth/errors.hpp"
#include "crashsynth/extraction.hpp"
#include "crashsynth/map_gen.hpp"
#include "crashsynth/planner.hpp"
#include "crashsynth/road_map.hpp"
#include "crashsynth/validation.hpp"
#include "crashsynth/verifier.hpp"

namespace fs = std::filesystem;
using namespace crashsynth;

namespace {

struct CorpusEntry {
  std::string name;
  AccidentAbstract abstract;
};

ParticipantSpec vehicle(const std::string& id, CompassDirection dir,
                        std::vector<DrivingAction> actions, int lane = 1) {
  ParticipantSpec p;
  p.id = id;
  p.kind = ParticipantKind::Vehicle;
  p.direction = dir;
  p.running_lane = lane;
  p.actions = std::move(actions);
  return p;
}

ParticipantSpec walker(const std::string& id, CompassDirection dir, DrivingAction action) {
  ParticipantSpec p;
  p.id = id;
  p.kind = ParticipantKind::Pedestrian;
  p.direction = dir;
  p.running_lane = 1;
  p.actions = {action};
  return p;
}

AccidentAbstract make_abstract(RoadType road, Weather weather, Lighting lighting,
                               std::vector<ParticipantSpec> participants, CrashType crash,
                               std::optional<double> speed_mph = std::nullopt,
                               std::optional<int> lane_num = std::nullopt) {
  AbstractDraft d;
  d.weather = weather;
  d.lighting = lighting;
  d.collision_location = road;
  d.lane_num = lane_num;
  d.speed_limit_mph = speed_mph;
  d.participants = std::move(participants);
  d.crash_type = crash;
  return finalize_abstract(apply_defaults(d));
}

std::vector<CorpusEntry> build_corpus() {
  using D = DrivingAction;
  using C = CompassDirection;
  std::vector<CorpusEntry> out;
  auto add = [&out](const std::string& name, AccidentAbstract a) {
    out.push_back({name, std::move(a)});
  };

  // Intersections.
  add("i01_cross_paths",
      make_abstract(RoadType::Intersection, Weather::Clear, Lighting::Daylight,
                    {vehicle("V1", C::Northbound, {D::VehicleCross}),
                     vehicle("V2", C::Westbound, {D::VehicleCross})},
                    CrashType::FrontToSide));
  add("i02_approach_then_cross",
      make_abstract(RoadType::Intersection, Weather::Cloudy, Lighting::Daylight,
                    {vehicle("V1", C::Northbound, {D::FollowLane, D::VehicleCross}),
                     vehicle("V2", C::Westbound, {D::VehicleCross})},
                    CrashType::FrontToSide));
  add("i03_stopped_at_signal",
      make_abstract(RoadType::Intersection, Weather::Rain, Lighting::Daylight,
                    {vehicle("V1", C::Northbound, {D::FollowLane}),
                     vehicle("V2", C::Northbound, {D::Stop})},
                    CrashType::RearEnd));
  add("i04_left_across_path",
      make_abstract(RoadType::Intersection, Weather::Clear, Lighting::Daylight,
                    {vehicle("V1", C::Northbound, {D::TurnLeft}),
                     vehicle("V2", C::Southbound, {D::VehicleCross})},
                    CrashType::FrontToSide));
  add("i05_right_turn_merge",
      make_abstract(RoadType::Intersection, Weather::Clear, Lighting::Dark,
                    {vehicle("V1", C::Northbound, {D::TurnRight}),
                     vehicle("V2", C::Eastbound, {D::VehicleCross})},
                    CrashType::RearEnd));
  add("i06_uturn_across",
      make_abstract(RoadType::Intersection, Weather::Cloudy, Lighting::Daylight,
                    {vehicle("V1", C::Northbound, {D::UTurn}),
                     vehicle("V2", C::Southbound, {D::VehicleCross})},
                    CrashType::FrontToSide));
  add("i07_wrong_way",
      make_abstract(RoadType::Intersection, Weather::Fog, Lighting::Daylight,
                    {vehicle("V1", C::Northbound, {D::Retrograde}),
                     vehicle("V2", C::Southbound, {D::VehicleCross, D::FollowLane})},
                    CrashType::Frontal));
  add("i08_crossing_pedestrian",
      make_abstract(RoadType::Intersection, Weather::Clear, Lighting::Daylight,
                    {vehicle("V1", C::Northbound, {D::FollowLane}),
                     walker("PED1", C::Eastbound, D::PedestrianCross)},
                    CrashType::FrontToSide));
  add("i09_offroad_walker",
      make_abstract(RoadType::Intersection, Weather::Clear, Lighting::DarkLighted,
                    {vehicle("V1", C::Eastbound, {D::DriveOffRoad}),
                     walker("PED1", C::Eastbound, D::PedestrianWalk)},
                    CrashType::RearEnd));
  add("i10_lane_change",
      make_abstract(RoadType::Intersection, Weather::Snow, Lighting::Daylight,
                    {vehicle("V1", C::Northbound, {D::ChangeLane}),
                     vehicle("V2", C::Northbound, {D::FollowLane}, 2)},
                    CrashType::RearEnd));
  add("i11_pullout",
      make_abstract(RoadType::Intersection, Weather::Clear, Lighting::Daylight,
                    {vehicle("V1", C::Northbound, {D::DriveIntoRoads}),
                     vehicle("V2", C::Northbound, {D::FollowLane})},
                    CrashType::RearEnd));
  add("i12_opposing_cross",
      make_abstract(RoadType::Intersection, Weather::Rain, Lighting::Dark,
                    {vehicle("V1", C::Northbound, {D::VehicleCross}),
                     vehicle("V2", C::Southbound, {D::VehicleCross})},
                    CrashType::Frontal));

  // Straight roads.
  add("s01_rear_end_stopped",
      make_abstract(RoadType::StraightRoad, Weather::Clear, Lighting::DarkLighted,
                    {vehicle("V1", C::Northbound, {D::FollowLane}),
                     vehicle("V2", C::Northbound, {D::Stop})},
                    CrashType::RearEnd));
  add("s02_rear_end_moving",
      make_abstract(RoadType::StraightRoad, Weather::Rain, Lighting::Daylight,
                    {vehicle("V1", C::Northbound, {D::FollowLane}),
                     vehicle("V2", C::Northbound, {D::FollowLane})},
                    CrashType::RearEnd));
  add("s03_head_on_wrong_way",
      make_abstract(RoadType::StraightRoad, Weather::Clear, Lighting::Dark,
                    {vehicle("V1", C::Northbound, {D::Retrograde}),
                     vehicle("V2", C::Southbound, {D::FollowLane})},
                    CrashType::Frontal));
  add("s04_uturn_blocked",
      make_abstract(RoadType::StraightRoad, Weather::Cloudy, Lighting::Daylight,
                    {vehicle("V1", C::Northbound, {D::UTurn}),
                     vehicle("V2", C::Southbound, {D::FollowLane})},
                    CrashType::FrontToSide));
  add("s05_lane_change",
      make_abstract(RoadType::StraightRoad, Weather::Clear, Lighting::Daylight,
                    {vehicle("V1", C::Northbound, {D::ChangeLane}),
                     vehicle("V2", C::Northbound, {D::FollowLane}, 2)},
                    CrashType::RearEnd));
  add("s06_midblock_pedestrian",
      make_abstract(RoadType::StraightRoad, Weather::Clear, Lighting::Dark,
                    {vehicle("V1", C::Northbound, {D::FollowLane}),
                     walker("PED1", C::Eastbound, D::PedestrianCross)},
                    CrashType::FrontToSide));
  add("s07_pullout",
      make_abstract(RoadType::StraightRoad, Weather::Cloudy, Lighting::Daylight,
                    {vehicle("V1", C::Northbound, {D::DriveIntoRoads}),
                     vehicle("V2", C::Northbound, {D::FollowLane})},
                    CrashType::RearEnd));
  add("s08_roadside_walker",
      make_abstract(RoadType::StraightRoad, Weather::Clear, Lighting::Daylight,
                    {vehicle("V1", C::Northbound, {D::DriveOffRoad}),
                     walker("PED1", C::Northbound, D::PedestrianWalk)},
                    CrashType::RearEnd));
  add("s09_slowing_victim",
      make_abstract(RoadType::StraightRoad, Weather::Fog, Lighting::Daylight,
                    {vehicle("V1", C::Northbound, {D::FollowLane}),
                     vehicle("V2", C::Northbound, {D::FollowLane, D::Stop})},
                    CrashType::RearEnd));
  add("s10_cut_in",
      make_abstract(RoadType::StraightRoad, Weather::Clear, Lighting::Daylight,
                    {vehicle("V1", C::Northbound, {D::FollowLane}, 2),
                     vehicle("V2", C::Northbound, {D::ChangeLane})},
                    CrashType::RearEnd));

  // T-junctions.
  add("t01_stopped_at_stem",
      make_abstract(RoadType::TJunction, Weather::Clear, Lighting::Daylight,
                    {vehicle("V1", C::Northbound, {D::FollowLane}),
                     vehicle("V2", C::Northbound, {D::Stop})},
                    CrashType::RearEnd));
  add("t02_head_on_through",
      make_abstract(RoadType::TJunction, Weather::Rain, Lighting::Daylight,
                    {vehicle("V1", C::Northbound, {D::VehicleCross}),
                     vehicle("V2", C::Southbound, {D::VehicleCross})},
                    CrashType::Frontal));
  add("t03_uturn_against_cross",
      make_abstract(RoadType::TJunction, Weather::Clear, Lighting::Daylight,
                    {vehicle("V1", C::Northbound, {D::UTurn}),
                     vehicle("V2", C::Southbound, {D::VehicleCross})},
                    CrashType::FrontToSide));
  add("t04_wrong_way_through",
      make_abstract(RoadType::TJunction, Weather::Clear, Lighting::Dark,
                    {vehicle("V1", C::Northbound, {D::Retrograde}),
                     vehicle("V2", C::Southbound, {D::VehicleCross, D::FollowLane})},
                    CrashType::Frontal));
  add("t05_crossing_pedestrian",
      make_abstract(RoadType::TJunction, Weather::Cloudy, Lighting::Daylight,
                    {vehicle("V1", C::Northbound, {D::FollowLane}),
                     walker("PED1", C::Eastbound, D::PedestrianCross)},
                    CrashType::FrontToSide));
  add("t06_lane_change",
      make_abstract(RoadType::TJunction, Weather::Clear, Lighting::Daylight,
                    {vehicle("V1", C::Northbound, {D::ChangeLane}),
                     vehicle("V2", C::Northbound, {D::FollowLane}, 2)},
                    CrashType::RearEnd));
  add("t07_pullout",
      make_abstract(RoadType::TJunction, Weather::Snow, Lighting::Daylight,
                    {vehicle("V1", C::Northbound, {D::DriveIntoRoads}),
                     vehicle("V2", C::Northbound, {D::FollowLane})},
                    CrashType::RearEnd));
  add("t08_right_into_stem",
      make_abstract(RoadType::TJunction, Weather::Clear, Lighting::Daylight,
                    {vehicle("V1", C::Northbound, {D::TurnRight}),
                     vehicle("V2", C::Southbound, {D::VehicleCross})},
                    CrashType::FrontToSide));
  add("t09_roadside_walker",
      make_abstract(RoadType::TJunction, Weather::Clear, Lighting::DarkLighted,
                    {vehicle("V1", C::Northbound, {D::DriveOffRoad}),
                     walker("PED1", C::Northbound, D::PedestrianWalk)},
                    CrashType::RearEnd));
  add("t10_turn_from_stem",
      make_abstract(RoadType::TJunction, Weather::Clear, Lighting::Daylight,
                    {vehicle("V1", C::Northbound, {D::TurnRight}),
                     vehicle("V2", C::Eastbound, {D::VehicleCross})},
                    CrashType::RearEnd));

  return out;
}

struct MapFixture {
  std::string name;
  RoadType type;
  double lane_width = 3.5;
  RoadNetwork network;
  bool srr_pool = true;  // counted toward the reconstruction-rate table
};

RoadNetwork one_site(RoadType type, const std::string& id, double width, double length,
                     double speed) {
  mapgen::SiteSpec spec;
  spec.id = id;
  spec.type = type;
  spec.lanes = 2;
  spec.lane_width = width;
  spec.leg_length = length;
  spec.speed_limit_mps = speed;
  return mapgen::single_site(spec);
}

std::vector<MapFixture> build_maps() {
  std::vector<MapFixture> out;
  auto add = [&out](const std::string& name, RoadType type, double width, double length,
                    double speed, bool pool) {
    std::string site =
        type == RoadType::Intersection ? "x1" : (type == RoadType::TJunction ? "tj1" : "str1");
    out.push_back({name, type, width, one_site(type, site, width, length, speed), pool});
  };
  add("intersection_w30", RoadType::Intersection, 3.0, 50.0, 13.4, true);
  add("intersection_w35", RoadType::Intersection, 3.5, 60.0, 13.4, true);
  add("intersection_w40", RoadType::Intersection, 4.0, 70.0, 13.4, true);
  add("intersection_w70", RoadType::Intersection, 7.0, 60.0, 13.4, false);
  add("straight_w30", RoadType::StraightRoad, 3.0, 80.0, 22.4, true);
  add("straight_w35", RoadType::StraightRoad, 3.5, 100.0, 22.4, true);
  add("straight_w40", RoadType::StraightRoad, 4.0, 120.0, 22.4, true);
  add("straight_w70", RoadType::StraightRoad, 7.0, 100.0, 22.4, false);
  add("tjunction_w30", RoadType::TJunction, 3.0, 50.0, 13.4, true);
  add("tjunction_w35", RoadType::TJunction, 3.5, 60.0, 13.4, true);
  add("tjunction_w40", RoadType::TJunction, 4.0, 70.0, 13.4, true);
  add("tjunction_w70", RoadType::TJunction, 7.0, 60.0, 13.4, false);
  return out;
}

struct ReportFixture {
  std::string name;
  std::string text;
  AccidentAbstract gold;
};

std::vector<ReportFixture> build_reports() {
  using D = DrivingAction;
  using C = CompassDirection;
  std::vector<ReportFixture> out;

  out.push_back(
      {"r01_cross_paths",
       "The crash occurred during daylight hours under a clear sky at a four-way "
       "intersection. Each approach has two lanes and the posted speed limit is 45 mph. "
       "V1 was traveling northbound in lane 1 and crossed the intersection. V2 was "
       "traveling westbound in lane 1 crossing the intersection. The front of V1 struck "
       "the side of V2.",
       make_abstract(RoadType::Intersection, Weather::Clear, Lighting::Daylight,
                     {vehicle("V1", C::Northbound, {D::VehicleCross}),
                      vehicle("V2", C::Westbound, {D::VehicleCross})},
                     CrashType::FrontToSide, 45.0, 2)});
  out.push_back(
      {"r02_rear_end",
       "V1 was traveling northbound in lane 1 on a two-lane roadway and was following "
       "the lane. V2 was traveling northbound in lane 1 ahead of V1 and was stopped in "
       "traffic. The front of V1 struck the rear of V2. The crash occurred at night on "
       "a road lit by street lights.",
       make_abstract(RoadType::StraightRoad, Weather::Clear, Lighting::DarkLighted,
                     {vehicle("V1", C::Northbound, {D::FollowLane}),
                      vehicle("V2", C::Northbound, {D::Stop})},
                     CrashType::RearEnd, std::nullopt, 2)});
  out.push_back(
      {"r03_pedestrian_turn",
       "V1 was traveling eastbound in lane 1 and turned right at the t-intersection. A "
       "pedestrian was walking southbound across the street. The front of V1 struck the "
       "side of the pedestrian. The crash occurred during daylight hours under a cloudy "
       "sky at a t-intersection with a posted speed limit of 30 mph.",
       make_abstract(RoadType::TJunction, Weather::Cloudy, Lighting::Daylight,
                     {vehicle("V1", C::Eastbound, {D::TurnRight}),
                      walker("PED1", C::Southbound, D::PedestrianCross)},
                     CrashType::FrontToSide, 30.0)});
  out.push_back(
      {"r04_intended_turn",
       "V1 was traveling southbound in lane 1 and intended to turn left at the "
       "intersection, but continued straight. V2 was traveling northbound in lane 1 and "
       "was stopped at the signal. The front of V1 struck the rear of V2.",
       make_abstract(RoadType::Intersection, Weather::Clear, Lighting::Daylight,
                     {vehicle("V1", C::Southbound, {D::FollowLane}),
                      vehicle("V2", C::Northbound, {D::Stop})},
                     CrashType::RearEnd)});
  out.push_back(
      {"r05_left_across_path",
       "The crash occurred during daylight hours under a clear sky at a four-way "
       "intersection with a posted speed limit of 30 mph. Each approach has two lanes. "
       "V1 was traveling northbound in lane 1 and turned left at the intersection. V2 "
       "was traveling southbound in lane 1 crossing the intersection. The front of V1 "
       "struck the side of V2.",
       make_abstract(RoadType::Intersection, Weather::Clear, Lighting::Daylight,
                     {vehicle("V1", C::Northbound, {D::TurnLeft}),
                      vehicle("V2", C::Southbound, {D::VehicleCross})},
                     CrashType::FrontToSide, 30.0, 2)});
  out.push_back(
      {"r06_wrong_way",
       "It was raining at night. V1 was traveling northbound in lane 1 the wrong way "
       "on the roadway. V2 was traveling southbound in lane 1 and was following the "
       "lane. V1 struck V2 head-on.",
       make_abstract(RoadType::StraightRoad, Weather::Rain, Lighting::Dark,
                     {vehicle("V1", C::Northbound, {D::Retrograde}),
                      vehicle("V2", C::Southbound, {D::FollowLane})},
                     CrashType::Frontal)});
  out.push_back(
      {"r07_uturn",
       "V1 was traveling northbound in lane 1 and made a u-turn at the intersection. "
       "V2 was traveling southbound in lane 1 crossing the intersection. The front of "
       "V1 struck the side of V2. The crash occurred during daylight hours under a "
       "cloudy sky at a four-way intersection.",
       make_abstract(RoadType::Intersection, Weather::Cloudy, Lighting::Daylight,
                     {vehicle("V1", C::Northbound, {D::UTurn}),
                      vehicle("V2", C::Southbound, {D::VehicleCross})},
                     CrashType::FrontToSide)});
  out.push_back(
      {"r08_lane_change",
       "V1 was traveling northbound in lane 1 on a two-lane highway and changed lanes "
       "to pass. V2 was traveling northbound in lane 2 and was following the lane. The "
       "front of V1 struck the rear of V2. The crash occurred during daylight hours "
       "and the sky was clear.",
       make_abstract(RoadType::StraightRoad, Weather::Clear, Lighting::Daylight,
                     {vehicle("V1", C::Northbound, {D::ChangeLane}),
                      vehicle("V2", C::Northbound, {D::FollowLane}, 2)},
                     CrashType::RearEnd, std::nullopt, 2)});
  out.push_back(
      {"r09_pullout",
       "V1 was traveling eastbound in lane 1 and was following the lane. V2 was "
       "traveling eastbound and entered the roadway in lane 1 ahead of V1. The front "
       "of V1 struck the rear of V2. The crash occurred during daylight hours under a "
       "clear sky.",
       make_abstract(RoadType::StraightRoad, Weather::Clear, Lighting::Daylight,
                     {vehicle("V1", C::Eastbound, {D::FollowLane}),
                      vehicle("V2", C::Eastbound, {D::DriveIntoRoads})},
                     CrashType::RearEnd)});
  out.push_back(
      {"r10_offroad_walker",
       "V1 was traveling northbound in lane 1 and drove off the road. A pedestrian "
       "was walking along the roadside northbound. The front of V1 struck the rear of "
       "the pedestrian. It was foggy during daylight hours.",
       make_abstract(RoadType::StraightRoad, Weather::Fog, Lighting::Daylight,
                     {vehicle("V1", C::Northbound, {D::DriveOffRoad}),
                      walker("PED1", C::Northbound, D::PedestrianWalk)},
                     CrashType::RearEnd)});
  return out;
}

void write_text(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write '" + path.string() + "'");
  f << content;
}

// Direction class of every road-to-road transition, the label the replay
// validator must keep stable when lane widths scale.
std::string turn_labels(const ReconstructedScenario& s, const RoadNetwork& net) {
  std::string out;
  for (const auto& p : s.participants) {
    for (const auto& a : p.actions) {
      if (!a.dest_road || *a.dest_road == a.source_road) continue;
      geom::Vec2 u = net.roads[static_cast<std::size_t>(a.source_road)].direction_vector();
      geom::Vec2 v = net.roads[static_cast<std::size_t>(*a.dest_road)].direction_vector();
      OrientationClass oc = orientation_class(u, v);
      std::string label = oc == OrientationClass::Same
                              ? "straight"
                              : (oc == OrientationClass::Opposing
                                     ? "reverse"
                                     : (geom::cross(u, v) > 0.0 ? "left" : "right"));
      out += p.id + ":" + to_string(a.geometry.action) + "->" + label + ";";
    }
  }
  return out;
}

struct CheckCell {
  bool planned = false;
  bool verified = false;
  bool sim_passed = false;
  std::string detail;
  std::string labels;
  double seconds = 0.0;

  bool ok() const { return planned && verified && sim_passed; }
};

CheckCell check_one(const AccidentAbstract& abstract, const RoadNetwork& network,
                    const SolverConfig& config) {
  CheckCell cell;
  auto start = std::chrono::steady_clock::now();
  try {
    PlanResult result = plan_scenario(abstract, network, config, 3);
    if (result.status == PlanStatus::Ok) {
      cell.planned = true;
      cell.verified = true;
      cell.sim_passed = true;
      for (const auto& scenario : result.scenarios) {
        VerifyReport report = verify_scenario(scenario, config);
        if (!report.ok()) {
          cell.verified = false;
          cell.detail = "re-verify: " + report.issues.front().label;
          break;
        }
        SimVerdict verdict = check_sim(scenario, network, config);
        if (!verdict.passed()) {
          cell.sim_passed = false;
          cell.detail = "sim: " + verdict.failures.front().check + " (" +
                        verdict.failures.front().detail + ")";
          break;
        }
        cell.labels += turn_labels(scenario, network);
      }
    } else {
      cell.detail = result.failures.empty()
                        ? "no scenario"
                        : result.failures.front().bucket + ": " + result.failures.front().detail;
    }
  } catch (const Error& e) {
    cell.detail = std::string(e.code()) + ": " + e.what();
  }
  cell.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return cell;
}

int run_check(const std::vector<CorpusEntry>& corpus, const std::vector<MapFixture>& maps,
              int jobs) {
  SolverConfig config;
  struct Job {
    const CorpusEntry* entry;
    const MapFixture* map;
    CheckCell cell;
  };
  std::vector<Job> table;
  for (const auto& entry : corpus) {
    for (const auto& map : maps) {
      if (map.type != entry.abstract.collision_location) continue;
      table.push_back({&entry, &map, {}});
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next.fetch_add(1); i < table.size(); i = next.fetch_add(1)) {
      table[i].cell = check_one(table[i].entry->abstract, table[i].map->network, config);
    }
  };
  std::vector<std::thread> pool;
  for (int i = 1; i < jobs; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::map<std::string, std::pair<int, int>> srr;  // road type -> {passed, total}
  double total_seconds = 0.0;
  for (const auto& job : table) {
    total_seconds += job.cell.seconds;
    std::printf("%-24s %-18s %s  (%.1fs)%s%s\n", job.entry->name.c_str(),
                job.map->name.c_str(), job.cell.ok() ? "ok  " : "FAIL", job.cell.seconds,
                job.cell.detail.empty() ? "" : "  ", job.cell.detail.c_str());
    if (job.map->srr_pool) {
      auto& bucket = srr[to_string(job.map->type)];
      bucket.second += 1;
      if (job.cell.ok()) bucket.first += 1;
    }
  }

  bool thresholds_ok = true;
  std::printf("\nreconstruction rate by road type:\n");
  for (const auto& [type, counts] : srr) {
    double rate = counts.second == 0 ? 0.0 : double(counts.first) / counts.second;
    double need = type == "t-junction" ? 0.70 : 0.90;
    bool ok = rate >= need;
    thresholds_ok = thresholds_ok && ok;
    std::printf("  %-14s %2d/%2d  %.3f  (need %.2f)  %s\n", type.c_str(), counts.first,
                counts.second, rate, need, ok ? "ok" : "FAIL");
  }

  // Width-doubling pairs: anything solvable at 3.5 m must stay solvable at
  // 7.0 m with the same transition labels.
  bool general_ok = true;
  std::printf("\nwidth-doubling pairs (w35 -> w70):\n");
  for (const auto& entry : corpus) {
    const Job* base = nullptr;
    const Job* wide = nullptr;
    for (const auto& job : table) {
      if (job.entry != &entry) continue;
      if (job.map->name.find("_w35") != std::string::npos) base = &job;
      if (job.map->name.find("_w70") != std::string::npos) wide = &job;
    }
    if (!base || !wide || !base->cell.ok()) continue;
    bool ok = wide->cell.ok() && wide->cell.labels == base->cell.labels;
    general_ok = general_ok && ok;
    std::printf("  %-24s %s%s\n", entry.name.c_str(), ok ? "ok" : "FAIL",
                ok ? "" : (wide->cell.ok() ? " (labels differ)" : " (w70 unsolvable)"));
  }

  std::printf("\ntotal solve time %.1fs across %zu plans\n", total_seconds, table.size());
  return (thresholds_ok && general_ok) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fixture corpus generator"};
  std::string out_dir = "fixtures";
  bool check = false;
  int jobs = static_cast<int>(std::thread::hardware_concurrency());
  if (jobs < 1) jobs = 1;
  app.add_option("--out", out_dir, "output directory (default: fixtures)");
  app.add_flag("--check", check, "plan every abstract on its road-type maps and report");
  app.add_option("--jobs", jobs, "worker threads for --check")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  try {
    const std::vector<CorpusEntry> corpus = build_corpus();
    const std::vector<MapFixture> maps = build_maps();
    const std::vector<ReportFixture> reports = build_reports();

    const fs::path root(out_dir);
    for (const auto& map : maps) {
      write_text(root / "maps" / (map.name + ".json"), serialize_map(map.network) + "\n");
    }
    write_text(root / "maps" / "grid12.json", serialize_map(mapgen::standard_grid()) + "\n");
    for (const auto& entry : corpus) {
      write_text(root / "abstracts" / (entry.name + ".json"),
                 serialize_abstract(entry.abstract) + "\n");
    }

    MockClient mock;
    int mismatches = 0;
    for (const auto& report : reports) {
      write_text(root / "reports" / report.name / "report.txt", report.text + "\n");
      write_text(root / "reports" / report.name / "gold.json",
                 serialize_abstract(report.gold) + "\n");
      AccidentAbstract got = extract_abstract(mock, report.text);
      if (!(got == report.gold)) {
        ++mismatches;
        std::fprintf(stderr, "mock extraction mismatch on %s:\n--- extracted ---\n%s\n--- gold ---\n%s\n",
                     report.name.c_str(), serialize_abstract(got).c_str(),
                     serialize_abstract(report.gold).c_str());
      }
    }
    std::printf("wrote %zu maps, %zu abstracts, %zu reports under %s\n", maps.size() + 1,
                corpus.size(), reports.size(), root.string().c_str());
    if (mismatches > 0) {
      std::fprintf(stderr, "%d report fixtures do not round-trip through the mock\n", mismatches);
      return 1;
    }

    if (check) return run_check(corpus, maps, jobs);
    return 0;
  } catch (const Error& e) {
    std::fprintf(stderr, "error [%s]: %s\n", e.code().c_str(), e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
