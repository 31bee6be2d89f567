// Acceptance gate: drives the bundled fixture corpus through the full
// pipeline and prints one pass/fail line per criterion. Exits non-zero when
// any criterion fails. Usage: acceptance [fixtures_dir]
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "crashsynth/abstract.hpp"
#include "crashsynth/constraint_builder.hpp"
#include "crashsynth/errors.hpp"
#include "crashsynth/extraction.hpp"
#include "crashsynth/pipeline.hpp"
#include "crashsynth/planner.hpp"
#include "crashsynth/road_map.hpp"
#include "crashsynth/solver.hpp"
#include "crashsynth/validation.hpp"
#include "crashsynth/verifier.hpp"

namespace fs = std::filesystem;
using namespace crashsynth;

namespace {

int g_failures = 0;

void report(int id, bool passed, const std::string& detail) {
  std::printf("[%s] criterion %d: %s\n", passed ? "PASS" : "FAIL", id, detail.c_str());
  if (!passed) ++g_failures;
}

std::vector<fs::path> sorted_json(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".json") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Direction class of every road-to-road transition; criterion 3 requires the
// labels to be identical across the width-doubling pair.
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

struct CorpusRun {
  std::string abstract_name;
  std::string map_name;
  RoadType type = RoadType::Intersection;
  bool srr_pool = true;  // width 3.0/3.5/4.0 maps; the w70 maps are pair-only
  bool planned = false;
  bool verified = false;
  bool sim_passed = false;
  std::string labels;
  double seconds = 0.0;
  std::vector<ReconstructedScenario> scenarios;

  bool ok() const { return planned && verified && sim_passed; }
};

// Shared corpus solve: every abstract against every same-type fixture map.
std::vector<CorpusRun> run_corpus(const fs::path& fixtures, const SolverConfig& config) {
  struct MapEntry {
    std::string name;
    RoadNetwork network;
    bool srr_pool;
  };
  std::vector<MapEntry> maps;
  for (const auto& path : sorted_json(fixtures / "maps")) {
    std::string name = path.stem().string();
    if (name == "grid12") continue;
    maps.push_back({name, parse_map_file(path.string()),
                    name.find("_w70") == std::string::npos});
  }
  std::vector<std::pair<std::string, AccidentAbstract>> abstracts;
  for (const auto& path : sorted_json(fixtures / "abstracts")) {
    abstracts.emplace_back(path.stem().string(), parse_abstract_file(path.string()));
  }

  auto type_of_map = [](const std::string& name) {
    if (name.rfind("intersection", 0) == 0) return RoadType::Intersection;
    if (name.rfind("tjunction", 0) == 0) return RoadType::TJunction;
    return RoadType::StraightRoad;
  };

  std::vector<CorpusRun> runs;
  std::vector<const RoadNetwork*> nets;
  for (const auto& [name, abstract] : abstracts) {
    for (const auto& map : maps) {
      if (type_of_map(map.name) != abstract.collision_location) continue;
      CorpusRun run;
      run.abstract_name = name;
      run.map_name = map.name;
      run.type = abstract.collision_location;
      run.srr_pool = map.srr_pool;
      runs.push_back(std::move(run));
      nets.push_back(&map.network);
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next.fetch_add(1); i < runs.size(); i = next.fetch_add(1)) {
      CorpusRun& run = runs[i];
      const AccidentAbstract* abstract = nullptr;
      for (const auto& [name, a] : abstracts) {
        if (name == run.abstract_name) abstract = &a;
      }
      auto start = std::chrono::steady_clock::now();
      try {
        PlanResult result = plan_scenario(*abstract, *nets[i], config, 3);
        if (result.status == PlanStatus::Ok) {
          run.planned = true;
          run.verified = true;
          run.sim_passed = true;
          for (const auto& s : result.scenarios) {
            if (!verify_scenario(s, config).ok()) run.verified = false;
            if (!check_sim(s, *nets[i], config).passed()) run.sim_passed = false;
            run.labels += turn_labels(s, *nets[i]);
          }
          run.scenarios = std::move(result.scenarios);
        }
      } catch (const Error&) {
      }
      run.seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
  };
  unsigned jobs = std::thread::hardware_concurrency();
  if (jobs < 1) jobs = 1;
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < jobs; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return runs;
}

void criterion_1(const std::vector<CorpusRun>& runs) {
  int scenarios = 0, verified = 0;
  int planned_abstracts = 0;
  double solve_seconds = 0.0;
  std::map<std::string, bool> seen_abstract;
  std::map<DrivingAction, bool> seen_action;
  std::map<RoadType, bool> seen_type;
  for (const auto& run : runs) {
    if (!run.srr_pool) continue;
    solve_seconds += run.seconds;
    seen_abstract[run.abstract_name] = true;
    seen_type[run.type] = true;
    if (run.planned) ++planned_abstracts;
    for (const auto& s : run.scenarios) {
      ++scenarios;
      if (verify_scenario(s, SolverConfig{}).ok()) ++verified;
      for (const auto& p : s.participants) {
        for (const auto& a : p.actions) seen_action[a.geometry.action] = true;
      }
    }
  }
  bool ok = seen_abstract.size() >= 30 && seen_type.size() == 3 && seen_action.size() >= 8 &&
            scenarios > 0 && verified == scenarios && solve_seconds <= 300.0;
  std::ostringstream d;
  d << "constraint fidelity: " << verified << "/" << scenarios
    << " scenarios re-verified over " << seen_abstract.size() << " abstracts, "
    << seen_type.size() << " road types, " << seen_action.size()
    << " actions, corpus solve " << std::fixed << std::setprecision(1) << solve_seconds << "s";
  report(1, ok, d.str());
}

void criterion_2(const std::vector<CorpusRun>& runs) {
  std::map<RoadType, std::pair<int, int>> srr;
  for (const auto& run : runs) {
    if (!run.srr_pool) continue;
    auto& bucket = srr[run.type];
    bucket.second += 1;
    if (run.ok()) bucket.first += 1;
  }
  bool ok = true;
  std::ostringstream d;
  d << "desk-scale SRR:";
  for (const auto& [type, counts] : srr) {
    double rate = counts.second == 0 ? 0.0 : double(counts.first) / counts.second;
    double need = type == RoadType::TJunction ? 0.70 : 0.90;
    ok = ok && rate >= need;
    d << " " << to_string(type) << " " << counts.first << "/" << counts.second << " ("
      << std::fixed << std::setprecision(3) << rate << " vs " << std::setprecision(2) << need
      << ")";
  }
  ok = ok && srr.size() == 3;
  report(2, ok, d.str());
}

void criterion_3(const std::vector<CorpusRun>& runs) {
  int pairs = 0, passed = 0;
  std::map<std::string, const CorpusRun*> base, wide;
  for (const auto& run : runs) {
    if (run.map_name.find("_w35") != std::string::npos) base[run.abstract_name] = &run;
    if (run.map_name.find("_w70") != std::string::npos) wide[run.abstract_name] = &run;
  }
  for (const auto& [name, b] : base) {
    if (!b->ok()) continue;  // unsolvable at width w: the pair is vacuous
    auto it = wide.find(name);
    if (it == wide.end()) continue;
    ++pairs;
    if (it->second->ok() && it->second->labels == b->labels) ++passed;
  }
  bool ok = pairs > 0 && passed == pairs;
  report(3, ok,
         "road generalization: " + std::to_string(passed) + "/" + std::to_string(pairs) +
             " width-doubling pairs solvable with identical turn direction classes");
}

// Micro displacement problem: one action, two waypoints, square start and end
// regions. Feasibility is decided independently by brute-force enumeration
// over placements, headings, speed and duration.
struct MicroCase {
  geom::Vec2 start_center;
  geom::Vec2 end_center;
  double half = 1.0;
  double speed_cap = 10.0;
  bool forward_x = false;
};

geom::Polygon square(geom::Vec2 c, double h) {
  return {{c.x - h, c.y - h}, {c.x + h, c.y - h}, {c.x + h, c.y + h}, {c.x - h, c.y + h}};
}

bool brute_force_feasible(const MicroCase& mc, const SolverConfig& cfg) {
  const int place = 5, headings = 24, speeds = 8, durations = 12;
  const double pi = 3.14159265358979;
  for (int ai = 0; ai < place; ++ai) {
    for (int aj = 0; aj < place; ++aj) {
      geom::Vec2 a{mc.start_center.x - mc.half + 2.0 * mc.half * ai / (place - 1),
                   mc.start_center.y - mc.half + 2.0 * mc.half * aj / (place - 1)};
      for (int bi = 0; bi < place; ++bi) {
        for (int bj = 0; bj < place; ++bj) {
          geom::Vec2 b{mc.end_center.x - mc.half + 2.0 * mc.half * bi / (place - 1),
                       mc.end_center.y - mc.half + 2.0 * mc.half * bj / (place - 1)};
          if (mc.forward_x && b.x - a.x <= 0.0) continue;
          geom::Vec2 d = b - a;
          for (int si = 1; si <= speeds; ++si) {
            double s = cfg.speed_min + (mc.speed_cap - cfg.speed_min) * si / speeds;
            for (int h1 = 0; h1 < headings; ++h1) {
              geom::Vec2 w1{s * std::cos(2 * pi * h1 / headings),
                            s * std::sin(2 * pi * h1 / headings)};
              for (int h2 = 0; h2 < headings; ++h2) {
                geom::Vec2 w2{s * std::cos(2 * pi * h2 / headings),
                              s * std::sin(2 * pi * h2 / headings)};
                geom::Vec2 mean = (w1 + w2) * 0.5;
                for (int ti = 0; ti <= durations; ++ti) {
                  double dt = cfg.dt_min + (cfg.dt_max - cfg.dt_min) * ti / durations;
                  geom::Vec2 reached = mean * dt;
                  if (std::abs(reached.x - d.x) < 0.75 && std::abs(reached.y - d.y) < 0.75) {
                    return true;
                  }
                }
              }
            }
          }
        }
      }
    }
  }
  return false;
}

bool solver_feasible(const MicroCase& mc, const SolverConfig& cfg) {
  ConstraintSet set("micro");
  ActionGeometry g;
  g.action = DrivingAction::FollowLane;
  g.participant = "P1";
  g.waypoints = 2;
  g.speed_limit = mc.speed_cap;
  g.apply_fd = mc.forward_x;
  g.axis_entrance = {0, 0};
  g.axis_exit = {1, 0};
  g.start_region = square(mc.start_center, mc.half);
  g.end_region = square(mc.end_center, mc.half);
  g.seed_path = {mc.start_center, mc.end_center};
  g.seed_speed = mc.speed_cap * 0.5;
  build_action_constraints(set, g, cfg);
  return solve(set, cfg).status == SolveStatus::Sat;
}

void criterion_4() {
  SolverConfig cfg;
  cfg.timeout_s = 10.0;
  std::vector<MicroCase> cases;
  for (double d : {2.0, 10.0, 30.0, 60.0, 90.0}) {
    cases.push_back({{0, 0}, {d, 0}, 1.0, 10.0, false});
  }
  cases.push_back({{0, 0}, {20.0, 15.0}, 1.0, 10.0, false});
  cases.push_back({{0, 0}, {-25.0, 10.0}, 1.0, 10.0, false});
  cases.push_back({{5, -3}, {-40.0, -40.0}, 1.0, 10.0, false});
  cases.push_back({{0, 0}, {130.0, 0}, 1.0, 10.0, false});
  cases.push_back({{0, 0}, {0, 150.0}, 1.0, 10.0, false});
  cases.push_back({{0, 0}, {110.0, 60.0}, 1.0, 10.0, false});
  cases.push_back({{0, 0}, {12.0, 0}, 1.0, 1.5, false});
  cases.push_back({{0, 0}, {25.0, 0}, 1.0, 1.5, false});
  cases.push_back({{0, 0}, {0, 14.0}, 1.0, 1.5, false});
  cases.push_back({{0, 0}, {-16.0, 0}, 1.0, 1.5, false});
  cases.push_back({{0, 0}, {30.0, 0}, 1.0, 10.0, true});
  cases.push_back({{0, 0}, {-30.0, 0}, 1.0, 10.0, true});
  cases.push_back({{0, 0}, {-8.0, 4.0}, 1.0, 10.0, true});
  cases.push_back({{0, 0}, {8.0, -4.0}, 1.0, 10.0, true});
  cases.push_back({{0, 0}, {0.5, 0}, 1.0, 10.0, false});
  cases.push_back({{3, 3}, {3, 3}, 1.0, 1.5, false});

  int agree = 0;
  for (const auto& mc : cases) {
    if (solver_feasible(mc, cfg) == brute_force_feasible(mc, cfg)) ++agree;
  }
  bool ok = cases.size() >= 20 && agree == static_cast<int>(cases.size());
  report(4, ok,
         "oracle equivalence: " + std::to_string(agree) + "/" + std::to_string(cases.size()) +
             " micro problems agree with brute-force enumeration");
}

void criterion_5(const std::vector<CorpusRun>& runs, const SolverConfig& config) {
  long cases = 0, violations = 0;
  auto equality = [&](double residual) {
    ++cases;
    if (std::abs(residual) > config.eps) ++violations;
  };
  for (const auto& run : runs) {
    for (const auto& s : run.scenarios) {
      double striker_time = 0.0;
      for (const auto& p : s.participants) {
        double total = 0.0;
        for (const auto& a : p.actions) {
          const auto& w = a.waypoints;
          // Displacement integral per segment: the chord equals the
          // trapezoidal velocity integral.
          for (std::size_t c = 0; c + 1 < w.size(); ++c) {
            equality(w[c + 1].x - w[c].x - 0.5 * (w[c].vx + w[c + 1].vx) * a.dt[c]);
            equality(w[c + 1].y - w[c].y - 0.5 * (w[c].vy + w[c + 1].vy) * a.dt[c]);
            total += a.dt[c];
          }
          // Constant speed across the action (terminal stop reaches zero).
          bool stops = a.geometry.action == DrivingAction::Stop;
          for (std::size_t i = 0; i < w.size(); ++i) {
            bool terminal = stops && i + 1 == w.size();
            equality(w[i].v - (terminal ? 0.0 : w.front().v));
          }
          // Curvature sign at every interior waypoint of signed turns.
          if (a.geometry.curvature_sign != 0) {
            for (std::size_t i = 0; i + 2 < w.size(); ++i) {
              geom::Vec2 c1{w[i + 1].x - w[i].x, w[i + 1].y - w[i].y};
              geom::Vec2 c2{w[i + 2].x - w[i + 1].x, w[i + 2].y - w[i + 1].y};
              ++cases;
              if (geom::cross(c1, c2) * a.geometry.curvature_sign <= 0.0) ++violations;
            }
          }
        }
        if (p.is_striker) striker_time = total;
      }
      for (const auto& p : s.participants) {
        if (p.is_striker) continue;
        std::vector<SimTick> replay = replay_plan(p, config.replay_dt);
        ++cases;
        if (std::abs(replay.back().t - striker_time) > config.simultaneity_tol_s) ++violations;
      }
    }
  }
  bool ok = cases >= 1000 && violations == 0;
  report(5, ok,
         "equation properties: " + std::to_string(violations) + " violations over " +
             std::to_string(cases) + " generated checks");
}

void criterion_6(const fs::path& fixtures) {
  MockClient mock;
  std::vector<AnnotatedReport> annotated;
  int total = 0, exact = 0;
  for (const auto& rep : load_report_dir((fixtures / "reports").string())) {
    if (!rep.gold) continue;
    ++total;
    AccidentAbstract got = extract_abstract(mock, rep.report_text);
    if (got == *rep.gold) ++exact;
    annotated.push_back({rep.report_text, *rep.gold});
  }

  // Accuracy reporter layout: three layers, ten attributes, in table order.
  std::vector<AccidentAbstract> golds, predictions;
  for (const auto& a : annotated) {
    golds.push_back(a.ground_truth);
    predictions.push_back(a.ground_truth);
  }
  std::vector<AttributeAccuracy> rows = evaluate_accuracy(predictions, golds);
  const std::vector<std::pair<std::string, std::string>> layout = {
      {"Environment", "Weather"},          {"Environment", "Lighting"},
      {"RoadNetwork", "CollisionLocation"}, {"RoadNetwork", "LaneNum"},
      {"RoadNetwork", "SpeedLimit"},        {"DynamicObjects", "ParticipantsNumber"},
      {"DynamicObjects", "CrashType"},      {"DynamicObjects", "DrivingDirections"},
      {"DynamicObjects", "RunningLanes"},   {"DynamicObjects", "DrivingActions"}};
  bool layout_ok = rows.size() == layout.size();
  bool perfect = true;
  for (std::size_t i = 0; layout_ok && i < rows.size(); ++i) {
    layout_ok = rows[i].layer == layout[i].first && rows[i].attribute == layout[i].second;
    perfect = perfect && rows[i].accuracy == 1.0;
  }

  // Hand-corrupted set: one wrong weather among four must score exactly 75%.
  std::vector<AccidentAbstract> g4(golds.begin(), golds.begin() + 4);
  std::vector<AccidentAbstract> p4 = g4;
  p4[0].weather = p4[0].weather == Weather::Rain ? Weather::Snow : Weather::Rain;
  std::vector<AttributeAccuracy> corrupted = evaluate_accuracy(p4, g4);
  bool corrupt_ok = corrupted.front().attribute == "Weather" &&
                    std::abs(corrupted.front().accuracy - 0.75) < 1e-12 &&
                    accuracy_csv(corrupted).find("Environment,Weather,75.00") != std::string::npos;

  bool ok = total >= 4 && exact == total && layout_ok && perfect && corrupt_ok;
  std::ostringstream d;
  d << "extraction harness: " << exact << "/" << total
    << " gold abstracts reproduced, table layout " << (layout_ok ? "ok" : "wrong")
    << ", corrupted set " << (corrupt_ok ? "scores 75.00" : "mis-scored");
  report(6, ok, d.str());
}

void criterion_7() {
  std::vector<ReportVerdicts> reports;
  for (int i = 0; i < 50; ++i) {
    reports.push_back({"r" + std::to_string(i), {i < 47}});
  }
  double srr = compute_srr(reports);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", srr * 100.0);
  bool ok = std::string(buf) == "94.000";

  // AND semantics: one mixed-verdict report counts zero.
  std::vector<ReportVerdicts> mixed = {{"a", {true, true}}, {"b", {true, false}}};
  ok = ok && compute_srr(mixed) == 0.5;
  report(7, ok, std::string("SRR metric: 47/50 -> ") + buf + "%, mixed verdict counts zero");
}

bool same_file_bytes(const fs::path& a, const fs::path& b) {
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  if (!fa || !fb) return false;
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  return sa.str() == sb.str();
}

void criterion_8(const fs::path& fixtures) {
  fs::path tmp = fs::temp_directory_path() / "crashsynth_acceptance";
  fs::remove_all(tmp);
  std::ostringstream sink;
  int files = 0;
  bool identical = true;
  bool ran = true;
  for (int round = 0; round < 2; ++round) {
    PipelineConfig cfg;
    cfg.map_path = (fixtures / "maps" / "intersection_w35.json").string();
    cfg.abstract_path = (fixtures / "abstracts").string();
    cfg.out_path = (tmp / ("plan" + std::to_string(round))).string();
    ran = ran && cmd_plan(cfg, sink) == 0;
    PipelineConfig tg;
    tg.scenario_path = cfg.out_path;
    tg.out_path = (tmp / ("tests" + std::to_string(round))).string();
    ran = ran && cmd_testgen(tg, sink) == 0;
    PipelineConfig val;
    val.map_path = cfg.map_path;
    val.scenario_path = cfg.out_path;
    val.out_path = (tmp / ("val" + std::to_string(round))).string();
    ran = ran && cmd_validate(val, sink) == 0;
  }
  for (const std::string dir : {"plan", "tests", "val"}) {
    for (const auto& e : fs::recursive_directory_iterator(tmp / (dir + "0"))) {
      if (!e.is_regular_file()) continue;
      ++files;
      fs::path twin = tmp / (dir + "1") / fs::relative(e.path(), tmp / (dir + "0"));
      identical = identical && same_file_bytes(e.path(), twin);
    }
  }
  bool ok = ran && files > 0 && identical;
  report(8, ok,
         "determinism: " + std::to_string(files) +
             " scenario/test-case/report files byte-identical across same-seed reruns");
}

void criterion_9() {
  SolverConfig config;
  NpcTrack npc;
  npc.id = "V2";
  npc.schedule = {{0.0, 20.0, 0.0, 8.0}, {4.0, -12.0, 0.0, 8.0}};

  Pose moving_start;
  moving_start.position = {0.0, 0.0};
  moving_start.heading_deg = 0.0;
  auto moving = constant_velocity_track(moving_start, {40.0, 0.0}, 5.0, 8.0, config.replay_dt);
  OracleOutcome hit = collision_oracle(moving, {npc}, config);

  Pose parked_start;
  parked_start.position = {10.0, 0.0};
  auto parked = constant_velocity_track(parked_start, {10.0, 0.0}, 0.0, 8.0, config.replay_dt);
  OracleOutcome passive = collision_oracle(parked, {npc}, config);

  // Just below the threshold the ego is "near zero" and never at fault.
  auto crawling = constant_velocity_track(moving_start, {40.0, 0.0}, 0.4, 8.0, config.replay_dt);
  OracleOutcome crawl = collision_oracle(crawling, {npc}, config);

  bool ok = hit.verdict == OracleVerdict::Collision &&
            passive.verdict == OracleVerdict::PassiveCollision &&
            crawl.verdict == OracleVerdict::PassiveCollision && config.oracle_v_min == 0.5;
  report(9, ok,
         "collision oracle: moving ego -> " + to_string(hit.verdict) + ", parked ego -> " +
             to_string(passive.verdict) + ", v_min 0.5");
}

}  // namespace

int main(int argc, char** argv) {
  fs::path fixtures = argc > 1 ? fs::path(argv[1]) : fs::path("fixtures");
  if (!fs::exists(fixtures / "abstracts")) {
    std::fprintf(stderr, "fixtures directory '%s' not found\n", fixtures.string().c_str());
    return 2;
  }
  try {
    SolverConfig config;
    std::vector<CorpusRun> runs = run_corpus(fixtures, config);
    criterion_1(runs);
    criterion_2(runs);
    criterion_3(runs);
    criterion_4();
    criterion_5(runs, config);
    criterion_6(fixtures);
    criterion_7();
    criterion_8(fixtures);
    criterion_9();
  } catch (const Error& e) {
    std::fprintf(stderr, "acceptance aborted [%s]: %s\n", e.code().c_str(), e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance aborted: %s\n", e.what());
    return 2;
  }
  return g_failures == 0 ? 0 : 1;
}
