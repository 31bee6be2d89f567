#include "crashsynth/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "crashsynth/errors.hpp"
#include "crashsynth/extraction.hpp"
#include "crashsynth/planner.hpp"
#include "crashsynth/render.hpp"
#include "crashsynth/scenario.hpp"
#include "crashsynth/validation.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace crashsynth {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size()) throw SchemaError("config key '" + key + "' needs a number");
  return out;
}

int to_int(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  int out = 0;
  try {
    out = std::stoi(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size()) throw SchemaError("config key '" + key + "' needs an integer");
  return out;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw SchemaError("config key '" + key + "' needs true or false");
}

// Runs fn(i) for i in [0, n) over `jobs` worker threads. Exceptions are
// rethrown on the calling thread after all workers join.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < n; i = next++) fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Input files for a path that may be one document or a directory of them.
std::vector<fs::path> collect_json_inputs(const std::string& path, const std::string& what,
                                          const std::string& name_filter = "") {
  if (path.empty()) throw IoError("no " + what + " path given");
  if (fs::is_regular_file(path)) return {fs::path(path)};
  if (!fs::is_directory(path)) throw IoError(what + " path '" + path + "' does not exist");
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(path)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (entry.path().extension() != ".json") continue;
    if (!name_filter.empty() && name.find(name_filter) == std::string::npos) continue;
    out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void ensure_out_dir(const std::string& out) {
  if (out.empty()) throw IoError("no output path given");
  fs::create_directories(out);
}

std::string stem_of(const fs::path& p) {
  std::string stem = p.stem().string();
  // "case.scenario_0" -> "case.scenario_0" is fine as a stem; abstract files
  // keep their plain stem.
  return stem;
}

std::string percent3(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", fraction * 100.0);
  return buf;
}

int map_error_exit(const Error& e, std::ostream& log) {
  log << "error: " << e.what() << "\n";
  if (e.code() == "IoError" || e.code() == "SchemaError" || e.code() == "SemanticError" ||
      e.code() == "UnknownAction") {
    return kExitInputError;
  }
  if (e.code() == "NoCandidateSite" || e.code() == "AllSitesInfeasible" ||
      e.code() == "EmptyInput") {
    return kExitNoResult;
  }
  return kExitInternalError;
}

}  // namespace

void apply_config_override(PipelineConfig& config, const std::string& key,
                           const std::string& value) {
  if (key == "map") {
    config.map_path = value;
  } else if (key == "abstract" || key == "abstracts") {
    config.abstract_path = value;
  } else if (key == "reports") {
    config.reports_path = value;
  } else if (key == "scenario" || key == "scenarios") {
    config.scenario_path = value;
  } else if (key == "out") {
    config.out_path = value;
  } else if (key == "mode") {
    if (value != "mock" && value != "live")
      throw SchemaError("mode must be 'mock' or 'live', got '" + value + "'");
    config.mode = value;
  } else if (key == "jobs") {
    config.jobs = to_int(key, value);
    if (config.jobs < 1) throw SchemaError("jobs must be >= 1");
  } else if (key == "max_scenarios") {
    config.max_scenarios = to_int(key, value);
    if (config.max_scenarios < 1) throw SchemaError("max_scenarios must be >= 1");
  } else if (key == "deterministic") {
    config.deterministic = to_bool(key, value);
  } else if (key == "seed" || key == "solver.seed") {
    config.solver.seed = static_cast<std::uint64_t>(to_int(key, value));
  } else if (key == "solver.timeout_s") {
    config.solver.timeout_s = to_double(key, value);
  } else if (key == "solver.dt_min") {
    config.solver.dt_min = to_double(key, value);
  } else if (key == "solver.dt_max") {
    config.solver.dt_max = to_double(key, value);
  } else if (key == "solver.waypoints_default") {
    config.solver.waypoints_default = to_int(key, value);
  } else if (key == "solver.waypoints_follow_lane") {
    config.solver.waypoints_follow_lane = to_int(key, value);
  } else if (key == "solver.max_restarts") {
    config.solver.max_restarts = to_int(key, value);
  } else if (key == "solver.max_iterations") {
    config.solver.max_iterations = to_int(key, value);
  } else if (key == "solver.eps") {
    config.solver.eps = to_double(key, value);
  } else if (key == "solver.ineq_margin") {
    config.solver.ineq_margin = to_double(key, value);
  } else if (key == "solver.replay_dt") {
    config.solver.replay_dt = to_double(key, value);
  } else if (key == "solver.simultaneity_tol_s") {
    config.solver.simultaneity_tol_s = to_double(key, value);
  } else if (key == "solver.oracle_v_min") {
    config.solver.oracle_v_min = to_double(key, value);
  } else if (key == "solver.vehicle_length") {
    config.solver.vehicle_length = to_double(key, value);
  } else if (key == "solver.vehicle_width") {
    config.solver.vehicle_width = to_double(key, value);
  } else if (key == "solver.pedestrian_speed_max") {
    config.solver.pedestrian_speed_max = to_double(key, value);
  } else if (key == "solver.min_collision_area") {
    config.solver.min_collision_area = to_double(key, value);
  } else if (key == "solver.speed_min") {
    config.solver.speed_min = to_double(key, value);
  } else if (key == "solver.speed_cap") {
    config.solver.speed_cap = to_double(key, value);
  } else if (key == "solver.target_margin") {
    config.solver.target_margin = to_double(key, value);
  } else if (key == "solver.equality_accept") {
    config.solver.equality_accept = to_double(key, value);
  } else {
    throw SchemaError("unknown config key '" + key + "'");
  }
}

PipelineConfig parse_pipeline_config(const std::string& text) {
  PipelineConfig config;
  std::string section;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw SchemaError("config line " + std::to_string(line_no) + ": unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw SchemaError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    apply_config_override(config, section.empty() ? key : section + "." + key, value);
  }
  return config;
}

PipelineConfig load_config_file(const std::string& path) {
  return parse_pipeline_config(read_file(path));
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    out << content;
    if (!out.flush()) throw IoError("short write to '" + tmp.string() + "'");
  }
  fs::rename(tmp, target);
}

int cmd_extract(const PipelineConfig& config, std::ostream& log) {
  try {
    std::vector<FixtureReport> reports = load_report_dir(config.reports_path);
    if (reports.empty()) {
      log << "no report fixtures under '" << config.reports_path << "'\n";
      return kExitNoResult;
    }
    ensure_out_dir(config.out_path);

    std::vector<AccidentAbstract> abstracts(reports.size());
    parallel_for(reports.size(), config.jobs, [&](std::size_t i) {
      if (config.mode == "live") {
        HttpClient client;
        abstracts[i] = extract_abstract(client, reports[i].report_text);
      } else {
        MockClient client;
        abstracts[i] = extract_abstract(client, reports[i].report_text);
      }
    });

    for (std::size_t i = 0; i < reports.size(); ++i) {
      const fs::path out = fs::path(config.out_path) / (reports[i].name + ".abstract.json");
      write_file_atomic(out.string(), serialize_abstract(abstracts[i]) + "\n");
      log << "extracted " << out.string() << "\n";
    }

    std::vector<AccidentAbstract> predictions;
    std::vector<AccidentAbstract> gold;
    for (std::size_t i = 0; i < reports.size(); ++i) {
      if (!reports[i].gold) continue;
      predictions.push_back(abstracts[i]);
      gold.push_back(*reports[i].gold);
    }
    if (!gold.empty()) {
      const std::string csv = accuracy_csv(evaluate_accuracy(predictions, gold));
      const fs::path out = fs::path(config.out_path) / "accuracy.csv";
      write_file_atomic(out.string(), csv);
      log << "accuracy table over " << gold.size() << " annotated reports -> " << out.string()
          << "\n"
          << csv;
    }
    return kExitOk;
  } catch (const Error& e) {
    return map_error_exit(e, log);
  }
}

namespace {

struct PlanEntry {
  std::string name;
  PlanResult result;
  std::optional<std::string> error_code;
  std::string error_detail;
};

}  // namespace

int cmd_plan(const PipelineConfig& config, std::ostream& log) {
  try {
    const RoadNetwork network = parse_map_file(config.map_path);
    const std::vector<fs::path> inputs = collect_json_inputs(config.abstract_path, "abstract");
    if (inputs.empty()) {
      log << "no abstract documents under '" << config.abstract_path << "'\n";
      return kExitNoResult;
    }
    ensure_out_dir(config.out_path);

    std::vector<PlanEntry> entries(inputs.size());
    std::vector<AccidentAbstract> abstracts(inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      entries[i].name = stem_of(inputs[i]);
      abstracts[i] = parse_abstract_file(inputs[i].string());
    }

    parallel_for(inputs.size(), config.jobs, [&](std::size_t i) {
      try {
        entries[i].result =
            plan_scenario(abstracts[i], network, config.solver, config.max_scenarios);
      } catch (const Error& e) {
        entries[i].error_code = e.code();
        entries[i].error_detail = e.what();
      }
    });

    ordered_json report;
    report["map"] = config.map_path;
    report["abstracts"] = ordered_json::array();
    std::size_t total_scenarios = 0;
    std::map<std::string, int> bucket_totals = {
        {"trajectory-planning failure", 0}, {"crash-type mismatch", 0}, {"crossing", 0}};

    for (std::size_t i = 0; i < entries.size(); ++i) {
      PlanEntry& entry = entries[i];
      ordered_json ej;
      ej["abstract"] = entry.name;
      ordered_json files = ordered_json::array();
      ordered_json failures = ordered_json::array();

      if (entry.error_code) {
        ej["status"] = "infeasible";
        ordered_json fj;
        fj["site_id"] = "";
        fj["code"] = *entry.error_code;
        fj["bucket"] = "trajectory-planning failure";
        fj["detail"] = entry.error_detail;
        failures.push_back(fj);
        bucket_totals["trajectory-planning failure"] += 1;
      } else {
        const PlanResult& result = entry.result;
        ej["status"] = result.status == PlanStatus::Ok ? "ok" : "infeasible";
        for (std::size_t k = 0; k < result.scenarios.size(); ++k) {
          const std::string file = entry.name + ".scenario_" + std::to_string(k) + ".json";
          write_file_atomic((fs::path(config.out_path) / file).string(),
                            serialize_scenario(result.scenarios[k]));
          files.push_back(file);
          ++total_scenarios;
        }
        for (const SiteFailure& f : result.failures) {
          ordered_json fj;
          fj["site_id"] = f.site_id;
          fj["code"] = f.code;
          fj["bucket"] = f.bucket;
          fj["detail"] = f.detail;
          failures.push_back(fj);
          bucket_totals[f.bucket] += 1;
        }
      }
      ej["scenarios"] = files;
      ej["failures"] = failures;
      report["abstracts"].push_back(ej);
      log << "plan " << entry.name << ": " << ej["status"].get<std::string>() << ", "
          << files.size() << " scenario(s)\n";
    }

    report["total_scenarios"] = total_scenarios;
    report["failure_buckets"] = bucket_totals;
    write_file_atomic((fs::path(config.out_path) / "plan_report.json").string(),
                      report.dump(2) + "\n");
    return total_scenarios > 0 ? kExitOk : kExitNoResult;
  } catch (const Error& e) {
    return map_error_exit(e, log);
  }
}

int cmd_validate(const PipelineConfig& config, std::ostream& log) {
  try {
    const RoadNetwork network = parse_map_file(config.map_path);
    const std::vector<fs::path> inputs =
        collect_json_inputs(config.scenario_path, "scenario", ".scenario_");
    if (inputs.empty()) {
      log << "no scenario documents under '" << config.scenario_path << "'\n";
      return kExitNoResult;
    }
    ensure_out_dir(config.out_path);

    struct Row {
      std::string file;
      std::string report_key;
      RoadType road_type = RoadType::Intersection;
      SimVerdict verdict;
    };
    std::vector<Row> rows(inputs.size());
    parallel_for(inputs.size(), config.jobs, [&](std::size_t i) {
      ReconstructedScenario s = parse_scenario_file(inputs[i].string());
      rebind_scenario(s, network, config.solver);
      rows[i].file = inputs[i].filename().string();
      rows[i].report_key = abstract_identity(s.abstract);
      rows[i].road_type = s.abstract.collision_location;
      rows[i].verdict = check_sim(s, network, config.solver);
    });

    // Group scenario verdicts by source report, keeping first-seen order.
    std::vector<ReportVerdicts> reports;
    std::vector<RoadType> report_types;
    std::map<std::string, std::size_t> index;
    for (const Row& row : rows) {
      auto it = index.find(row.report_key);
      if (it == index.end()) {
        index.emplace(row.report_key, reports.size());
        reports.push_back({row.report_key, {}});
        report_types.push_back(row.road_type);
        it = index.find(row.report_key);
      }
      reports[it->second].scenario_passed.push_back(row.verdict.passed());
    }

    ordered_json doc;
    doc["scenarios"] = ordered_json::array();
    for (const Row& row : rows) {
      ordered_json sj;
      sj["file"] = row.file;
      sj["passed"] = row.verdict.passed();
      ordered_json fails = ordered_json::array();
      for (const SimFailure& f : row.verdict.failures) {
        ordered_json fj;
        fj["check"] = f.check;
        fj["participant"] = f.participant;
        fj["t"] = f.t;
        fj["bucket"] = sim_failure_bucket(f);
        fj["detail"] = f.detail;
        fails.push_back(fj);
      }
      sj["failures"] = fails;
      doc["scenarios"].push_back(sj);
    }

    const double overall = compute_srr(reports);
    int reconstructed = 0;
    for (const ReportVerdicts& r : reports) {
      bool ok = !r.scenario_passed.empty();
      for (bool b : r.scenario_passed) ok = ok && b;
      if (ok) ++reconstructed;
    }
    doc["overall"]["reports"] = reports.size();
    doc["overall"]["reconstructed"] = reconstructed;
    doc["overall"]["srr"] = overall;
    doc["overall"]["srr_percent"] = percent3(overall);

    log << "road type        reports  reconstructed  srr\n";
    doc["per_road_type"] = ordered_json::array();
    for (RoadType type :
         {RoadType::Intersection, RoadType::TJunction, RoadType::StraightRoad}) {
      std::vector<ReportVerdicts> subset;
      for (std::size_t i = 0; i < reports.size(); ++i) {
        if (report_types[i] == type) subset.push_back(reports[i]);
      }
      int sub_ok = 0;
      for (const ReportVerdicts& r : subset) {
        bool ok = !r.scenario_passed.empty();
        for (bool b : r.scenario_passed) ok = ok && b;
        if (ok) ++sub_ok;
      }
      ordered_json tj;
      tj["road_type"] = to_string(type);
      tj["reports"] = subset.size();
      tj["reconstructed"] = sub_ok;
      tj["srr_percent"] = subset.empty() ? "n/a" : percent3(compute_srr(subset));
      doc["per_road_type"].push_back(tj);
      log << to_string(type) << "  " << subset.size() << "  " << sub_ok << "  "
          << tj["srr_percent"].get<std::string>() << "\n";
    }
    log << "overall SRR " << percent3(overall) << "% over " << reports.size() << " report(s)\n";

    write_file_atomic((fs::path(config.out_path) / "srr_report.json").string(),
                      doc.dump(2) + "\n");
    return kExitOk;
  } catch (const Error& e) {
    return map_error_exit(e, log);
  }
}

int cmd_testgen(const PipelineConfig& config, std::ostream& log) {
  try {
    const std::vector<fs::path> inputs =
        collect_json_inputs(config.scenario_path, "scenario", ".scenario_");
    if (inputs.empty()) {
      log << "no scenario documents under '" << config.scenario_path << "'\n";
      return kExitNoResult;
    }
    ensure_out_dir(config.out_path);

    std::size_t written = 0;
    for (const fs::path& input : inputs) {
      const ReconstructedScenario s = parse_scenario_file(input.string());
      for (const TestCase& tc : generate_tests(s, config.solver)) {
        const std::string file = stem_of(input) + ".test_" + tc.ego_id + ".json";
        write_file_atomic((fs::path(config.out_path) / file).string(), serialize_test_case(tc));
        log << "testgen " << file << "\n";
        ++written;
      }
    }
    return written > 0 ? kExitOk : kExitNoResult;
  } catch (const Error& e) {
    return map_error_exit(e, log);
  }
}

int cmd_render(const PipelineConfig& config, std::ostream& log) {
  try {
    const RoadNetwork network = parse_map_file(config.map_path);
    if (config.scenario_path.empty() || !fs::is_regular_file(config.scenario_path))
      throw IoError("scenario file '" + config.scenario_path + "' does not exist");
    ReconstructedScenario s = parse_scenario_file(config.scenario_path);
    rebind_scenario(s, network, config.solver);
    const std::string svg = render_scenario_svg(s, network);

    fs::path out(config.out_path);
    if (out.empty()) throw IoError("no output path given");
    if (out.extension() != ".svg") {
      fs::create_directories(out);
      out /= fs::path(config.scenario_path).stem().string() + ".svg";
    }
    write_file_atomic(out.string(), svg);
    log << "rendered " << out.string() << "\n";
    return kExitOk;
  } catch (const Error& e) {
    return map_error_exit(e, log);
  }
}

}  // namespace crashsynth
