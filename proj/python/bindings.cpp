// Python bindings: a thin JSON-string facade over the reconstruction
// pipeline. Every document crossing the boundary is serialized JSON so the
// Python side stays schema-identical to the CLI file formats.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "crashsynth/abstract.hpp"
#include "crashsynth/errors.hpp"
#include "crashsynth/extraction.hpp"
#include "crashsynth/planner.hpp"
#include "crashsynth/render.hpp"
#include "crashsynth/road_map.hpp"
#include "crashsynth/scenario.hpp"
#include "crashsynth/solver.hpp"
#include "crashsynth/validation.hpp"

namespace py = pybind11;
using namespace crashsynth;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string extract_report(const std::string& report_text, const std::string& mode) {
  if (mode == "mock") {
    MockClient client;
    return serialize_abstract(extract_abstract(client, report_text));
  }
  if (mode == "live") {
    HttpClient client;
    return serialize_abstract(extract_abstract(client, report_text));
  }
  throw SchemaError("unknown extraction mode '" + mode + "' (expected mock or live)");
}

std::vector<std::string> plan_scenarios(const std::string& map_json,
                                        const std::string& abstract_json, int max_scenarios,
                                        unsigned seed) {
  RoadNetwork network = parse_map(map_json);
  AccidentAbstract abstract = parse_abstract(abstract_json);
  SolverConfig config;
  config.seed = seed;
  PlanResult result = plan_scenario(abstract, network, config, max_scenarios);
  std::vector<std::string> out;
  for (const auto& s : result.scenarios) out.push_back(serialize_scenario(s));
  return out;
}

std::string validate_scenarios(const std::string& map_json,
                               const std::vector<std::string>& scenarios) {
  RoadNetwork network = parse_map(map_json);
  SolverConfig config;

  ordered_json doc;
  doc["scenarios"] = ordered_json::array();
  std::vector<std::string> report_order;
  std::map<std::string, ReportVerdicts> by_report;
  for (const auto& text : scenarios) {
    ReconstructedScenario scenario = parse_scenario(text);
    rebind_scenario(scenario, network, config);
    SimVerdict verdict = check_sim(scenario, network, config);

    ordered_json entry;
    entry["site_id"] = scenario.site_id;
    entry["passed"] = verdict.passed();
    entry["failures"] = ordered_json::array();
    for (const auto& f : verdict.failures) {
      entry["failures"].push_back({{"check", f.check},
                                   {"participant", f.participant},
                                   {"t", f.t},
                                   {"bucket", sim_failure_bucket(f)},
                                   {"detail", f.detail}});
    }
    doc["scenarios"].push_back(entry);

    const std::string key = abstract_identity(scenario.abstract);
    if (!by_report.count(key)) {
      by_report[key] = {key, {}};
      report_order.push_back(key);
    }
    by_report[key].scenario_passed.push_back(verdict.passed());
  }

  std::vector<ReportVerdicts> reports;
  for (const auto& key : report_order) reports.push_back(by_report[key]);
  double srr = reports.empty() ? 0.0 : compute_srr(reports);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", srr * 100.0);
  doc["reports"] = reports.size();
  doc["srr"] = srr;
  doc["srr_percent"] = buf;
  return doc.dump(2);
}

std::vector<std::string> generate_test_cases(const std::string& scenario_json) {
  ReconstructedScenario scenario = parse_scenario(scenario_json);
  SolverConfig config;
  std::vector<std::string> out;
  for (const auto& tc : generate_tests(scenario, config)) {
    out.push_back(serialize_test_case(tc));
  }
  return out;
}

std::string render_svg(const std::string& map_json, const std::string& scenario_json) {
  RoadNetwork network = parse_map(map_json);
  SolverConfig config;
  ReconstructedScenario scenario = parse_scenario(scenario_json);
  rebind_scenario(scenario, network, config);
  return render_scenario_svg(scenario, network);
}

double srr_of(const std::vector<std::vector<bool>>& verdicts) {
  std::vector<ReportVerdicts> reports;
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    reports.push_back({"r" + std::to_string(i), verdicts[i]});
  }
  return compute_srr(reports);
}

std::string accuracy_table(const std::vector<std::string>& predictions,
                           const std::vector<std::string>& golds) {
  std::vector<AccidentAbstract> p, g;
  for (const auto& text : predictions) p.push_back(parse_abstract(text));
  for (const auto& text : golds) g.push_back(parse_abstract(text));
  return accuracy_csv(evaluate_accuracy(p, g));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "crash scenario reconstruction pipeline (JSON-string API)";

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(PyExc_ValueError, (e.code() + ": " + e.what()).c_str());
    }
  });

  m.def("extract_report", &extract_report, py::arg("report_text"), py::arg("mode") = "mock",
        py::call_guard<py::gil_scoped_release>(),
        "Extract an accident abstract (JSON) from crash report text.");
  m.def("plan_scenarios", &plan_scenarios, py::arg("map_json"), py::arg("abstract_json"),
        py::arg("max_scenarios") = 3, py::arg("seed") = 42,
        py::call_guard<py::gil_scoped_release>(),
        "Plan concrete scenarios (JSON list) for an abstract on a map.");
  m.def("validate_scenarios", &validate_scenarios, py::arg("map_json"), py::arg("scenarios"),
        py::call_guard<py::gil_scoped_release>(),
        "Replay scenarios against a map; returns a verdict document (JSON).");
  m.def("generate_test_cases", &generate_test_cases, py::arg("scenario_json"),
        py::call_guard<py::gil_scoped_release>(),
        "Turn a scenario into one ADS test case (JSON) per vehicle.");
  m.def("render_svg", &render_svg, py::arg("map_json"), py::arg("scenario_json"),
        py::call_guard<py::gil_scoped_release>(), "Render a scenario to an SVG document.");
  m.def("compute_srr", &srr_of, py::arg("verdicts"),
        "Scenario reconstruction rate over per-report scenario verdict lists.");
  m.def("accuracy_table", &accuracy_table, py::arg("predictions"), py::arg("golds"),
        "Per-attribute accuracy CSV for predicted vs gold abstracts (JSON lists).");
}
