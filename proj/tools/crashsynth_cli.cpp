#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "crashsynth/errors.hpp"
#include "crashsynth/pipeline.hpp"

using namespace crashsynth;

namespace {

struct CliState {
  std::optional<std::string> config_file;
  std::optional<std::string> map;
  std::optional<std::string> abstract_path;
  std::optional<std::string> reports;
  std::optional<std::string> scenario;
  std::optional<std::string> out;
  std::optional<std::string> mode;
  std::optional<int> seed;
  std::optional<int> jobs;
  std::optional<int> max_scenarios;
  bool deterministic = false;
};

// File config first, CLI flags override.
PipelineConfig resolve(const CliState& s) {
  PipelineConfig config;
  if (s.config_file) config = load_config_file(*s.config_file);
  if (s.map) apply_config_override(config, "map", *s.map);
  if (s.abstract_path) apply_config_override(config, "abstract", *s.abstract_path);
  if (s.reports) apply_config_override(config, "reports", *s.reports);
  if (s.scenario) apply_config_override(config, "scenario", *s.scenario);
  if (s.out) apply_config_override(config, "out", *s.out);
  if (s.mode) apply_config_override(config, "mode", *s.mode);
  if (s.seed) apply_config_override(config, "seed", std::to_string(*s.seed));
  if (s.jobs) apply_config_override(config, "jobs", std::to_string(*s.jobs));
  if (s.max_scenarios)
    apply_config_override(config, "max_scenarios", std::to_string(*s.max_scenarios));
  if (s.deterministic) apply_config_override(config, "deterministic", "true");
  return config;
}

void add_common(CLI::App* cmd, CliState& s) {
  cmd->add_option("--config", s.config_file, "TOML-style config file; flags override it");
  cmd->add_option("--out", s.out, "output directory (or file where noted)");
  cmd->add_option("--seed", s.seed, "solver seed");
  cmd->add_option("--jobs", s.jobs, "parallel workers for batch inputs");
  cmd->add_flag("--deterministic", s.deterministic, "pin the seeded deterministic path");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"crash scenario reconstruction pipeline"};
  app.require_subcommand(1);

  CliState s;

  CLI::App* extract = app.add_subcommand("extract", "reports -> accident abstracts");
  extract->add_option("--reports", s.reports, "directory of <name>/report.txt fixtures");
  extract->add_option("--mode", s.mode, "extraction client: mock | live");
  add_common(extract, s);

  CLI::App* plan = app.add_subcommand("plan", "abstract(s) + map -> scenarios");
  plan->add_option("--abstract", s.abstract_path, "abstract JSON file or directory");
  plan->add_option("--map", s.map, "road network JSON file");
  plan->add_option("--max-scenarios", s.max_scenarios, "scenarios kept per abstract");
  add_common(plan, s);

  CLI::App* validate = app.add_subcommand("validate", "scenarios + map -> SRR report");
  validate->add_option("--scenarios", s.scenario, "scenario JSON file or directory");
  validate->add_option("--map", s.map, "road network JSON file");
  add_common(validate, s);

  CLI::App* testgen = app.add_subcommand("testgen", "scenarios -> ADS test cases");
  testgen->add_option("--scenarios", s.scenario, "scenario JSON file or directory");
  add_common(testgen, s);

  CLI::App* render = app.add_subcommand("render", "scenario + map -> SVG");
  render->add_option("--scenario", s.scenario, "scenario JSON file");
  render->add_option("--map", s.map, "road network JSON file");
  add_common(render, s);

  CLI11_PARSE(app, argc, argv);

  try {
    const PipelineConfig config = resolve(s);
    if (extract->parsed()) return cmd_extract(config, std::cout);
    if (plan->parsed()) return cmd_plan(config, std::cout);
    if (validate->parsed()) return cmd_validate(config, std::cout);
    if (testgen->parsed()) return cmd_testgen(config, std::cout);
    if (render->parsed()) return cmd_render(config, std::cout);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return (e.code() == "SchemaError" || e.code() == "IoError") ? kExitInputError
                                                                : kExitInternalError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternalError;
  }
  return kExitInternalError;
}
