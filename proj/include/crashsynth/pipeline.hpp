#pragma once

#include <iosfwd>
#include <string>

#include "crashsynth/solver.hpp"

namespace crashsynth {

// Exit-code contract shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitNoResult = 3;
inline constexpr int kExitInternalError = 4;

struct PipelineConfig {
  std::string map_path;
  std::string abstract_path;  // file or directory of abstract JSON documents
  std::string reports_path;   // directory of <name>/report.txt fixtures
  std::string scenario_path;  // file or directory of scenario JSON documents
  std::string out_path;
  SolverConfig solver;
  bool deterministic = false;
  int jobs = 1;
  int max_scenarios = 3;
  std::string mode = "mock";  // mock | live
};

// Flat TOML-style document: `key = value` lines, optional [solver] section,
// '#' comments. Unknown keys or unparseable values throw SchemaError.
PipelineConfig parse_pipeline_config(const std::string& text);
PipelineConfig load_config_file(const std::string& path);

// Applies one override; `key` may carry a section prefix ("solver.seed").
void apply_config_override(PipelineConfig& config, const std::string& key,
                           const std::string& value);

// Writes via a temp file in the same directory, then renames into place.
void write_file_atomic(const std::string& path, const std::string& content);

// Subcommand bodies; the CLI wraps them 1:1. Each validates its inputs,
// writes outputs under config.out_path and returns an exit code. Progress
// and tables go to `log`.
int cmd_extract(const PipelineConfig& config, std::ostream& log);
int cmd_plan(const PipelineConfig& config, std::ostream& log);
int cmd_validate(const PipelineConfig& config, std::ostream& log);
int cmd_testgen(const PipelineConfig& config, std::ostream& log);
int cmd_render(const PipelineConfig& config, std::ostream& log);

}  // namespace crashsynth
