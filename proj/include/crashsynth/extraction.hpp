#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "crashsynth/abstract.hpp"

namespace crashsynth {

enum class PromptLayer { Environment, RoadNetwork, DynamicObjects };

// Table-grouping name ("Environment", "RoadNetwork", "DynamicObjects").
std::string to_string(PromptLayer layer);

// One linguistic prompt pattern: the attribute vocabulary of a layer plus the
// explanations, heuristic rules and worked examples that frame the request.
struct PromptPattern {
  PromptLayer layer = PromptLayer::Environment;
  // (attribute, explanation) in the order the prompt lists them.
  std::vector<std::pair<std::string, std::string>> attribute_definitions;
  std::vector<std::string> heuristic_rules;
  // (report excerpt, expected tagged answer); never empty.
  std::vector<std::pair<std::string, std::string>> few_shot_examples;
};

// Built-in immutable pattern for each layer.
const PromptPattern& prompt_pattern(PromptLayer layer);

// Text-completion transport. complete() maps one prompt to one response.
class ExtractionClient {
 public:
  virtual ~ExtractionClient() = default;
  virtual std::string complete(const std::string& prompt) = 0;
};

// Offline deterministic client: locates the report inside the prompt and
// answers from fixed keyword rules. Identical prompts yield identical output.
class MockClient : public ExtractionClient {
 public:
  std::string complete(const std::string& prompt) override;
};

// Live endpoint client. Reads CRASHSYNTH_LLM_ENDPOINT / CRASHSYNTH_LLM_KEY
// unless given explicitly; POSTs {"prompt": ...} and expects a JSON body with
// a "completion" string. Transport failures are retried 3 times with
// exponential backoff before ClientError.
class HttpClient : public ExtractionClient {
 public:
  HttpClient();
  HttpClient(std::string endpoint, std::string api_key);
  std::string complete(const std::string& prompt) override;

 private:
  std::string endpoint_;
  std::string api_key_;
};

struct AnnotatedReport {
  std::string report_text;
  AccidentAbstract ground_truth;
};

// One on-disk report, optionally annotated. `name` is the fixture directory
// entry, used to key output files.
struct FixtureReport {
  std::string name;
  std::string report_text;
  std::optional<AccidentAbstract> gold;
};

// Loads `<dir>/<name>/report.txt` (+ optional gold.json) pairs, sorted by
// name. Throws IoError when the directory or a report file is unreadable.
std::vector<FixtureReport> load_report_dir(const std::string& dir);

// Assembles the layer prompt: task statement, attribute explanations,
// heuristic rules, worked examples, then the report. Byte-deterministic.
// Throws EmptyReport when the report is blank.
std::string build_prompt(const PromptPattern& pattern, const std::string& report);

// Validated tag values for one layer. Scalar attributes carry one entry;
// per-participant attributes carry one entry per participant (possibly empty
// strings for participants the report leaves unstated). Attributes whose
// value failed vocabulary validation are absent, never guessed.
using LayerFields = std::map<std::string, std::vector<std::string>>;

// Prompts the client for one layer and parses the tagged response. A response
// with no recognizable tags triggers one corrective reprompt, then ParseError.
// Transport errors surface as ClientError.
LayerFields extract_layer(ExtractionClient& client, const PromptPattern& pattern,
                          const std::string& report);

// Runs the three layers in order, merges the fields into a draft, applies
// defaults and validates. Throws SemanticError when the merged record is
// inconsistent (e.g. participant count disagrees with the per-participant
// lists).
AccidentAbstract extract_abstract(ExtractionClient& client, const std::string& report);

struct AttributeAccuracy {
  std::string layer;
  std::string attribute;
  double accuracy = 0.0;  // fraction in [0, 1]
};

// Per-attribute exact-match accuracy over index-aligned prediction/gold
// pairs. Per-participant attributes average participant matches inside each
// report. Rows come back in the fixed layer grouping order.
std::vector<AttributeAccuracy> evaluate_accuracy(const std::vector<AccidentAbstract>& predictions,
                                                 const std::vector<AccidentAbstract>& gold);

// Renders the accuracy table as CSV (`layer,attribute,accuracy_percent`),
// keeping the layer grouping order.
std::string accuracy_csv(const std::vector<AttributeAccuracy>& rows);

}  // namespace crashsynth
