#include "crashsynth/extraction.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "crashsynth/errors.hpp"

namespace crashsynth {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string lower(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  // Trailing separators do not announce extra participants.
  while (!out.empty() && out.back().empty()) out.pop_back();
  return out;
}

bool parse_int(const std::string& s, int& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  for (char c : t) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  try {
    out = std::stoi(t);
  } catch (const std::exception&) {
    return false;
  }
  return true;
}

bool parse_number(const std::string& s, double& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  std::size_t used = 0;
  try {
    out = std::stod(t, &used);
  } catch (const std::exception&) {
    return false;
  }
  return used == t.size();
}

const std::string kAnswerFormatRule =
    "Answer with exactly one <Attribute></Attribute> tag pair per attribute and "
    "leave the value empty when the report does not state it.";

PromptPattern make_environment_pattern() {
  PromptPattern p;
  p.layer = PromptLayer::Environment;
  p.attribute_definitions = {
      {"Weather",
       "it means the weather conditions when the accident happened. Answer one of: "
       "clear, cloudy, rain, snow, fog."},
      {"Lighting",
       "it means the light conditions on the road when the accident happened. Answer "
       "one of: daylight, dark, dark-lighted."},
  };
  p.heuristic_rules = {
      "If it's rainy when the accident happened, \"rain\" should be added into the "
      "<Weather>.",
      "If the crash happened at night on a road lit by street lights, the <Lighting> "
      "is \"dark-lighted\".",
      kAnswerFormatRule,
  };
  p.few_shot_examples = {
      {"It was raining and the roadway was dark with no street lighting when the "
       "crash occurred.",
       "<Weather>rain</Weather>\n<Lighting>dark</Lighting>"},
      {"The crash occurred during daylight hours under a clear sky.",
       "<Weather>clear</Weather>\n<Lighting>daylight</Lighting>"},
  };
  return p;
}

PromptPattern make_road_pattern() {
  PromptPattern p;
  p.layer = PromptLayer::RoadNetwork;
  p.attribute_definitions = {
      {"CollisionLocation",
       "it means the type of road on which the accident occurred. Answer one of: "
       "intersection, t-junction, straight road."},
      {"LaneNum",
       "it means the number of lanes on the road where the accident occurred. Answer "
       "a positive integer."},
      {"SpeedLimit",
       "it means the posted speed limit of the road in miles per hour. Answer a "
       "number without the unit."},
  };
  p.heuristic_rules = {
      "If the accident happened near or at an intersection or intersecting roadway, "
      "the answer of <CollisionLocation> is \"intersection\".",
      "If the intersecting roadway has only three legs, the answer of "
      "<CollisionLocation> is \"t-junction\".",
      kAnswerFormatRule,
  };
  p.few_shot_examples = {
      {"The crash occurred within a four-way intersection. Each approach has two "
       "lanes and the posted speed limit is 45 mph.",
       "<CollisionLocation>intersection</CollisionLocation>\n<LaneNum>2</LaneNum>\n"
       "<SpeedLimit>45</SpeedLimit>"},
      {"V1 was traveling on a straight two-lane roadway with a posted speed limit of "
       "35 mph.",
       "<CollisionLocation>straight road</CollisionLocation>\n<LaneNum>2</LaneNum>\n"
       "<SpeedLimit>35</SpeedLimit>"},
  };
  return p;
}

PromptPattern make_dynamic_pattern() {
  PromptPattern p;
  p.layer = PromptLayer::DynamicObjects;
  p.attribute_definitions = {
      {"ParticipantsNumber",
       "it means the number of traffic participants involved in the collision. Answer "
       "a positive integer."},
      {"CrashType",
       "it means the angle at which the traffic participants collided. Answer one of: "
       "rear-end, frontal, front-to-side."},
      {"DrivingDirections",
       "it means the initial compass driving direction of each participant. Answer one "
       "entry per participant separated by '; ', each one of: northbound, southbound, "
       "eastbound, westbound."},
      {"RunningLanes",
       "it means the initial running lane of each participant counted from the road "
       "centerline. Answer one integer entry per participant separated by '; '."},
      {"DrivingActions",
       "it means the actions each participant performed before the crash, in order. "
       "Answer one entry per participant separated by '; '; separate multiple actions "
       "of one participant with ', '."},
  };
  p.heuristic_rules = {
      "List participants in report order: vehicles V1, V2, ... first, then "
      "pedestrians.",
      "If the car proceeds to do an intended action but does not do actually, such as "
      "intending to turn right, this intended action must not be added to the "
      "<DrivingActions>.",
      "Pedestrians involved in the accident are victims; use only \"pedestrian "
      "cross\" or \"pedestrian walk\" for them.",
      kAnswerFormatRule,
  };
  p.few_shot_examples = {
      {"V1 was traveling northbound in lane 1 following the lane. V2 was traveling "
       "northbound in lane 1 ahead of V1 and was stopped in traffic. The front of V1 "
       "struck the rear of V2.",
       "<ParticipantsNumber>2</ParticipantsNumber>\n<CrashType>rear-end</CrashType>\n"
       "<DrivingDirections>northbound; northbound</DrivingDirections>\n"
       "<RunningLanes>1; 1</RunningLanes>\n"
       "<DrivingActions>follow lane; stop</DrivingActions>"},
      {"V1 was traveling eastbound in lane 1 and intended to turn right, but before "
       "doing so it crossed the intersection. V2 was traveling northbound in lane 1 "
       "crossing the intersection. The front of V1 struck the side of V2.",
       "<ParticipantsNumber>2</ParticipantsNumber>\n"
       "<CrashType>front-to-side</CrashType>\n"
       "<DrivingDirections>eastbound; northbound</DrivingDirections>\n"
       "<RunningLanes>1; 1</RunningLanes>\n"
       "<DrivingActions>vehicle cross; vehicle cross</DrivingActions>"},
  };
  return p;
}

std::string task_statement(PromptLayer layer) {
  switch (layer) {
    case PromptLayer::Environment:
      return "You should help me extract environmental conditions. The answer includes "
             "<Weather> and <Lighting>.";
    case PromptLayer::RoadNetwork:
      return "You should help me extract road network and traffic guidance "
             "information. The answer includes <CollisionLocation>, <LaneNum>, and "
             "<SpeedLimit>.";
    case PromptLayer::DynamicObjects:
      return "You should help me extract dynamic object information. The answer "
             "includes <ParticipantsNumber>, <CrashType>, <DrivingDirections>, "
             "<RunningLanes> and <DrivingActions>.";
  }
  return "";
}

const std::string kRepromptSuffix =
    "\n\nYour previous answer was not in the expected format. Answer only with the "
    "<Attribute>value</Attribute> tags listed above.";

// Raw tag values found in a response; nullopt when not a single tag pair of
// the pattern was recognizable.
std::optional<std::map<std::string, std::string>> scan_tags(const PromptPattern& pattern,
                                                            const std::string& response) {
  std::map<std::string, std::string> raw;
  bool any = false;
  for (const auto& [attr, unused] : pattern.attribute_definitions) {
    const std::string open = "<" + attr + ">";
    const std::string close = "</" + attr + ">";
    const std::size_t b = response.find(open);
    if (b == std::string::npos) continue;
    const std::size_t e = response.find(close, b + open.size());
    if (e == std::string::npos) continue;
    any = true;
    raw[attr] = trim(response.substr(b + open.size(), e - b - open.size()));
  }
  if (!any) return std::nullopt;
  return raw;
}

// Validates one raw tag value against the attribute's vocabulary and rewrites
// it in canonical spelling. Returns nullopt when the value must be treated as
// missing instead of guessed.
std::optional<std::vector<std::string>> validate_attribute(const std::string& attr,
                                                           const std::string& value) {
  if (value.empty() || lower(value) == "unknown") return std::nullopt;
  try {
    if (attr == "Weather") return std::vector<std::string>{to_string(parse_weather(value))};
    if (attr == "Lighting") return std::vector<std::string>{to_string(parse_lighting(value))};
    if (attr == "CollisionLocation")
      return std::vector<std::string>{to_string(parse_road_type(value))};
    if (attr == "CrashType") return std::vector<std::string>{to_string(parse_crash_type(value))};
    if (attr == "LaneNum" || attr == "ParticipantsNumber") {
      int n = 0;
      if (!parse_int(value, n) || n <= 0) return std::nullopt;
      return std::vector<std::string>{std::to_string(n)};
    }
    if (attr == "SpeedLimit") {
      double v = 0.0;
      if (!parse_number(value, v) || v <= 0.0) return std::nullopt;
      std::ostringstream os;
      os << v;
      return std::vector<std::string>{os.str()};
    }
    if (attr == "DrivingDirections") {
      std::vector<std::string> out;
      for (const std::string& entry : split(value, ';')) {
        if (entry.empty()) {
          out.push_back("");
          continue;
        }
        out.push_back(to_string(parse_compass_direction(entry)));
      }
      if (out.empty()) return std::nullopt;
      return out;
    }
    if (attr == "RunningLanes") {
      std::vector<std::string> out;
      for (const std::string& entry : split(value, ';')) {
        if (entry.empty()) {
          out.push_back("");
          continue;
        }
        int n = 0;
        if (!parse_int(entry, n) || n <= 0) return std::nullopt;
        out.push_back(std::to_string(n));
      }
      if (out.empty()) return std::nullopt;
      return out;
    }
    if (attr == "DrivingActions") {
      std::vector<std::string> out;
      for (const std::string& entry : split(value, ';')) {
        if (entry.empty()) {
          out.push_back("");
          continue;
        }
        std::vector<std::string> actions;
        for (const std::string& part : split(entry, ',')) {
          if (part.empty()) return std::nullopt;
          actions.push_back(to_string(normalize_action(part)));
        }
        std::string joined;
        for (std::size_t i = 0; i < actions.size(); ++i) {
          if (i) joined += ", ";
          joined += actions[i];
        }
        out.push_back(joined);
      }
      if (out.empty()) return std::nullopt;
      return out;
    }
  } catch (const Error&) {
    // Out-of-vocabulary value: the attribute stays missing.
    return std::nullopt;
  }
  return std::nullopt;
}

LayerFields validate_tags(const PromptPattern& pattern,
                          const std::map<std::string, std::string>& raw) {
  LayerFields out;
  for (const auto& [attr, unused] : pattern.attribute_definitions) {
    auto it = raw.find(attr);
    if (it == raw.end()) continue;
    if (auto values = validate_attribute(attr, it->second)) out[attr] = *values;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Deterministic keyword analyzer behind MockClient.

bool has(const std::string& text, const std::string& needle) {
  return text.find(needle) != std::string::npos;
}

std::string detect_weather(const std::string& t) {
  if (has(t, "fog")) return "fog";
  if (has(t, "snow")) return "snow";
  if (has(t, "rain")) return "rain";
  if (has(t, "cloud")) return "cloudy";
  if (has(t, "clear") || has(t, "sunny")) return "clear";
  return "";
}

std::string detect_lighting(const std::string& t) {
  const bool dark = has(t, "dark") || has(t, "night");
  if (dark && (has(t, "street light") || has(t, "streetlight") || has(t, "lighted")))
    return "dark-lighted";
  if (dark) return "dark";
  if (has(t, "daylight") || has(t, "daytime") || has(t, "during the day")) return "daylight";
  return "";
}

std::string detect_road_type(const std::string& t) {
  if (has(t, "t-intersection") || has(t, "t-junction") || has(t, "three-leg")) return "t-junction";
  if (has(t, "intersection") || has(t, "crossroad")) return "intersection";
  if (has(t, "roadway") || has(t, "road") || has(t, "street") || has(t, "highway"))
    return "straight road";
  return "";
}

int word_number(const std::string& w) {
  static const std::map<std::string, int> table = {
      {"one", 1}, {"two", 2}, {"three", 3}, {"four", 4}, {"five", 5}, {"six", 6},
  };
  auto it = table.find(w);
  if (it != table.end()) return it->second;
  return std::stoi(w);
}

std::string detect_lane_num(const std::string& t) {
  static const std::regex re("(one|two|three|four|five|six|[0-9]+)[ -]lane");
  std::smatch m;
  if (std::regex_search(t, m, re)) return std::to_string(word_number(m[1].str()));
  return "";
}

std::string detect_speed_limit(const std::string& t) {
  static const std::regex mph("([0-9]+)\\s*mph");
  static const std::regex limit("speed limit[^0-9]*([0-9]+)");
  std::smatch m;
  if (std::regex_search(t, m, mph)) return m[1].str();
  if (std::regex_search(t, m, limit)) return m[1].str();
  return "";
}

std::string detect_crash_type(const std::string& t) {
  if (has(t, "rear")) return "rear-end";
  if (has(t, "head-on") || has(t, "head on") || has(t, "frontal")) return "frontal";
  if (has(t, "side") || has(t, "angle") || has(t, "broadside") || has(t, "t-bone"))
    return "front-to-side";
  return "";
}

struct ActionPhrase {
  const char* phrase;
  const char* action;
};

// Checked in order; more specific phrasings first.
const ActionPhrase kActionPhrases[] = {
    {"u-turn", "u-turn"},
    {"u turn", "u-turn"},
    {"changed lanes", "change lane"},
    {"change lanes", "change lane"},
    {"changing lanes", "change lane"},
    {"lane change", "change lane"},
    {"turned left", "turn left"},
    {"turn left", "turn left"},
    {"turning left", "turn left"},
    {"left turn", "turn left"},
    {"turned right", "turn right"},
    {"turn right", "turn right"},
    {"turning right", "turn right"},
    {"right turn", "turn right"},
    {"came to a stop", "stop"},
    {"was stopped", "stop"},
    {"were stopped", "stop"},
    {"stopped in", "stop"},
    {"stopped at", "stop"},
    {"stopped for", "stop"},
    {"slowed to a stop", "stop"},
    {"crossed the intersection", "vehicle cross"},
    {"crossing the intersection", "vehicle cross"},
    {"crossed the junction", "vehicle cross"},
    {"crossing the junction", "vehicle cross"},
    {"proceeded straight through", "vehicle cross"},
    {"traveled through the intersection", "vehicle cross"},
    {"entered the roadway", "drive into roads"},
    {"entered the road", "drive into roads"},
    {"pulled onto", "drive into roads"},
    {"pulled into the roadway", "drive into roads"},
    {"merged onto", "drive into roads"},
    {"off the roadway", "drive off road"},
    {"off the road", "drive off road"},
    {"departed the roadway", "drive off road"},
    {"left the roadway", "drive off road"},
    {"wrong way", "retrograde"},
    {"wrong-way", "retrograde"},
    {"against traffic", "retrograde"},
    {"into oncoming", "retrograde"},
    {"opposing lane", "retrograde"},
    {"double yellow", "retrograde"},
    {"retrograde", "retrograde"},
    {"followed the lane", "follow lane"},
    {"following the lane", "follow lane"},
    {"continued straight", "follow lane"},
    {"proceeding straight", "follow lane"},
    {"traveling straight", "follow lane"},
    {"traveled straight", "follow lane"},
    {"maintained its lane", "follow lane"},
    {"crossing the street", "pedestrian cross"},
    {"crossed the street", "pedestrian cross"},
    {"crossing the road", "pedestrian cross"},
    {"crossed the road", "pedestrian cross"},
    {"across the street", "pedestrian cross"},
    {"across the road", "pedestrian cross"},
    {"walking along", "pedestrian walk"},
    {"walked along", "pedestrian walk"},
};

// "intended to turn right" and similar plans must not count as actions.
bool intent_marker_before(const std::string& sentence, std::size_t pos) {
  const std::size_t from = pos > 48 ? pos - 48 : 0;
  const std::string window = sentence.substr(from, pos - from);
  return has(window, "intend") || has(window, "attempt") || has(window, "going to") ||
         has(window, "planned to") || has(window, "meaning to");
}

struct MockParticipant {
  std::string direction;
  std::string lane;
  // (position in report, action) pairs, later sorted by position.
  std::vector<std::pair<std::size_t, std::string>> actions;
};

// Index of the participant a sentence talks about: the earliest-mentioned
// vehicle token V<k> or the pedestrian. -1 when the sentence names nobody.
int sentence_owner(const std::string& sentence, int vehicle_count, bool pedestrian) {
  std::size_t best_pos = std::string::npos;
  int best = -1;
  for (int k = 1; k <= vehicle_count; ++k) {
    const std::string token = "v" + std::to_string(k);
    std::size_t pos = 0;
    while ((pos = sentence.find(token, pos)) != std::string::npos) {
      const bool left_ok = pos == 0 || !std::isalnum(static_cast<unsigned char>(sentence[pos - 1]));
      const std::size_t after = pos + token.size();
      const bool right_ok =
          after >= sentence.size() || !std::isalnum(static_cast<unsigned char>(sentence[after]));
      if (left_ok && right_ok) break;
      ++pos;
    }
    if (pos != std::string::npos && pos < best_pos) {
      best_pos = pos;
      best = k - 1;
    }
  }
  if (pedestrian) {
    const std::size_t pos = sentence.find("pedestrian");
    if (pos != std::string::npos && pos < best_pos) best = vehicle_count;
  }
  return best;
}

std::string mock_dynamic_answer(const std::string& text) {
  static const std::regex vehicle_token("\\bv([0-9]+)\\b");
  int vehicle_count = 0;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), vehicle_token);
       it != std::sregex_iterator(); ++it) {
    vehicle_count = std::max(vehicle_count, std::stoi((*it)[1].str()));
  }
  const bool pedestrian = has(text, "pedestrian");
  const int n = vehicle_count + (pedestrian ? 1 : 0);

  std::vector<MockParticipant> parts(static_cast<std::size_t>(std::max(n, 0)));

  static const std::regex direction_re("(northbound|southbound|eastbound|westbound)");
  static const std::regex lane_re("lane ([0-9]+)");
  static const std::regex ordinal_lane_re("(first|second|third|fourth|fifth|sixth) lane");
  static const std::map<std::string, int> ordinals = {
      {"first", 1}, {"second", 2}, {"third", 3}, {"fourth", 4}, {"fifth", 5}, {"sixth", 6},
  };

  std::size_t offset = 0;
  std::stringstream sentences(text);
  std::string sentence;
  while (std::getline(sentences, sentence, '.')) {
    const std::size_t base = offset;
    offset += sentence.size() + 1;
    const int owner = sentence_owner(sentence, vehicle_count, pedestrian);
    if (owner < 0) continue;
    MockParticipant& part = parts[static_cast<std::size_t>(owner)];

    std::smatch m;
    if (part.direction.empty() && std::regex_search(sentence, m, direction_re))
      part.direction = m[1].str();
    if (part.lane.empty()) {
      if (std::regex_search(sentence, m, lane_re))
        part.lane = m[1].str();
      else if (std::regex_search(sentence, m, ordinal_lane_re))
        part.lane = std::to_string(ordinals.at(m[1].str()));
    }
    for (const ActionPhrase& ap : kActionPhrases) {
      std::size_t pos = sentence.find(ap.phrase);
      while (pos != std::string::npos) {
        if (!intent_marker_before(sentence, pos)) {
          bool known = false;
          for (const auto& [unused, existing] : part.actions) {
            if (existing == ap.action) known = true;
          }
          if (!known) part.actions.emplace_back(base + pos, ap.action);
        }
        pos = sentence.find(ap.phrase, pos + 1);
      }
    }
  }

  auto join = [&](auto field) {
    std::string out;
    for (int k = 0; k < n; ++k) {
      if (k) out += "; ";
      out += field(parts[static_cast<std::size_t>(k)]);
    }
    return out;
  };

  std::string answer;
  answer += "<ParticipantsNumber>" + (n > 0 ? std::to_string(n) : "") +
            "</ParticipantsNumber>\n";
  answer += "<CrashType>" + detect_crash_type(text) + "</CrashType>\n";
  answer += "<DrivingDirections>" + join([](const MockParticipant& p) { return p.direction; }) +
            "</DrivingDirections>\n";
  answer += "<RunningLanes>" + join([](const MockParticipant& p) { return p.lane; }) +
            "</RunningLanes>\n";
  answer += "<DrivingActions>" + join([](const MockParticipant& p) {
              auto sorted = p.actions;
              std::sort(sorted.begin(), sorted.end());
              std::string out;
              for (std::size_t i = 0; i < sorted.size(); ++i) {
                if (i) out += ", ";
                out += sorted[i].second;
              }
              return out;
            }) +
            "</DrivingActions>";
  return answer;
}

}  // namespace

std::string to_string(PromptLayer layer) {
  switch (layer) {
    case PromptLayer::Environment: return "Environment";
    case PromptLayer::RoadNetwork: return "RoadNetwork";
    case PromptLayer::DynamicObjects: return "DynamicObjects";
  }
  return "Environment";
}

const PromptPattern& prompt_pattern(PromptLayer layer) {
  static const PromptPattern environment = make_environment_pattern();
  static const PromptPattern road = make_road_pattern();
  static const PromptPattern dynamic = make_dynamic_pattern();
  switch (layer) {
    case PromptLayer::Environment: return environment;
    case PromptLayer::RoadNetwork: return road;
    case PromptLayer::DynamicObjects: return dynamic;
  }
  return environment;
}

std::string build_prompt(const PromptPattern& pattern, const std::string& report) {
  if (trim(report).empty()) throw EmptyReport("cannot build a prompt for an empty report");
  std::string out = task_statement(pattern.layer);
  out += "\n\nAttribute explanations:\n";
  for (const auto& [attr, explanation] : pattern.attribute_definitions) {
    out += "- For the <" + attr + ">, " + explanation + "\n";
  }
  out += "\nRules:\n";
  for (const std::string& rule : pattern.heuristic_rules) {
    out += "- " + rule + "\n";
  }
  out += "\nExamples:\n";
  for (const auto& [excerpt, answer] : pattern.few_shot_examples) {
    out += "Report: " + excerpt + "\nAnswer: " + answer + "\n\n";
  }
  out += "Report: " + report + "\nAnswer:";
  return out;
}

std::string MockClient::complete(const std::string& prompt) {
  // The report is the last Report: block of the prompt.
  const std::size_t report_pos = prompt.rfind("\nReport: ");
  if (report_pos == std::string::npos) return "";
  const std::size_t begin = report_pos + 9;
  std::size_t end = prompt.find("\nAnswer:", begin);
  if (end == std::string::npos) end = prompt.size();
  const std::string text = lower(prompt.substr(begin, end - begin));

  if (has(prompt, "<ParticipantsNumber>")) return mock_dynamic_answer(text);
  if (has(prompt, "<CollisionLocation>")) {
    return "<CollisionLocation>" + detect_road_type(text) + "</CollisionLocation>\n" +
           "<LaneNum>" + detect_lane_num(text) + "</LaneNum>\n" +
           "<SpeedLimit>" + detect_speed_limit(text) + "</SpeedLimit>";
  }
  if (has(prompt, "<Weather>")) {
    return "<Weather>" + detect_weather(text) + "</Weather>\n" +
           "<Lighting>" + detect_lighting(text) + "</Lighting>";
  }
  return "";
}

HttpClient::HttpClient() {
  const char* endpoint = std::getenv("CRASHSYNTH_LLM_ENDPOINT");
  const char* key = std::getenv("CRASHSYNTH_LLM_KEY");
  endpoint_ = endpoint ? endpoint : "";
  api_key_ = key ? key : "";
}

HttpClient::HttpClient(std::string endpoint, std::string api_key)
    : endpoint_(std::move(endpoint)), api_key_(std::move(api_key)) {}

std::string HttpClient::complete(const std::string& prompt) {
  if (endpoint_.empty())
    throw ClientError("CRASHSYNTH_LLM_ENDPOINT is not set and no endpoint was given");

  std::string base = endpoint_;
  std::string path = "/";
  const std::size_t scheme = base.find("://");
  const std::size_t host_begin = scheme == std::string::npos ? 0 : scheme + 3;
  const std::size_t slash = base.find('/', host_begin);
  if (slash != std::string::npos) {
    path = base.substr(slash);
    base = base.substr(0, slash);
  }

  nlohmann::json body;
  body["prompt"] = prompt;
  const std::string payload = body.dump();

  std::string last_error;
  for (int attempt = 0; attempt < 4; ++attempt) {
    if (attempt > 0)
      std::this_thread::sleep_for(std::chrono::milliseconds(100 << (attempt - 1)));
    httplib::Client cli(base);
    cli.set_connection_timeout(5, 0);
    cli.set_read_timeout(60, 0);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
    auto res = cli.Post(path, headers, payload, "application/json");
    if (res && res->status == 200) {
      try {
        nlohmann::json doc = nlohmann::json::parse(res->body);
        return doc.at("completion").get<std::string>();
      } catch (const nlohmann::json::exception& e) {
        throw ClientError(std::string("malformed completion payload: ") + e.what());
      }
    }
    last_error = res ? "http status " + std::to_string(res->status)
                     : "transport error " + std::to_string(static_cast<int>(res.error()));
  }
  throw ClientError("endpoint unreachable after 4 attempts: " + last_error);
}

std::vector<FixtureReport> load_report_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw IoError("report directory '" + dir + "' does not exist");
  std::vector<FixtureReport> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_directory()) continue;
    const fs::path report_path = entry.path() / "report.txt";
    if (!fs::exists(report_path)) continue;
    std::ifstream in(report_path);
    if (!in) throw IoError("cannot open report file '" + report_path.string() + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    FixtureReport r;
    r.name = entry.path().filename().string();
    r.report_text = buffer.str();
    const fs::path gold_path = entry.path() / "gold.json";
    if (fs::exists(gold_path)) r.gold = parse_abstract_file(gold_path.string());
    out.push_back(std::move(r));
  }
  std::sort(out.begin(), out.end(),
            [](const FixtureReport& a, const FixtureReport& b) { return a.name < b.name; });
  return out;
}

LayerFields extract_layer(ExtractionClient& client, const PromptPattern& pattern,
                          const std::string& report) {
  const std::string prompt = build_prompt(pattern, report);
  auto raw = scan_tags(pattern, client.complete(prompt));
  if (!raw) {
    raw = scan_tags(pattern, client.complete(prompt + kRepromptSuffix));
    if (!raw)
      throw ParseError("no <Attribute> tags in the " + to_string(pattern.layer) +
                       " response after one reprompt");
  }
  return validate_tags(pattern, *raw);
}

namespace {

const std::vector<std::string>* field(const LayerFields& fields, const std::string& attr) {
  auto it = fields.find(attr);
  return it == fields.end() ? nullptr : &it->second;
}

std::string entry_at(const std::vector<std::string>* list, std::size_t k) {
  if (!list || k >= list->size()) return "";
  return (*list)[k];
}

}  // namespace

AccidentAbstract extract_abstract(ExtractionClient& client, const std::string& report) {
  const LayerFields env = extract_layer(client, prompt_pattern(PromptLayer::Environment), report);
  const LayerFields road = extract_layer(client, prompt_pattern(PromptLayer::RoadNetwork), report);
  const LayerFields dyn =
      extract_layer(client, prompt_pattern(PromptLayer::DynamicObjects), report);

  AbstractDraft draft;
  if (auto* v = field(env, "Weather")) draft.weather = parse_weather(v->front());
  if (auto* v = field(env, "Lighting")) draft.lighting = parse_lighting(v->front());
  if (auto* v = field(road, "CollisionLocation"))
    draft.collision_location = parse_road_type(v->front());
  if (auto* v = field(road, "LaneNum")) draft.lane_num = std::stoi(v->front());
  if (auto* v = field(road, "SpeedLimit")) draft.speed_limit_mph = std::stod(v->front());
  if (auto* v = field(dyn, "ParticipantsNumber")) draft.participants_number = std::stoi(v->front());
  if (auto* v = field(dyn, "CrashType")) draft.crash_type = parse_crash_type(v->front());

  const auto* directions = field(dyn, "DrivingDirections");
  const auto* lanes = field(dyn, "RunningLanes");
  const auto* actions = field(dyn, "DrivingActions");
  std::size_t n = std::max({directions ? directions->size() : 0, lanes ? lanes->size() : 0,
                            actions ? actions->size() : 0});
  if (draft.participants_number)
    n = std::max(n, static_cast<std::size_t>(*draft.participants_number));

  int vehicles = 0;
  int pedestrians = 0;
  for (std::size_t k = 0; k < n; ++k) {
    ParticipantSpec p;
    const std::string action_entry = entry_at(actions, k);
    if (!action_entry.empty()) {
      for (const std::string& part : split(action_entry, ','))
        p.actions.push_back(normalize_action(part));
    }
    const bool ped = !p.actions.empty() && is_pedestrian_action(p.actions.front());
    p.kind = ped ? ParticipantKind::Pedestrian : ParticipantKind::Vehicle;
    p.id = ped ? "PED" + std::to_string(++pedestrians) : "V" + std::to_string(++vehicles);
    // A report that never states what a vehicle did gets the neutral action.
    if (p.actions.empty()) p.actions.push_back(DrivingAction::FollowLane);
    const std::string direction_entry = entry_at(directions, k);
    if (!direction_entry.empty()) p.direction = parse_compass_direction(direction_entry);
    const std::string lane_entry = entry_at(lanes, k);
    if (!lane_entry.empty()) p.running_lane = std::stoi(lane_entry);
    draft.participants.push_back(std::move(p));
  }

  return finalize_abstract(apply_defaults(draft));
}

namespace {

struct AttributeLayout {
  const char* layer;
  const char* attribute;
};

const AttributeLayout kAccuracyLayout[] = {
    {"Environment", "Weather"},
    {"Environment", "Lighting"},
    {"RoadNetwork", "CollisionLocation"},
    {"RoadNetwork", "LaneNum"},
    {"RoadNetwork", "SpeedLimit"},
    {"DynamicObjects", "ParticipantsNumber"},
    {"DynamicObjects", "CrashType"},
    {"DynamicObjects", "DrivingDirections"},
    {"DynamicObjects", "RunningLanes"},
    {"DynamicObjects", "DrivingActions"},
};

double participant_average(const AccidentAbstract& pred, const AccidentAbstract& gold,
                           bool (*match)(const ParticipantSpec&, const ParticipantSpec&)) {
  const std::size_t np = pred.participants.size();
  const std::size_t ng = gold.participants.size();
  const std::size_t denom = std::max(np, ng);
  if (denom == 0) return 1.0;
  double hits = 0.0;
  for (std::size_t k = 0; k < std::min(np, ng); ++k) {
    if (match(pred.participants[k], gold.participants[k])) hits += 1.0;
  }
  return hits / static_cast<double>(denom);
}

double score_attribute(const std::string& attr, const AccidentAbstract& pred,
                       const AccidentAbstract& gold) {
  if (attr == "Weather") return pred.weather == gold.weather ? 1.0 : 0.0;
  if (attr == "Lighting") return pred.lighting == gold.lighting ? 1.0 : 0.0;
  if (attr == "CollisionLocation")
    return pred.collision_location == gold.collision_location ? 1.0 : 0.0;
  if (attr == "LaneNum") return pred.lane_num == gold.lane_num ? 1.0 : 0.0;
  if (attr == "SpeedLimit")
    return std::abs(pred.speed_limit_mps - gold.speed_limit_mps) < 1e-9 ? 1.0 : 0.0;
  if (attr == "ParticipantsNumber")
    return pred.participants.size() == gold.participants.size() ? 1.0 : 0.0;
  if (attr == "CrashType") return pred.crash.crash_type == gold.crash.crash_type ? 1.0 : 0.0;
  if (attr == "DrivingDirections")
    return participant_average(pred, gold, [](const ParticipantSpec& a, const ParticipantSpec& b) {
      return a.direction == b.direction;
    });
  if (attr == "RunningLanes")
    return participant_average(pred, gold, [](const ParticipantSpec& a, const ParticipantSpec& b) {
      return a.running_lane == b.running_lane;
    });
  if (attr == "DrivingActions")
    return participant_average(pred, gold, [](const ParticipantSpec& a, const ParticipantSpec& b) {
      return a.actions == b.actions;
    });
  return 0.0;
}

}  // namespace

std::vector<AttributeAccuracy> evaluate_accuracy(const std::vector<AccidentAbstract>& predictions,
                                                 const std::vector<AccidentAbstract>& gold) {
  if (predictions.size() != gold.size())
    throw LengthMismatch(std::to_string(predictions.size()) + " predictions vs " +
                         std::to_string(gold.size()) + " gold abstracts");
  if (gold.empty()) throw EmptyInput("accuracy requested over zero reports");

  std::vector<AttributeAccuracy> rows;
  for (const AttributeLayout& slot : kAccuracyLayout) {
    double total = 0.0;
    for (std::size_t i = 0; i < gold.size(); ++i)
      total += score_attribute(slot.attribute, predictions[i], gold[i]);
    rows.push_back({slot.layer, slot.attribute, total / static_cast<double>(gold.size())});
  }
  return rows;
}

std::string accuracy_csv(const std::vector<AttributeAccuracy>& rows) {
  std::string out = "layer,attribute,accuracy_percent\n";
  char buf[32];
  for (const AttributeAccuracy& row : rows) {
    std::snprintf(buf, sizeof(buf), "%.2f", row.accuracy * 100.0);
    out += row.layer + "," + row.attribute + "," + buf + "\n";
  }
  return out;
}

}  // namespace crashsynth
