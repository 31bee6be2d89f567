#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "crashsynth/abstract.hpp"
#include "crashsynth/errors.hpp"
#include "crashsynth/extraction.hpp"

using namespace crashsynth;

namespace {

struct CannedClient final : ExtractionClient {
  std::vector<std::string> responses;
  std::size_t calls = 0;

  explicit CannedClient(std::vector<std::string> r) : responses(std::move(r)) {}

  std::string complete(const std::string&) override {
    const std::string& r = calls < responses.size() ? responses[calls] : responses.back();
    ++calls;
    return r;
  }
};

struct DownClient final : ExtractionClient {
  std::string complete(const std::string&) override {
    throw ClientError("connection refused");
  }
};

AccidentAbstract cross_gold() {
  AbstractDraft d;
  d.collision_location = RoadType::Intersection;
  d.lane_num = 2;
  d.speed_limit_mph = 45.0;
  ParticipantSpec p;
  p.id = "V1";
  p.direction = CompassDirection::Northbound;
  p.actions = {DrivingAction::VehicleCross};
  d.participants.push_back(p);
  p.id = "V2";
  p.direction = CompassDirection::Westbound;
  p.actions = {DrivingAction::VehicleCross};
  d.participants.push_back(p);
  d.crash_type = CrashType::FrontToSide;
  return finalize_abstract(d);
}

}  // namespace

TEST_CASE("prompts keep task, explanations, rules, examples, report in order") {
  const PromptPattern& env = prompt_pattern(PromptLayer::Environment);
  const std::string report = "The roadway was wet from earlier rain.";
  const std::string prompt = build_prompt(env, report);

  const std::string first_line = prompt.substr(0, prompt.find('\n'));
  CHECK(first_line.find("<Weather>") != std::string::npos);
  CHECK(first_line.find("<Lighting>") != std::string::npos);
  CHECK(prompt.find("it means the weather conditions when the accident happened") !=
        std::string::npos);

  const std::size_t explanations = prompt.find("Attribute explanations:");
  const std::size_t rules = prompt.find("Rules:");
  const std::size_t examples = prompt.find("Examples:");
  const std::size_t body = prompt.rfind("Report: " + report);
  REQUIRE(explanations != std::string::npos);
  REQUIRE(rules != std::string::npos);
  REQUIRE(examples != std::string::npos);
  REQUIRE(body != std::string::npos);
  CHECK(explanations < rules);
  CHECK(rules < examples);
  CHECK(examples < body);
  CHECK(prompt.substr(prompt.size() - 7) == "Answer:");

  CHECK(build_prompt(env, report) == prompt);  // byte-deterministic

  const std::string dynamic = build_prompt(prompt_pattern(PromptLayer::DynamicObjects), report);
  for (const char* tag : {"<ParticipantsNumber>", "<CrashType>", "<DrivingDirections>",
                          "<RunningLanes>", "<DrivingActions>"}) {
    CHECK(dynamic.find(tag) != std::string::npos);
  }
  CHECK(dynamic.find("this intended action must not be added") != std::string::npos);

  CHECK_THROWS_AS(build_prompt(env, ""), EmptyReport);
  CHECK_THROWS_AS(build_prompt(env, "  \n "), EmptyReport);
}

TEST_CASE("patterns cover exactly their layer attributes") {
  auto names = [](PromptLayer layer) {
    std::vector<std::string> out;
    for (const auto& [attr, unused] : prompt_pattern(layer).attribute_definitions)
      out.push_back(attr);
    return out;
  };
  CHECK(names(PromptLayer::Environment) == std::vector<std::string>{"Weather", "Lighting"});
  CHECK(names(PromptLayer::RoadNetwork) ==
        std::vector<std::string>{"CollisionLocation", "LaneNum", "SpeedLimit"});
  CHECK(names(PromptLayer::DynamicObjects) ==
        std::vector<std::string>{"ParticipantsNumber", "CrashType", "DrivingDirections",
                                 "RunningLanes", "DrivingActions"});
  for (PromptLayer layer : {PromptLayer::Environment, PromptLayer::RoadNetwork,
                            PromptLayer::DynamicObjects}) {
    CHECK_FALSE(prompt_pattern(layer).few_shot_examples.empty());
  }
  CHECK(to_string(PromptLayer::RoadNetwork) == "RoadNetwork");
}

TEST_CASE("layer extraction canonicalizes values and rejects out-of-vocabulary ones") {
  const PromptPattern& env = prompt_pattern(PromptLayer::Environment);

  CannedClient canned({"<Weather>Cloudy</Weather>\n<Lighting>Dark</Lighting>"});
  LayerFields fields = extract_layer(canned, env, "x");
  CHECK(fields.at("Weather") == std::vector<std::string>{"cloudy"});
  CHECK(fields.at("Lighting") == std::vector<std::string>{"dark"});
  CHECK(canned.calls == 1);

  CannedClient empty_tags({"<Weather></Weather><Lighting></Lighting>"});
  CHECK(extract_layer(empty_tags, env, "x").empty());
  CHECK(empty_tags.calls == 1);

  CannedClient hopeless({"I cannot help with that.", "Still refusing."});
  CHECK_THROWS_AS(extract_layer(hopeless, env, "x"), ParseError);
  CHECK(hopeless.calls == 2);

  CannedClient recovered({"no tags here", "<Weather>rainy</Weather>"});
  fields = extract_layer(recovered, env, "x");
  CHECK(fields.at("Weather") == std::vector<std::string>{"rain"});
  CHECK(recovered.calls == 2);

  // Hallucinated enum values are dropped; synonyms inside the vocabulary map
  // to their canonical spelling.
  CannedClient invented({"<Weather>plasma</Weather><Lighting>dusk</Lighting>"});
  fields = extract_layer(invented, env, "x");
  CHECK(fields.count("Weather") == 0);
  CHECK(fields.at("Lighting") == std::vector<std::string>{"dark"});
}

TEST_CASE("layer extraction splits per-participant lists") {
  const PromptPattern& dyn = prompt_pattern(PromptLayer::DynamicObjects);
  CannedClient canned(
      {"<ParticipantsNumber>2</ParticipantsNumber>\n"
       "<CrashType>rear-end</CrashType>\n"
       "<DrivingDirections>northbound; eastbound</DrivingDirections>\n"
       "<RunningLanes>1; 2</RunningLanes>\n"
       "<DrivingActions>follow lane, vehicle cross; stop</DrivingActions>"});
  LayerFields fields = extract_layer(canned, dyn, "x");
  CHECK(fields.at("ParticipantsNumber") == std::vector<std::string>{"2"});
  CHECK(fields.at("CrashType") == std::vector<std::string>{"rear-end"});
  CHECK(fields.at("DrivingDirections") ==
        std::vector<std::string>{"northbound", "eastbound"});
  CHECK(fields.at("RunningLanes") == std::vector<std::string>{"1", "2"});
  CHECK(fields.at("DrivingActions") ==
        std::vector<std::string>{"follow lane, vehicle cross", "stop"});

  CannedClient bad_entry(
      {"<CrashType>rear-end</CrashType>\n"
       "<DrivingDirections>northbound; skyward</DrivingDirections>"});
  fields = extract_layer(bad_entry, dyn, "x");
  CHECK(fields.count("DrivingDirections") == 0);
  CHECK(fields.at("CrashType") == std::vector<std::string>{"rear-end"});
}

TEST_CASE("mock extraction reproduces hand-built abstracts") {
  MockClient mock;

  const std::string crossing =
      "The crash occurred during daylight hours under a clear sky at a four-way "
      "intersection. Each approach has two lanes and the posted speed limit is 45 mph. "
      "V1 was traveling northbound in lane 1 and crossed the intersection. V2 was "
      "traveling westbound in lane 1 crossing the intersection. The front of V1 struck "
      "the side of V2.";
  CHECK(extract_abstract(mock, crossing) == cross_gold());

  const std::string rear_end =
      "V1 was traveling northbound in lane 1 on a two-lane roadway and was following "
      "the lane. V2 was traveling northbound in lane 1 ahead of V1 and was stopped in "
      "traffic. The front of V1 struck the rear of V2. The crash occurred at night on "
      "a road lit by street lights.";
  AccidentAbstract got = extract_abstract(mock, rear_end);
  AbstractDraft d;
  d.collision_location = RoadType::StraightRoad;
  d.lane_num = 2;
  ParticipantSpec p;
  p.id = "V1";
  p.actions = {DrivingAction::FollowLane};
  d.participants.push_back(p);
  p.id = "V2";
  p.actions = {DrivingAction::Stop};
  d.participants.push_back(p);
  d.crash_type = CrashType::RearEnd;
  d.lighting = Lighting::DarkLighted;
  CHECK(got == finalize_abstract(d));
  CHECK(got.weather == Weather::Clear);  // unstated weather falls to default

  const std::string pedestrian =
      "V1 was traveling eastbound in lane 1 and turned right at the t-intersection. A "
      "pedestrian was walking southbound across the street. The front of V1 struck the "
      "side of the pedestrian. The crash occurred during daylight hours under a cloudy "
      "sky at a t-intersection with a posted speed limit of 30 mph.";
  AccidentAbstract ped = extract_abstract(mock, pedestrian);
  CHECK(ped.collision_location == RoadType::TJunction);
  CHECK(ped.weather == Weather::Cloudy);
  REQUIRE(ped.participants.size() == 2);
  CHECK(ped.participants[0].id == "V1");
  CHECK(ped.participants[0].actions == std::vector<DrivingAction>{DrivingAction::TurnRight});
  CHECK(ped.participants[1].id == "PED1");
  CHECK(ped.participants[1].kind == ParticipantKind::Pedestrian);
  CHECK(ped.participants[1].actions ==
        std::vector<DrivingAction>{DrivingAction::PedestrianCross});
  CHECK(ped.participants[1].direction == CompassDirection::Southbound);
  CHECK(ped.crash.crash_type == CrashType::FrontToSide);
  CHECK(ped.crash.striker_id == "V1");
}

TEST_CASE("intended actions never enter the action list") {
  MockClient mock;
  const std::string report =
      "V1 was traveling southbound in lane 1 and intended to turn left at the "
      "intersection, but continued straight. V2 was traveling northbound in lane 1 and "
      "was stopped at the signal. The front of V1 struck the rear of V2.";
  AccidentAbstract a = extract_abstract(mock, report);
  CHECK(a.striker().actions == std::vector<DrivingAction>{DrivingAction::FollowLane});
  CHECK(a.participant("V2").actions == std::vector<DrivingAction>{DrivingAction::Stop});
}

TEST_CASE("mock answers are deterministic per prompt") {
  MockClient mock;
  const std::string prompt = build_prompt(prompt_pattern(PromptLayer::Environment),
                                          "It was raining at night on the highway.");
  CHECK(mock.complete(prompt) == mock.complete(prompt));
  CHECK(mock.complete(prompt).find("<Weather>rain</Weather>") != std::string::npos);
}

TEST_CASE("transport failures surface as ClientError") {
  DownClient down;
  CHECK_THROWS_AS(extract_abstract(down, "V1 struck V2."), ClientError);
  HttpClient unconfigured("", "");
  CHECK_THROWS_AS(unconfigured.complete("hello"), ClientError);
}

TEST_CASE("accuracy table scores exact and per-participant matches") {
  const AccidentAbstract gold = cross_gold();
  std::vector<AccidentAbstract> golds(4, gold);

  std::vector<AccidentAbstract> preds = golds;
  auto rows = evaluate_accuracy(preds, golds);
  REQUIRE(rows.size() == 10);
  for (const auto& row : rows) CHECK(row.accuracy == 1.0);
  CHECK(rows[0].layer == "Environment");
  CHECK(rows[0].attribute == "Weather");
  CHECK(rows[5].layer == "DynamicObjects");
  CHECK(rows[5].attribute == "ParticipantsNumber");

  preds[0].weather = Weather::Snow;
  preds[1].participants[1].actions = {DrivingAction::Stop};
  rows = evaluate_accuracy(preds, golds);
  for (const auto& row : rows) {
    if (row.attribute == "Weather") CHECK(row.accuracy == doctest::Approx(0.75));
    else if (row.attribute == "DrivingActions") CHECK(row.accuracy == doctest::Approx(0.875));
    else CHECK(row.accuracy == 1.0);
  }

  const std::string csv = accuracy_csv(rows);
  CHECK(csv.find("layer,attribute,accuracy_percent\n") == 0);
  CHECK(csv.find("Environment,Weather,75.00") != std::string::npos);
  CHECK(csv.find("DynamicObjects,DrivingActions,87.50") != std::string::npos);
  CHECK(csv.find("RoadNetwork,SpeedLimit,100.00") != std::string::npos);

  CHECK_THROWS_AS(evaluate_accuracy({gold}, golds), LengthMismatch);
  CHECK_THROWS_AS(evaluate_accuracy({}, {}), EmptyInput);
}

TEST_CASE("report directories load sorted with optional gold annotations") {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "crashsynth_report_dir_test";
  fs::remove_all(root);
  fs::create_directories(root / "b_plain");
  fs::create_directories(root / "a_gold");
  fs::create_directories(root / "c_empty");

  std::ofstream(root / "b_plain" / "report.txt") << "V1 struck the rear of V2.";
  std::ofstream(root / "a_gold" / "report.txt") << "V1 crossed the intersection.";
  std::ofstream(root / "a_gold" / "gold.json") << serialize_abstract(cross_gold());

  auto reports = load_report_dir(root.string());
  REQUIRE(reports.size() == 2);  // c_empty has no report.txt
  CHECK(reports[0].name == "a_gold");
  CHECK(reports[1].name == "b_plain");
  REQUIRE(reports[0].gold.has_value());
  CHECK(*reports[0].gold == cross_gold());
  CHECK_FALSE(reports[1].gold.has_value());
  CHECK(reports[1].report_text == "V1 struck the rear of V2.");

  fs::remove_all(root);
  CHECK_THROWS_AS(load_report_dir(root.string()), IoError);
}
