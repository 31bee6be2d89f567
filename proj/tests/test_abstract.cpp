#include <doctest.h>

#include <string>

#include "crashsynth/abstract.hpp"
#include "crashsynth/errors.hpp"

using namespace crashsynth;

namespace {

std::string two_vehicle_json() {
  return R"({
    "environment": {"weather": "rain", "lighting": "dark"},
    "road": {"collision_location": "intersection", "lane_num": 2, "speed_limit_mph": 30},
    "dynamic": {
      "participants": [
        {"id": "P1", "kind": "vehicle", "direction": "northbound", "running_lane": 1,
         "actions": ["follow lane", "turn left"], "role": "striker"},
        {"id": "P2", "kind": "vehicle", "direction": "southbound", "running_lane": 1,
         "actions": ["follow lane"], "role": "victim"}
      ],
      "crash_type": "front-to-side"
    }
  })";
}

}  // namespace

TEST_CASE("parsing a full two-vehicle abstract") {
  AccidentAbstract a = parse_abstract(two_vehicle_json());
  CHECK(a.weather == Weather::Rain);
  CHECK(a.lighting == Lighting::Dark);
  CHECK(a.collision_location == RoadType::Intersection);
  CHECK(a.lane_num == 2);
  CHECK(a.speed_limit_mps == doctest::Approx(30.0 * kMphToMps));
  REQUIRE(a.participants.size() == 2);
  CHECK(a.crash.striker_id == "P1");
  REQUIRE(a.crash.victim_ids.size() == 1);
  CHECK(a.crash.victim_ids[0] == "P2");
  CHECK(a.crash.crash_type == CrashType::FrontToSide);
  CHECK(a.participants[0].actions ==
        std::vector<DrivingAction>{DrivingAction::FollowLane, DrivingAction::TurnLeft});
}

TEST_CASE("serialization round-trips through the parser") {
  AccidentAbstract a = parse_abstract(two_vehicle_json());
  AccidentAbstract b = parse_abstract(serialize_abstract(a));
  CHECK(a == b);
  CHECK(abstract_identity(a) == abstract_identity(b));
}

TEST_CASE("defaults fill missing environment and road fields") {
  std::string minimal = R"({
    "dynamic": {
      "participants": [
        {"id": "P1", "direction": "eastbound", "running_lane": 2,
         "actions": ["follow lane"], "role": "striker"},
        {"id": "P2", "direction": "eastbound", "running_lane": 2, "actions": ["stop"]}
      ],
      "crash_type": "rear-end"
    }
  })";
  AccidentAbstract a = parse_abstract(minimal);
  CHECK(a.weather == Weather::Clear);
  CHECK(a.lighting == Lighting::Daylight);
  CHECK(a.collision_location == RoadType::Intersection);
  CHECK(a.lane_num == 2);
  CHECK(a.speed_limit_mps == doctest::Approx(default_speed_limit_mps(RoadType::Intersection)));
}

TEST_CASE("default speed limits by road type") {
  CHECK(default_speed_limit_mps(RoadType::Intersection) == doctest::Approx(13.4));
  CHECK(default_speed_limit_mps(RoadType::TJunction) == doctest::Approx(13.4));
  CHECK(default_speed_limit_mps(RoadType::StraightRoad) == doctest::Approx(22.4));
}

TEST_CASE("action synonyms normalize to catalog actions") {
  CHECK(normalize_action("Go Forward") == DrivingAction::FollowLane);
  CHECK(normalize_action("proceed straight") == DrivingAction::FollowLane);
  CHECK(normalize_action("left turn") == DrivingAction::TurnLeft);
  CHECK(normalize_action("Turning Right") == DrivingAction::TurnRight);
  CHECK(normalize_action("merge") == DrivingAction::ChangeLane);
  CHECK(normalize_action("u turn") == DrivingAction::UTurn);
  CHECK(normalize_action("wrong-way driving") == DrivingAction::Retrograde);
  CHECK(normalize_action("cross the road") == DrivingAction::PedestrianCross);
  CHECK(normalize_action("walk along road") == DrivingAction::PedestrianWalk);
  CHECK(normalize_action("brake to a stop") == DrivingAction::Stop);
  CHECK_THROWS_AS(normalize_action("teleport"), UnknownAction);
}

TEST_CASE("unknown action inside a participant surfaces as UnknownAction") {
  std::string doc = R"({
    "dynamic": {
      "participants": [
        {"id": "P1", "direction": "northbound", "actions": ["levitate"], "role": "striker"},
        {"id": "P2", "direction": "southbound", "actions": ["follow lane"]}
      ],
      "crash_type": "frontal"
    }
  })";
  CHECK_THROWS_AS(parse_abstract(doc), UnknownAction);
}

TEST_CASE("schema violations are reported as SchemaError") {
  CHECK_THROWS_AS(parse_abstract("not json"), SchemaError);
  CHECK_THROWS_AS(parse_abstract("[]"), SchemaError);
  CHECK_THROWS_AS(parse_abstract(R"({"dynamic": {}})"), SchemaError);
  CHECK_THROWS_AS(parse_abstract(R"({"dynamic": {"participants": [{"id": "P1"}]}})"), SchemaError);
}

TEST_CASE("semantic violations are reported as SemanticError") {
  // Single participant: nobody to crash into.
  std::string lonely = R"({
    "dynamic": {
      "participants": [
        {"id": "P1", "direction": "northbound", "actions": ["follow lane"], "role": "striker"}
      ],
      "crash_type": "rear-end"
    }
  })";
  CHECK_THROWS_AS(parse_abstract(lonely), SemanticError);

  // Pedestrian striker is not allowed.
  std::string ped_striker = R"({
    "dynamic": {
      "participants": [
        {"id": "P1", "kind": "pedestrian", "direction": "northbound",
         "actions": ["pedestrian cross"], "role": "striker"},
        {"id": "P2", "direction": "southbound", "actions": ["follow lane"]}
      ],
      "crash_type": "frontal"
    }
  })";
  CHECK_THROWS_AS(parse_abstract(ped_striker), SemanticError);

  // Vehicle performing a pedestrian action.
  std::string mixed = R"({
    "dynamic": {
      "participants": [
        {"id": "P1", "direction": "northbound", "actions": ["pedestrian cross"], "role": "striker"},
        {"id": "P2", "direction": "southbound", "actions": ["follow lane"]}
      ],
      "crash_type": "frontal"
    }
  })";
  CHECK_THROWS_AS(parse_abstract(mixed), SemanticError);

  // Running lane beyond the declared lane count.
  std::string bad_lane = R"({
    "road": {"lane_num": 1},
    "dynamic": {
      "participants": [
        {"id": "P1", "direction": "northbound", "running_lane": 3,
         "actions": ["follow lane"], "role": "striker"},
        {"id": "P2", "direction": "southbound", "actions": ["follow lane"]}
      ],
      "crash_type": "frontal"
    }
  })";
  CHECK_THROWS_AS(parse_abstract(bad_lane), SemanticError);
}

TEST_CASE("participants_number must match the participant list") {
  std::string doc = R"({
    "dynamic": {
      "participants_number": 3,
      "participants": [
        {"id": "P1", "driving_direction": "northbound", "actions": ["follow lane"], "role": "striker"},
        {"id": "P2", "driving_direction": "southbound", "actions": ["follow lane"]}
      ],
      "crash_type": "frontal"
    }
  })";
  CHECK_THROWS_AS(parse_abstract(doc), SemanticError);
  AccidentAbstract a = parse_abstract(two_vehicle_json());
  CHECK(serialize_abstract(a).find("\"participants_number\": 2") != std::string::npos);
}

TEST_CASE("striker defaults to the first participant when no role is given") {
  std::string doc = R"({
    "dynamic": {
      "participants": [
        {"id": "A", "direction": "northbound", "actions": ["follow lane"]},
        {"id": "B", "direction": "northbound", "actions": ["stop"]}
      ],
      "crash_type": "rear-end"
    }
  })";
  AccidentAbstract a = parse_abstract(doc);
  CHECK(a.crash.striker_id == "A");
  CHECK(a.crash.victim_ids == std::vector<std::string>{"B"});
}

TEST_CASE("apply_defaults is idempotent") {
  AbstractDraft d;
  ParticipantSpec p;
  p.id = "P1";
  p.direction = CompassDirection::Westbound;
  p.running_lane = 2;
  p.actions = {DrivingAction::FollowLane};
  d.participants.push_back(p);
  p.id = "P2";
  d.participants.push_back(p);
  d.crash_type = CrashType::RearEnd;

  AbstractDraft once = apply_defaults(d);
  AbstractDraft twice = apply_defaults(once);
  CHECK(once.lane_num == twice.lane_num);
  CHECK(*once.lane_num == 2);
  CHECK(once.speed_limit_mph == twice.speed_limit_mph);
  CHECK(once.striker_id == twice.striker_id);
}
