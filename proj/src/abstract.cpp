#include "crashsynth/abstract.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

#include "crashsynth/errors.hpp"

namespace crashsynth {

using nlohmann::ordered_json;

namespace {

std::string canonical_token(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    unsigned char uc = static_cast<unsigned char>(c);
    if (std::isalnum(uc)) {
      if (pending_space && !out.empty()) out.push_back(' ');
      pending_space = false;
      out.push_back(static_cast<char>(std::tolower(uc)));
    } else {
      pending_space = true;
    }
  }
  return out;
}

template <typename Enum>
Enum parse_enum(const std::string& s, const std::map<std::string, Enum>& table,
                const char* what) {
  auto it = table.find(canonical_token(s));
  if (it == table.end()) throw SemanticError(std::string("unknown ") + what + " value '" + s + "'");
  return it->second;
}

const std::map<std::string, Weather> kWeatherTable = {
    {"clear", Weather::Clear},   {"sunny", Weather::Clear}, {"cloudy", Weather::Cloudy},
    {"overcast", Weather::Cloudy}, {"rain", Weather::Rain}, {"rainy", Weather::Rain},
    {"snow", Weather::Snow},     {"snowy", Weather::Snow},  {"fog", Weather::Fog},
    {"foggy", Weather::Fog}};

const std::map<std::string, Lighting> kLightingTable = {
    {"daylight", Lighting::Daylight},
    {"day", Lighting::Daylight},
    {"dark", Lighting::Dark},
    {"dark not lighted", Lighting::Dark},
    {"dark lighted", Lighting::DarkLighted},
    {"dusk", Lighting::Dark},
    {"dawn", Lighting::Dark}};

const std::map<std::string, RoadType> kRoadTypeTable = {
    {"intersection", RoadType::Intersection},
    {"t junction", RoadType::TJunction},
    {"tjunction", RoadType::TJunction},
    {"three way intersection", RoadType::TJunction},
    {"straight road", RoadType::StraightRoad},
    {"straight", RoadType::StraightRoad},
    {"roadway", RoadType::StraightRoad}};

const std::map<std::string, CrashType> kCrashTypeTable = {
    {"rear end", CrashType::RearEnd},
    {"rearend", CrashType::RearEnd},
    {"frontal", CrashType::Frontal},
    {"head on", CrashType::Frontal},
    {"front to side", CrashType::FrontToSide},
    {"angle", CrashType::FrontToSide},
    {"t bone", CrashType::FrontToSide}};

const std::map<std::string, ParticipantKind> kKindTable = {
    {"vehicle", ParticipantKind::Vehicle},
    {"car", ParticipantKind::Vehicle},
    {"truck", ParticipantKind::Vehicle},
    {"pedestrian", ParticipantKind::Pedestrian}};

const std::map<std::string, CompassDirection> kDirectionTable = {
    {"northbound", CompassDirection::Northbound}, {"north", CompassDirection::Northbound},
    {"southbound", CompassDirection::Southbound}, {"south", CompassDirection::Southbound},
    {"eastbound", CompassDirection::Eastbound},   {"east", CompassDirection::Eastbound},
    {"westbound", CompassDirection::Westbound},   {"west", CompassDirection::Westbound}};

const std::map<std::string, DrivingAction> kActionTable = {
    {"follow lane", DrivingAction::FollowLane},
    {"followed the lane", DrivingAction::FollowLane},
    {"following lane", DrivingAction::FollowLane},
    {"proceeding straight", DrivingAction::FollowLane},
    {"going straight", DrivingAction::FollowLane},
    {"drive straight", DrivingAction::FollowLane},
    {"driving straight", DrivingAction::FollowLane},
    {"went straight", DrivingAction::FollowLane},
    {"go forward", DrivingAction::FollowLane},
    {"going forward", DrivingAction::FollowLane},
    {"proceed straight", DrivingAction::FollowLane},
    {"kept in lane", DrivingAction::FollowLane},
    {"turn left", DrivingAction::TurnLeft},
    {"left turn", DrivingAction::TurnLeft},
    {"turning left", DrivingAction::TurnLeft},
    {"turned left", DrivingAction::TurnLeft},
    {"turn right", DrivingAction::TurnRight},
    {"right turn", DrivingAction::TurnRight},
    {"turning right", DrivingAction::TurnRight},
    {"turned right", DrivingAction::TurnRight},
    {"change lane", DrivingAction::ChangeLane},
    {"lane change", DrivingAction::ChangeLane},
    {"changing lanes", DrivingAction::ChangeLane},
    {"changed lanes", DrivingAction::ChangeLane},
    {"merge", DrivingAction::ChangeLane},
    {"merging", DrivingAction::ChangeLane},
    {"merged", DrivingAction::ChangeLane},
    {"vehicle cross", DrivingAction::VehicleCross},
    {"cross", DrivingAction::VehicleCross},
    {"crossing", DrivingAction::VehicleCross},
    {"crossed the intersection", DrivingAction::VehicleCross},
    {"crossing the intersection", DrivingAction::VehicleCross},
    {"stop", DrivingAction::Stop},
    {"stopped", DrivingAction::Stop},
    {"stopping", DrivingAction::Stop},
    {"came to a stop", DrivingAction::Stop},
    {"brake to a stop", DrivingAction::Stop},
    {"braked to a stop", DrivingAction::Stop},
    {"braking", DrivingAction::Stop},
    {"slowed to a stop", DrivingAction::Stop},
    {"u turn", DrivingAction::UTurn},
    {"uturn", DrivingAction::UTurn},
    {"making a u turn", DrivingAction::UTurn},
    {"drive into roads", DrivingAction::DriveIntoRoads},
    {"drive into road", DrivingAction::DriveIntoRoads},
    {"driving into the road", DrivingAction::DriveIntoRoads},
    {"pulling out", DrivingAction::DriveIntoRoads},
    {"pulled out", DrivingAction::DriveIntoRoads},
    {"entered the roadway", DrivingAction::DriveIntoRoads},
    {"retrograde", DrivingAction::Retrograde},
    {"wrong way", DrivingAction::Retrograde},
    {"driving the wrong way", DrivingAction::Retrograde},
    {"wrong way driving", DrivingAction::Retrograde},
    {"drive off road", DrivingAction::DriveOffRoad},
    {"driving off road", DrivingAction::DriveOffRoad},
    {"drove off the road", DrivingAction::DriveOffRoad},
    {"ran off the road", DrivingAction::DriveOffRoad},
    {"pedestrian cross", DrivingAction::PedestrianCross},
    {"pedestrian crossing", DrivingAction::PedestrianCross},
    {"crossing the street", DrivingAction::PedestrianCross},
    {"crossing the road", DrivingAction::PedestrianCross},
    {"cross the road", DrivingAction::PedestrianCross},
    {"cross the street", DrivingAction::PedestrianCross},
    {"crossed the road", DrivingAction::PedestrianCross},
    {"crossed the street", DrivingAction::PedestrianCross},
    {"pedestrian walk", DrivingAction::PedestrianWalk},
    {"walk", DrivingAction::PedestrianWalk},
    {"walking", DrivingAction::PedestrianWalk},
    {"walking along the road", DrivingAction::PedestrianWalk},
    {"walk along road", DrivingAction::PedestrianWalk},
    {"walking along road", DrivingAction::PedestrianWalk},
    {"walked along the road", DrivingAction::PedestrianWalk},
};

}  // namespace

std::string to_string(Weather w) {
  switch (w) {
    case Weather::Clear: return "clear";
    case Weather::Cloudy: return "cloudy";
    case Weather::Rain: return "rain";
    case Weather::Snow: return "snow";
    case Weather::Fog: return "fog";
  }
  return "clear";
}

std::string to_string(Lighting l) {
  switch (l) {
    case Lighting::Daylight: return "daylight";
    case Lighting::Dark: return "dark";
    case Lighting::DarkLighted: return "dark-lighted";
  }
  return "daylight";
}

std::string to_string(RoadType r) {
  switch (r) {
    case RoadType::Intersection: return "intersection";
    case RoadType::TJunction: return "t-junction";
    case RoadType::StraightRoad: return "straight road";
  }
  return "intersection";
}

std::string to_string(CrashType c) {
  switch (c) {
    case CrashType::RearEnd: return "rear-end";
    case CrashType::Frontal: return "frontal";
    case CrashType::FrontToSide: return "front-to-side";
  }
  return "rear-end";
}

std::string to_string(ParticipantKind k) {
  return k == ParticipantKind::Pedestrian ? "pedestrian" : "vehicle";
}

std::string to_string(CompassDirection d) {
  switch (d) {
    case CompassDirection::Northbound: return "northbound";
    case CompassDirection::Southbound: return "southbound";
    case CompassDirection::Eastbound: return "eastbound";
    case CompassDirection::Westbound: return "westbound";
  }
  return "northbound";
}

std::string to_string(DrivingAction a) {
  switch (a) {
    case DrivingAction::FollowLane: return "follow lane";
    case DrivingAction::TurnLeft: return "turn left";
    case DrivingAction::TurnRight: return "turn right";
    case DrivingAction::ChangeLane: return "change lane";
    case DrivingAction::VehicleCross: return "vehicle cross";
    case DrivingAction::Stop: return "stop";
    case DrivingAction::UTurn: return "u-turn";
    case DrivingAction::DriveIntoRoads: return "drive into roads";
    case DrivingAction::Retrograde: return "retrograde";
    case DrivingAction::DriveOffRoad: return "drive off road";
    case DrivingAction::PedestrianCross: return "pedestrian cross";
    case DrivingAction::PedestrianWalk: return "pedestrian walk";
  }
  return "follow lane";
}

Weather parse_weather(const std::string& s) { return parse_enum(s, kWeatherTable, "weather"); }
Lighting parse_lighting(const std::string& s) { return parse_enum(s, kLightingTable, "lighting"); }
RoadType parse_road_type(const std::string& s) { return parse_enum(s, kRoadTypeTable, "road type"); }
CrashType parse_crash_type(const std::string& s) { return parse_enum(s, kCrashTypeTable, "crash type"); }
ParticipantKind parse_participant_kind(const std::string& s) { return parse_enum(s, kKindTable, "participant kind"); }
CompassDirection parse_compass_direction(const std::string& s) { return parse_enum(s, kDirectionTable, "direction"); }

DrivingAction normalize_action(const std::string& raw) {
  std::string key = canonical_token(raw);
  auto it = kActionTable.find(key);
  if (it != kActionTable.end()) return it->second;
  throw UnknownAction("no action matches phrase '" + raw + "'");
}

bool is_pedestrian_action(DrivingAction a) {
  return a == DrivingAction::PedestrianCross || a == DrivingAction::PedestrianWalk;
}

const ParticipantSpec& AccidentAbstract::participant(const std::string& id) const {
  for (const ParticipantSpec& p : participants) {
    if (p.id == id) return p;
  }
  throw SemanticError("no participant with id '" + id + "'");
}

double default_speed_limit_mps(RoadType type) {
  switch (type) {
    case RoadType::Intersection: return 13.4;
    case RoadType::TJunction: return 13.4;
    case RoadType::StraightRoad: return 22.4;
  }
  return 13.4;
}

AbstractDraft apply_defaults(AbstractDraft draft) {
  if (!draft.weather) draft.weather = Weather::Clear;
  if (!draft.lighting) draft.lighting = Lighting::Daylight;
  if (!draft.collision_location) draft.collision_location = RoadType::Intersection;
  if (!draft.lane_num) {
    int lanes = 1;
    for (const ParticipantSpec& p : draft.participants) lanes = std::max(lanes, p.running_lane);
    draft.lane_num = lanes;
  }
  if (!draft.speed_limit_mph) {
    draft.speed_limit_mph = default_speed_limit_mps(*draft.collision_location) / kMphToMps;
  }
  if (!draft.striker_id && !draft.participants.empty()) {
    draft.striker_id = draft.participants.front().id;
  }
  return draft;
}

AccidentAbstract finalize_abstract(const AbstractDraft& input) {
  AbstractDraft draft = apply_defaults(input);
  if (draft.participants.empty()) throw SemanticError("abstract has no participants");
  if (!draft.crash_type) throw SemanticError("abstract has no crash type");
  if (draft.participants_number &&
      *draft.participants_number != static_cast<int>(draft.participants.size())) {
    throw SemanticError("participants_number " + std::to_string(*draft.participants_number) +
                        " does not match the " + std::to_string(draft.participants.size()) +
                        " listed participants");
  }

  AccidentAbstract out;
  out.weather = *draft.weather;
  out.lighting = *draft.lighting;
  out.collision_location = *draft.collision_location;
  out.lane_num = *draft.lane_num;
  out.speed_limit_mps = *draft.speed_limit_mph * kMphToMps;
  out.participants = draft.participants;
  out.crash.crash_type = *draft.crash_type;
  out.crash.striker_id = *draft.striker_id;

  if (out.lane_num < 1) throw SemanticError("lane_num must be >= 1");
  if (out.speed_limit_mps < 0) throw SemanticError("speed limit must be >= 0");

  std::set<std::string> ids;
  for (const ParticipantSpec& p : out.participants) {
    if (p.id.empty()) throw SemanticError("participant with empty id");
    if (!ids.insert(p.id).second) throw SemanticError("duplicate participant id '" + p.id + "'");
    if (p.running_lane < 1 || p.running_lane > out.lane_num) {
      throw SemanticError("participant '" + p.id + "' running lane " +
                          std::to_string(p.running_lane) + " outside [1, " +
                          std::to_string(out.lane_num) + "]");
    }
    if (p.actions.empty()) throw SemanticError("participant '" + p.id + "' has no actions");
    for (DrivingAction a : p.actions) {
      bool ped = is_pedestrian_action(a);
      if (ped != (p.kind == ParticipantKind::Pedestrian)) {
        throw SemanticError("participant '" + p.id + "' kind does not allow action '" +
                            to_string(a) + "'");
      }
    }
  }
  if (!ids.count(out.crash.striker_id)) {
    throw SemanticError("striker id '" + out.crash.striker_id + "' is not a participant");
  }
  for (const ParticipantSpec& p : out.participants) {
    if (p.id != out.crash.striker_id) out.crash.victim_ids.push_back(p.id);
  }
  if (out.crash.victim_ids.empty()) throw SemanticError("crash needs at least one victim");
  if (out.participant(out.crash.striker_id).kind == ParticipantKind::Pedestrian) {
    throw SemanticError("striker must be a vehicle");
  }
  return out;
}

namespace {

ordered_json require(const ordered_json& j, const char* key) {
  if (!j.contains(key)) throw SchemaError(std::string("missing key '") + key + "'");
  return j.at(key);
}

AbstractDraft draft_from_json(const ordered_json& doc) {
  if (!doc.is_object()) throw SchemaError("abstract document is not a JSON object");
  AbstractDraft draft;
  if (doc.contains("environment")) {
    const auto& env = doc.at("environment");
    if (!env.is_object()) throw SchemaError("'environment' is not an object");
    if (env.contains("weather")) draft.weather = parse_weather(env.at("weather").get<std::string>());
    if (env.contains("lighting")) draft.lighting = parse_lighting(env.at("lighting").get<std::string>());
  }
  if (doc.contains("road")) {
    const auto& road = doc.at("road");
    if (!road.is_object()) throw SchemaError("'road' is not an object");
    if (road.contains("collision_location")) {
      draft.collision_location = parse_road_type(road.at("collision_location").get<std::string>());
    }
    if (road.contains("lane_num")) {
      if (!road.at("lane_num").is_number_integer()) throw SchemaError("'lane_num' is not an integer");
      draft.lane_num = road.at("lane_num").get<int>();
    }
    if (road.contains("speed_limit_mph")) {
      if (!road.at("speed_limit_mph").is_number()) throw SchemaError("'speed_limit_mph' is not a number");
      draft.speed_limit_mph = road.at("speed_limit_mph").get<double>();
    }
  }
  const auto dynamic = require(doc, "dynamic");
  if (!dynamic.is_object()) throw SchemaError("'dynamic' is not an object");
  if (dynamic.contains("participants_number")) {
    if (!dynamic.at("participants_number").is_number_integer()) {
      throw SchemaError("'participants_number' is not an integer");
    }
    draft.participants_number = dynamic.at("participants_number").get<int>();
  }
  const auto participants = require(dynamic, "participants");
  if (!participants.is_array()) throw SchemaError("'participants' is not an array");
  for (const auto& pj : participants) {
    ParticipantSpec p;
    p.id = require(pj, "id").get<std::string>();
    if (pj.contains("kind")) p.kind = parse_participant_kind(pj.at("kind").get<std::string>());
    if (pj.contains("driving_direction")) {
      p.direction = parse_compass_direction(pj.at("driving_direction").get<std::string>());
    } else if (pj.contains("direction")) {
      p.direction = parse_compass_direction(pj.at("direction").get<std::string>());
    }
    if (pj.contains("running_lane")) {
      if (!pj.at("running_lane").is_number_integer()) throw SchemaError("'running_lane' is not an integer");
      p.running_lane = pj.at("running_lane").get<int>();
    }
    const auto actions = require(pj, "actions");
    if (!actions.is_array()) throw SchemaError("participant 'actions' is not an array");
    for (const auto& aj : actions) p.actions.push_back(normalize_action(aj.get<std::string>()));
    draft.participants.push_back(std::move(p));
    if (pj.contains("role") && pj.at("role").get<std::string>() == "striker") {
      if (draft.striker_id) throw SemanticError("more than one striker role");
      draft.striker_id = draft.participants.back().id;
    }
  }
  if (dynamic.contains("crash_type")) {
    draft.crash_type = parse_crash_type(dynamic.at("crash_type").get<std::string>());
  }
  return draft;
}

}  // namespace

AccidentAbstract parse_abstract(const std::string& json_text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("abstract is not valid JSON: ") + e.what());
  }
  return finalize_abstract(draft_from_json(doc));
}

AccidentAbstract parse_abstract_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open abstract file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_abstract(ss.str());
}

std::string serialize_abstract(const AccidentAbstract& a, int indent) {
  ordered_json doc;
  doc["environment"]["weather"] = to_string(a.weather);
  doc["environment"]["lighting"] = to_string(a.lighting);
  doc["road"]["lane_num"] = a.lane_num;
  doc["road"]["collision_location"] = to_string(a.collision_location);
  doc["road"]["speed_limit_mph"] = a.speed_limit_mps / kMphToMps;
  doc["dynamic"]["participants_number"] = static_cast<int>(a.participants.size());
  doc["dynamic"]["participants"] = ordered_json::array();
  for (const ParticipantSpec& p : a.participants) {
    ordered_json pj;
    pj["id"] = p.id;
    pj["kind"] = to_string(p.kind);
    pj["driving_direction"] = to_string(p.direction);
    pj["running_lane"] = p.running_lane;
    pj["actions"] = ordered_json::array();
    for (DrivingAction act : p.actions) pj["actions"].push_back(to_string(act));
    pj["role"] = (p.id == a.crash.striker_id) ? "striker" : "victim";
    doc["dynamic"]["participants"].push_back(std::move(pj));
  }
  doc["dynamic"]["crash_type"] = to_string(a.crash.crash_type);
  return indent >= 0 ? doc.dump(indent) : doc.dump();
}

bool operator==(const ParticipantSpec& a, const ParticipantSpec& b) {
  return a.id == b.id && a.kind == b.kind && a.direction == b.direction &&
         a.running_lane == b.running_lane && a.actions == b.actions;
}

bool operator==(const CrashSpec& a, const CrashSpec& b) {
  return a.crash_type == b.crash_type && a.striker_id == b.striker_id &&
         a.victim_ids == b.victim_ids;
}

bool operator==(const AccidentAbstract& a, const AccidentAbstract& b) {
  return a.weather == b.weather && a.lighting == b.lighting &&
         a.collision_location == b.collision_location && a.lane_num == b.lane_num &&
         std::abs(a.speed_limit_mps - b.speed_limit_mps) < 1e-9 &&
         a.participants == b.participants && a.crash == b.crash;
}

std::string abstract_identity(const AccidentAbstract& a) { return serialize_abstract(a, -1); }

}  // namespace crashsynth
