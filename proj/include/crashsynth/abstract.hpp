#pragma once

#include <optional>
#include <string>
#include <vector>

namespace crashsynth {

enum class Weather { Clear, Cloudy, Rain, Snow, Fog };
enum class Lighting { Daylight, Dark, DarkLighted };
enum class RoadType { Intersection, TJunction, StraightRoad };
enum class CrashType { RearEnd, Frontal, FrontToSide };
enum class ParticipantKind { Vehicle, Pedestrian };
enum class CompassDirection { Northbound, Southbound, Eastbound, Westbound };

enum class DrivingAction {
  FollowLane,
  TurnLeft,
  TurnRight,
  ChangeLane,
  VehicleCross,
  Stop,
  UTurn,
  DriveIntoRoads,
  Retrograde,
  DriveOffRoad,
  PedestrianCross,
  PedestrianWalk,
};

std::string to_string(Weather w);
std::string to_string(Lighting l);
std::string to_string(RoadType r);
std::string to_string(CrashType c);
std::string to_string(ParticipantKind k);
std::string to_string(CompassDirection d);
std::string to_string(DrivingAction a);

Weather parse_weather(const std::string& s);
Lighting parse_lighting(const std::string& s);
RoadType parse_road_type(const std::string& s);
CrashType parse_crash_type(const std::string& s);
ParticipantKind parse_participant_kind(const std::string& s);
CompassDirection parse_compass_direction(const std::string& s);

// Maps a free-text action phrase onto the closed action vocabulary.
// Lowercases, strips punctuation and collapses whitespace before matching a
// synonym table. Throws UnknownAction when nothing matches.
DrivingAction normalize_action(const std::string& raw);

bool is_pedestrian_action(DrivingAction a);

struct ParticipantSpec {
  std::string id;
  ParticipantKind kind = ParticipantKind::Vehicle;
  CompassDirection direction = CompassDirection::Northbound;
  int running_lane = 1;
  std::vector<DrivingAction> actions;
};

struct CrashSpec {
  CrashType crash_type = CrashType::RearEnd;
  std::string striker_id;
  std::vector<std::string> victim_ids;
};

struct AccidentAbstract {
  Weather weather = Weather::Clear;
  Lighting lighting = Lighting::Daylight;
  RoadType collision_location = RoadType::Intersection;
  int lane_num = 1;
  double speed_limit_mps = 13.4;
  std::vector<ParticipantSpec> participants;
  CrashSpec crash;

  const ParticipantSpec& participant(const std::string& id) const;
  const ParticipantSpec& striker() const { return participant(crash.striker_id); }
};

// Pre-validation view with optional fields; what parsing and extraction make
// before defaults are applied.
struct AbstractDraft {
  std::optional<Weather> weather;
  std::optional<Lighting> lighting;
  std::optional<RoadType> collision_location;
  std::optional<int> lane_num;
  std::optional<double> speed_limit_mph;
  std::optional<int> participants_number;
  std::vector<ParticipantSpec> participants;
  std::optional<CrashType> crash_type;
  std::optional<std::string> striker_id;
};

constexpr double kMphToMps = 0.44704;

// Fills missing optional fields: weather Clear, lighting Daylight, per-road
// type speed limit, lane_num = max running lane. Idempotent.
AbstractDraft apply_defaults(AbstractDraft draft);

// Default speed limit in m/s for a road type when the abstract omits it.
double default_speed_limit_mps(RoadType type);

// Validates a defaulted draft and produces the final abstract. Throws
// SemanticError / UnknownAction on inconsistent content.
AccidentAbstract finalize_abstract(const AbstractDraft& draft);

// Parses the abstract JSON document (environment / road / dynamic sections),
// applies defaults and validates. Throws SchemaError / SemanticError.
AccidentAbstract parse_abstract(const std::string& json_text);
AccidentAbstract parse_abstract_file(const std::string& path);

// Canonical serialization; parse(serialize(a)) == a.
std::string serialize_abstract(const AccidentAbstract& a, int indent = 2);

bool operator==(const ParticipantSpec& a, const ParticipantSpec& b);
bool operator==(const CrashSpec& a, const CrashSpec& b);
bool operator==(const AccidentAbstract& a, const AccidentAbstract& b);

// Stable identity for grouping scenario outputs back to their source
// abstract: the canonical compact serialization.
std::string abstract_identity(const AccidentAbstract& a);

}  // namespace crashsynth
