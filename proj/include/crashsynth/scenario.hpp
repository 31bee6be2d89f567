#pragma once

#include <optional>
#include <string>
#include <vector>

#include "crashsynth/abstract.hpp"
#include "crashsynth/constraint_builder.hpp"
#include "crashsynth/geometry.hpp"
#include "crashsynth/plan.hpp"
#include "crashsynth/road_map.hpp"

namespace crashsynth {

// One solved action: the catalog geometry it was built from plus the solved
// waypoints and segment durations.
struct PlannedAction {
  ActionGeometry geometry;
  std::vector<Waypoint> waypoints;
  std::vector<double> dt;

  int source_road = -1;
  int source_lane = 1;
  std::optional<int> dest_road;
  std::optional<int> dest_lane;

  double duration() const;
};

struct ParticipantScenarioPlan {
  std::string id;
  ParticipantKind kind = ParticipantKind::Vehicle;
  bool is_striker = false;
  std::vector<PlannedAction> actions;

  double total_time() const;
  const Waypoint& final_waypoint() const;
};

struct ReconstructedScenario {
  AccidentAbstract abstract;
  std::string site_id;
  std::vector<ParticipantScenarioPlan> participants;
  geom::Polygon collision_area;

  const ParticipantScenarioPlan& participant(const std::string& id) const;
  const ParticipantScenarioPlan& striker() const;
};

// Scenario file round-trip. Waypoints are stored as {x, y, v, t} with t the
// cumulative plan time; region geometry is not stored and must be re-derived
// with rebind_scenario before constraint-level verification.
std::string serialize_scenario(const ReconstructedScenario& s, int indent = 2);
ReconstructedScenario parse_scenario(const std::string& json_text);
ReconstructedScenario parse_scenario_file(const std::string& path);

// Resolves a participant's whole action sequence against one site, chaining
// maneuver state and seed paths. `collision_seed` aims the final action.
std::vector<ResolvedAction> resolve_participant_chain(
    const RoadNetwork& network, const Site& site, const ParticipantBinding& binding,
    const ParticipantSpec& spec, double abstract_speed_limit,
    const std::optional<geom::Vec2>& collision_seed, const SolverConfig& config);

// Re-derives geometry (regions, axes, flags) for a loaded scenario by
// replaying the deterministic site binding and action catalog against the
// map, keeping the loaded waypoints.
void rebind_scenario(ReconstructedScenario& s, const RoadNetwork& network,
                     const SolverConfig& config);

}  // namespace crashsynth
