#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "crashsynth/abstract.hpp"
#include "crashsynth/constraint_set.hpp"
#include "crashsynth/geometry.hpp"
#include "crashsynth/road_map.hpp"
#include "crashsynth/solver.hpp"

namespace crashsynth {

// Forward-direction predicate: the start-to-end displacement must agree in
// sign with the lane axis, checked per coordinate axis. A conjunct is skipped
// when the lane has no extent along that axis.
bool fd_holds(const geom::Vec2& wi, const geom::Vec2& wj, const geom::Vec2& lane_entrance,
              const geom::Vec2& lane_exit, double axis_eps = 1e-6);

// Relative-heading interval in degrees for each crash type.
void crash_angle_band(CrashType type, double& lo_deg, double& hi_deg);

// Road axes count as perpendicular when their unit dot product stays within
// sin(2 degrees).
inline const double kPerpendicularTolerance = std::sin(2.0 * 3.14159265358979323846 / 180.0);

// Everything the relation builder needs to know about one action of one
// participant, resolved against concrete map geometry.
struct ActionGeometry {
  DrivingAction action = DrivingAction::FollowLane;
  std::string participant;
  int position = 0;             // index within the participant's sequence
  bool collision_bound = false; // final action, ends at the crash point
  int waypoints = 5;
  double speed_limit = 13.4;

  // Axis for the forward-direction relation (lane or strip centerline,
  // already oriented along the expected movement).
  geom::Vec2 axis_entrance;
  geom::Vec2 axis_exit;
  bool apply_fd = true;

  int curvature_sign = 0;  // +1 counterclockwise, -1 clockwise, 0 free
  bool stop_at_end = false;

  geom::Polygon start_region;
  geom::Polygon end_region;
  std::vector<geom::Polygon> interior_regions;  // size waypoints-2, empty entries unconstrained

  // Constant road-orientation checks recorded in the constraint dump.
  std::optional<double> perpendicular_dot;  // must satisfy |dot| <= sin(2 deg)
  std::optional<double> acute_dot;          // must satisfy dot > 0

  bool shape_extrapolated = false;      // catalog action beyond the core set
  bool interiors_extrapolated = true;   // interior membership is a catalog refinement

  // Initial-guess path (size >= 2) and speed for the solver seeds.
  std::vector<geom::Vec2> seed_path;
  double seed_speed = 8.0;
};

// Variable indices allocated for one action.
struct ActionVars {
  std::vector<int> x, y, vx, vy;  // per waypoint
  int speed = -1;
  std::vector<int> dt;            // per segment
  int count = 0;

  int last() const { return count - 1; }
};

// Emits the per-action relation groups (regions, forward direction, shape,
// velocity and displacement consistency) and returns the variable handles.
ActionVars build_action_constraints(ConstraintSet& set, const ActionGeometry& geometry,
                                    const SolverConfig& config);

// Consecutive actions of one participant share their junction waypoint.
void build_chain_constraints(ConstraintSet& set, const ActionVars& previous,
                             const ActionVars& next, const std::string& participant,
                             const std::string& next_action_name);

struct CrashParticipantVars {
  std::string participant_id;
  // Variable handles of the final action plus every segment duration of the
  // whole plan (for the simultaneity relation).
  ActionVars final_action;
  std::vector<int> all_dt;
};

// Crash-point coincidence, collision-area membership, simultaneity, and the
// relative-heading band between the striker and every victim.
void build_crash_constraints(ConstraintSet& set, const CrashParticipantVars& striker,
                             const std::vector<CrashParticipantVars>& victims,
                             CrashType crash_type, const geom::Polygon& collision_area,
                             const SolverConfig& config);

// Current position of a participant while its action sequence is resolved.
struct ManeuverState {
  int road = -1;
  int lane = 1;
  geom::Vec2 travel{0.0, 1.0};
};

struct ResolvedAction {
  ActionGeometry geometry;
  ManeuverState next_state;
  int source_road = -1;
  int source_lane = 1;
  std::optional<int> dest_road;
  std::optional<int> dest_lane;
  // Full-width polygons this action may sweep, for drivable-area unions.
  std::vector<geom::Polygon> area_polygons;
};

// The action catalog: maps one abstract action onto regions, shape relations
// and destination state against the bound site geometry. `collision_seed`
// aims the seed path when the action ends at the crash (pass the collision
// area centroid); `seed_entry` chains the seed path to the previous action.
ResolvedAction resolve_action(const RoadNetwork& network, const Site& site,
                              const ManeuverState& state, const ParticipantSpec& participant,
                              DrivingAction action, int position, bool is_final,
                              double abstract_speed_limit,
                              const std::optional<geom::Vec2>& collision_seed,
                              const std::optional<geom::Vec2>& seed_entry,
                              const SolverConfig& config);

// Initial maneuver state for a participant binding.
ManeuverState initial_state(const RoadNetwork& network, const ParticipantBinding& binding);

}  // namespace crashsynth
