#pragma once

#include <string>
#include <vector>

#include "crashsynth/abstract.hpp"
#include "crashsynth/geometry.hpp"

namespace crashsynth {

struct Waypoint {
  double x = 0.0;
  double y = 0.0;
  // Velocity vector at the waypoint; v is its magnitude, kept explicit so
  // exports stay simple.
  double vx = 0.0;
  double vy = 0.0;
  double v = 0.0;

  geom::Vec2 pos() const { return {x, y}; }
  geom::Vec2 vel() const { return {vx, vy}; }
};

struct ActionTrajectory {
  DrivingAction action = DrivingAction::FollowLane;
  std::vector<Waypoint> waypoints;
  std::vector<double> dt;  // per-segment durations, size waypoints-1

  double duration() const;
};

struct ParticipantPlan {
  std::string participant_id;
  std::vector<ActionTrajectory> actions;

  double total_time() const;
  const Waypoint& final_waypoint() const;
};

}  // namespace crashsynth
