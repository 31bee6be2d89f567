#include "crashsynth/plan.hpp"

#include <numeric>

#include "crashsynth/errors.hpp"

namespace crashsynth {

double ActionTrajectory::duration() const {
  return std::accumulate(dt.begin(), dt.end(), 0.0);
}

double ParticipantPlan::total_time() const {
  double t = 0.0;
  for (const ActionTrajectory& a : actions) t += a.duration();
  return t;
}

const Waypoint& ParticipantPlan::final_waypoint() const {
  if (actions.empty() || actions.back().waypoints.empty()) {
    throw SemanticError("plan for '" + participant_id + "' has no waypoints");
  }
  return actions.back().waypoints.back();
}

}  // namespace crashsynth
