#pragma once

#include <string>
#include <vector>

#include "crashsynth/abstract.hpp"
#include "crashsynth/road_map.hpp"
#include "crashsynth/scenario.hpp"
#include "crashsynth/solver.hpp"

namespace crashsynth {

// Union (convex hull) of every polygon an action chain may sweep; the
// participant's reachable footprint used to locate the collision area.
geom::Polygon drivable_area(const std::vector<ResolvedAction>& chain);

// Intersection of the striker's and a victim's drivable areas, canonicalized
// so argument order does not matter. Throws NoOverlap when disjoint and
// DegenerateCollisionArea when the overlap is below min_area.
geom::Polygon compute_collision_area(const geom::Polygon& striker_area,
                                     const geom::Polygon& victim_area, double min_area);

// One failed site attempt, bucketed for the planning report.
struct SiteFailure {
  std::string site_id;
  std::string bucket;  // trajectory-planning failure | crash-type mismatch | crossing
  std::string code;    // error code or solver status
  std::string detail;
};

enum class PlanStatus { Ok, AllSitesInfeasible };

struct PlanResult {
  PlanStatus status = PlanStatus::AllSitesInfeasible;
  std::vector<ReconstructedScenario> scenarios;
  std::vector<SiteFailure> failures;
};

// Plans the abstract against every candidate site in map order until
// max_scenarios scenarios solved and verified, collecting one bucketed
// failure per unsuccessful site. Throws NoCandidateSite when the map offers
// no site of the right type and lane count.
PlanResult plan_scenario(const AccidentAbstract& abstract, const RoadNetwork& network,
                         const SolverConfig& config, int max_scenarios = 3);

}  // namespace crashsynth
