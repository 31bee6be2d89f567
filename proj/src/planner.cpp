#include "crashsynth/planner.hpp"

#include <algorithm>
#include <cmath>

#include "crashsynth/constraint_builder.hpp"
#include "crashsynth/errors.hpp"
#include "crashsynth/verifier.hpp"

namespace crashsynth {

namespace {

// Rotates the vertex ring to start at the lexicographically smallest vertex
// so equal shapes compare equal regardless of construction order.
geom::Polygon canonical(geom::Polygon p) {
  p = geom::normalize_polygon(p);
  if (p.size() < 2) return p;
  std::size_t best = 0;
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (p[i].x < p[best].x - 1e-12 ||
        (std::abs(p[i].x - p[best].x) <= 1e-12 && p[i].y < p[best].y - 1e-12)) {
      best = i;
    }
  }
  std::rotate(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(best), p.end());
  return p;
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& s : parts) {
    if (!out.empty()) out += ", ";
    out += s;
  }
  return out;
}

// Buckets a solver conflict hint: crash-angle conflicts indicate the crash
// type cannot be realized, pure region conflicts indicate paths that never
// cross, anything else is a generic planning failure.
std::string solve_bucket(const std::vector<std::string>& conflicting) {
  bool all_region = !conflicting.empty();
  for (const auto& c : conflicting) {
    if (c.find("crash angle") != std::string::npos) return "crash-type mismatch";
    if (c.find("region") == std::string::npos &&
        c.find("collision area") == std::string::npos) {
      all_region = false;
    }
  }
  return all_region ? "crossing" : "trajectory-planning failure";
}

std::string error_bucket(const Error& e) {
  const std::string& code = e.code();
  if (code == "NoOverlap" || code == "DegenerateCollisionArea") return "crossing";
  return "trajectory-planning failure";
}

struct ParticipantBuild {
  const ParticipantSpec* spec = nullptr;
  std::vector<ResolvedAction> chain;
  std::vector<ActionVars> vars;
  CrashParticipantVars crash_vars;
};

// Internal signal: the solver gave up on a site; carries the conflict hint.
struct SolveFailed {
  SolveStatus status;
  std::vector<std::string> conflicting;
};

PlannedAction extract_action(const ResolvedAction& resolved, const ActionVars& vars,
                             const std::vector<double>& model) {
  PlannedAction act;
  act.geometry = resolved.geometry;
  act.source_road = resolved.source_road;
  act.source_lane = resolved.source_lane;
  act.dest_road = resolved.dest_road;
  act.dest_lane = resolved.dest_lane;
  for (std::size_t i = 0; i < vars.x.size(); ++i) {
    Waypoint w;
    w.x = model[static_cast<std::size_t>(vars.x[i])];
    w.y = model[static_cast<std::size_t>(vars.y[i])];
    w.vx = model[static_cast<std::size_t>(vars.vx[i])];
    w.vy = model[static_cast<std::size_t>(vars.vy[i])];
    w.v = std::hypot(w.vx, w.vy);
    act.waypoints.push_back(w);
  }
  for (int idx : vars.dt) act.dt.push_back(model[static_cast<std::size_t>(idx)]);
  return act;
}

ReconstructedScenario attempt_site(const AccidentAbstract& abstract, const RoadNetwork& network,
                                   int site_index, const SolverConfig& config) {
  const Site& site = network.sites[static_cast<std::size_t>(site_index)];
  const SiteBinding binding = convert_info(network, site_index, abstract);

  // First pass: resolve the chains without a crash seed to get each
  // participant's reachable footprint.
  std::vector<geom::Polygon> areas;
  for (const auto& spec : abstract.participants) {
    auto chain = resolve_participant_chain(network, site, binding.participants.at(spec.id),
                                           spec, abstract.speed_limit_mps, std::nullopt, config);
    areas.push_back(drivable_area(chain));
  }

  geom::Polygon collision_area;
  {
    const auto& striker = abstract.striker();
    std::size_t striker_pos = 0;
    for (std::size_t i = 0; i < abstract.participants.size(); ++i) {
      if (abstract.participants[i].id == striker.id) striker_pos = i;
    }
    collision_area = areas[striker_pos];
    for (std::size_t i = 0; i < abstract.participants.size(); ++i) {
      if (i == striker_pos) continue;
      collision_area =
          compute_collision_area(collision_area, areas[i], config.min_collision_area);
    }
  }
  const geom::Vec2 crash_seed = geom::polygon_centroid(collision_area);

  // Second pass: rebuild the chains aimed at the collision area and emit the
  // full constraint system.
  ConstraintSet set;
  std::vector<ParticipantBuild> builds;
  for (const auto& spec : abstract.participants) {
    ParticipantBuild b;
    b.spec = &spec;
    b.chain = resolve_participant_chain(network, site, binding.participants.at(spec.id), spec,
                                        abstract.speed_limit_mps, crash_seed, config);
    for (std::size_t k = 0; k < b.chain.size(); ++k) {
      ActionVars vars = build_action_constraints(set, b.chain[k].geometry, config);
      if (k > 0) {
        build_chain_constraints(set, b.vars.back(), vars, spec.id,
                                to_string(b.chain[k].geometry.action));
      }
      for (int idx : vars.dt) b.crash_vars.all_dt.push_back(idx);
      b.vars.push_back(std::move(vars));
    }
    b.crash_vars.participant_id = spec.id;
    b.crash_vars.final_action = b.vars.back();
    builds.push_back(std::move(b));
  }

  const CrashParticipantVars* striker_vars = nullptr;
  std::vector<CrashParticipantVars> victim_vars;
  for (const auto& b : builds) {
    if (b.spec->id == abstract.crash.striker_id) {
      striker_vars = &b.crash_vars;
    } else {
      victim_vars.push_back(b.crash_vars);
    }
  }
  build_crash_constraints(set, *striker_vars, victim_vars, abstract.crash.crash_type,
                          collision_area, config);

  const SolveOutcome outcome = solve(set, config);
  if (outcome.status != SolveStatus::Sat) {
    throw SolveFailed{outcome.status, outcome.conflicting};
  }

  ReconstructedScenario scenario;
  scenario.abstract = abstract;
  scenario.site_id = site.id;
  scenario.collision_area = collision_area;
  for (const auto& b : builds) {
    ParticipantScenarioPlan plan;
    plan.id = b.spec->id;
    plan.kind = b.spec->kind;
    plan.is_striker = (b.spec->id == abstract.crash.striker_id);
    for (std::size_t k = 0; k < b.chain.size(); ++k) {
      plan.actions.push_back(extract_action(b.chain[k], b.vars[k], outcome.model));
    }
    scenario.participants.push_back(std::move(plan));
  }
  return scenario;
}

}  // namespace

geom::Polygon drivable_area(const std::vector<ResolvedAction>& chain) {
  std::vector<geom::Vec2> points;
  for (const auto& resolved : chain) {
    for (const auto& poly : resolved.area_polygons) {
      points.insert(points.end(), poly.begin(), poly.end());
    }
  }
  if (points.size() < 3) throw GeometryError("action chain sweeps no area");
  return canonical(geom::convex_hull(std::move(points)));
}

geom::Polygon compute_collision_area(const geom::Polygon& striker_area,
                                     const geom::Polygon& victim_area, double min_area) {
  geom::Polygon overlap = geom::convex_intersection(striker_area, victim_area);
  if (overlap.size() < 3) {
    throw NoOverlap("striker and victim drivable areas do not intersect");
  }
  overlap = canonical(overlap);
  const double area = geom::polygon_area(overlap);
  if (area < min_area) {
    throw DegenerateCollisionArea("overlap area " + std::to_string(area) +
                                  " m^2 is below the minimum " + std::to_string(min_area));
  }
  return overlap;
}

PlanResult plan_scenario(const AccidentAbstract& abstract, const RoadNetwork& network,
                         const SolverConfig& config, int max_scenarios) {
  const int required = cal_max_lanes(abstract);
  const std::vector<int> candidates =
      enumerate_candidates(network, abstract.collision_location, required);
  if (candidates.empty()) {
    throw NoCandidateSite("no " + to_string(abstract.collision_location) + " site with " +
                          std::to_string(required) + " lanes on every leg");
  }

  PlanResult result;
  for (int site_index : candidates) {
    if (static_cast<int>(result.scenarios.size()) >= max_scenarios) break;
    const std::string& site_id = network.sites[static_cast<std::size_t>(site_index)].id;
    try {
      ReconstructedScenario scenario = attempt_site(abstract, network, site_index, config);
      const VerifyReport report = verify_scenario(scenario, config);
      if (!report.ok()) {
        const VerifyIssue& first = report.issues.front();
        result.failures.push_back({site_id, issue_bucket(first), "VerificationFailed",
                                   std::to_string(report.issues.size()) +
                                       " re-verifier issues, first: " + first.label + " (" +
                                       first.detail + ")"});
        continue;
      }
      result.scenarios.push_back(std::move(scenario));
    } catch (const SolveFailed& f) {
      result.failures.push_back({site_id, solve_bucket(f.conflicting), to_string(f.status),
                                 "solve failed" + (f.conflicting.empty()
                                                       ? std::string()
                                                       : ": " + join(f.conflicting))});
    } catch (const Error& e) {
      result.failures.push_back({site_id, error_bucket(e), e.code(), e.what()});
    }
  }

  result.status = result.scenarios.empty() ? PlanStatus::AllSitesInfeasible : PlanStatus::Ok;
  return result;
}

}  // namespace crashsynth
