#include "crashsynth/verifier.hpp"

#include <cmath>
#include <cstdio>

#include "crashsynth/constraint_builder.hpp"
#include "crashsynth/errors.hpp"

namespace crashsynth {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

struct Checker {
  const SolverConfig& cfg;
  std::vector<VerifyIssue>& issues;

  void equality(int group, const std::string& pid, const std::string& label, double residual,
                const std::string& detail) {
    if (std::abs(residual) > cfg.eps) {
      issues.push_back({group, pid, label, residual, detail});
    }
  }

  // `margin` must be strictly positive for the inequality to hold.
  void inequality(int group, const std::string& pid, const std::string& label, double margin,
                  const std::string& detail) {
    if (margin <= cfg.ineq_margin) {
      issues.push_back({group, pid, label, margin, detail});
    }
  }

  void region(int group, const std::string& pid, const std::string& label,
              const geom::Polygon& poly, const geom::Vec2& p, int waypoint) {
    if (poly.size() < 3) return;  // unconstrained
    const double margin = geom::convex_inset_margin(poly, p);
    inequality(group, pid, label, margin,
               "waypoint " + std::to_string(waypoint) + " at (" + fmt(p.x) + ", " + fmt(p.y) +
                   ") margin " + fmt(margin));
  }
};

geom::Vec2 final_heading(const ParticipantScenarioPlan& plan) {
  const auto& wps = plan.actions.back().waypoints;
  const geom::Vec2 chord = wps[wps.size() - 1].pos() - wps[wps.size() - 2].pos();
  if (geom::norm(chord) < 1e-12) {
    throw SemanticError("participant " + plan.id + " has a degenerate final chord");
  }
  return geom::normalized(chord);
}

void verify_action(const PlannedAction& act, const std::string& pid, Checker& check) {
  const ActionGeometry& g = act.geometry;
  const auto& wps = act.waypoints;
  const std::size_t e = wps.size();
  if (e < 2 || act.dt.size() != e - 1) {
    throw SemanticError("participant " + pid + " action " + to_string(g.action) +
                        " has inconsistent waypoint/segment counts");
  }
  if (g.interior_regions.size() + 2 != e && !g.interior_regions.empty()) {
    throw SemanticError("participant " + pid + " action " + to_string(g.action) +
                        " waypoint count disagrees with its catalog geometry");
  }
  const std::string name = to_string(g.action);

  // Group 1: start/end membership and forward direction.
  check.region(1, pid, name + " start region", g.start_region, wps.front().pos(), 0);
  check.region(1, pid, name + " end region", g.end_region, wps.back().pos(),
               static_cast<int>(e) - 1);
  if (g.apply_fd) {
    const bool ok = fd_holds(wps.front().pos(), wps.back().pos(), g.axis_entrance, g.axis_exit);
    if (!ok) {
      check.issues.push_back({1, pid, name + " forward direction", -1.0,
                              "displacement opposes the lane axis"});
    }
  }

  // Group 2: interior membership, curvature sign, road-orientation constants.
  for (std::size_t i = 1; i + 1 < e && !g.interior_regions.empty(); ++i) {
    check.region(2, pid, name + " interior region", g.interior_regions[i - 1], wps[i].pos(),
                 static_cast<int>(i));
  }
  if (g.curvature_sign != 0) {
    for (std::size_t i = 0; i + 2 < e; ++i) {
      const double turn = geom::cross(wps[i + 1].pos() - wps[i].pos(),
                                      wps[i + 2].pos() - wps[i + 1].pos());
      check.inequality(2, pid, name + " curvature sign", turn * g.curvature_sign,
                       "triple at waypoint " + std::to_string(i));
    }
  }
  if (g.perpendicular_dot) {
    check.inequality(2, pid, name + " perpendicular roads",
                     kPerpendicularTolerance - std::abs(*g.perpendicular_dot),
                     "axis dot " + fmt(*g.perpendicular_dot));
  }
  if (g.acute_dot) {
    check.inequality(2, pid, name + " acute crossing", *g.acute_dot,
                     "axis dot " + fmt(*g.acute_dot));
  }

  // Group 3: speed consistency, limits, per-segment displacement, durations.
  const bool stop_terminal = g.stop_at_end;
  const double v_ref = wps.front().v;
  for (std::size_t i = 0; i < e; ++i) {
    const bool terminal = stop_terminal && i + 1 == e;
    check.equality(3, pid, name + " speed magnitude",
                   std::hypot(wps[i].vx, wps[i].vy) - wps[i].v,
                   "waypoint " + std::to_string(i));
    check.equality(3, pid, name + (terminal ? " terminal stop" : " constant speed"),
                   wps[i].v - (terminal ? 0.0 : v_ref), "waypoint " + std::to_string(i));
  }
  check.inequality(3, pid, name + " speed limit", g.speed_limit - v_ref,
                   "speed " + fmt(v_ref) + " limit " + fmt(g.speed_limit));
  check.inequality(3, pid, name + " positive speed", v_ref, "speed " + fmt(v_ref));
  for (std::size_t c = 0; c + 1 < e; ++c) {
    const double dt = act.dt[c];
    if (dt < check.cfg.dt_min - check.cfg.eps || dt > check.cfg.dt_max + check.cfg.eps) {
      check.issues.push_back({3, pid, name + " segment duration", dt,
                              "segment " + std::to_string(c) + " outside bounds"});
    }
    const double dx = wps[c + 1].x - wps[c].x - 0.5 * (wps[c].vx + wps[c + 1].vx) * dt;
    const double dy = wps[c + 1].y - wps[c].y - 0.5 * (wps[c].vy + wps[c + 1].vy) * dt;
    check.equality(3, pid, name + " displacement x", dx, "segment " + std::to_string(c));
    check.equality(3, pid, name + " displacement y", dy, "segment " + std::to_string(c));
  }
}

}  // namespace

VerifyReport verify_scenario(const ReconstructedScenario& s, const SolverConfig& config) {
  VerifyReport report;
  Checker check{config, report.issues};

  for (const auto& p : s.participants) {
    if (p.actions.empty()) throw SemanticError("participant " + p.id + " has no actions");
    for (const auto& act : p.actions) verify_action(act, p.id, check);

    // Group 4: consecutive actions share their junction waypoint.
    for (std::size_t k = 0; k + 1 < p.actions.size(); ++k) {
      const Waypoint& a = p.actions[k].waypoints.back();
      const Waypoint& b = p.actions[k + 1].waypoints.front();
      check.equality(4, p.id, "chain position x", b.x - a.x, "actions " + std::to_string(k) +
                                                                 "/" + std::to_string(k + 1));
      check.equality(4, p.id, "chain position y", b.y - a.y, "actions " + std::to_string(k) +
                                                                 "/" + std::to_string(k + 1));
    }
  }

  // Group 5: crash coupling.
  const ParticipantScenarioPlan& striker = s.striker();
  const Waypoint& sw = striker.final_waypoint();
  if (s.collision_area.size() < 3) {
    throw SemanticError("scenario carries a degenerate collision area");
  }
  check.region(5, striker.id, "collision area", s.collision_area, sw.pos(),
               static_cast<int>(striker.actions.back().waypoints.size()) - 1);

  double lo_deg = 0.0, hi_deg = 180.0;
  crash_angle_band(s.abstract.crash.crash_type, lo_deg, hi_deg);
  const geom::Vec2 hs = final_heading(striker);

  for (const std::string& vid : s.abstract.crash.victim_ids) {
    const ParticipantScenarioPlan& victim = s.participant(vid);
    const Waypoint& vw = victim.final_waypoint();
    check.equality(5, vid, "crash point x", vw.x - sw.x, "vs striker " + striker.id);
    check.equality(5, vid, "crash point y", vw.y - sw.y, "vs striker " + striker.id);
    check.equality(5, vid, "simultaneity", victim.total_time() - striker.total_time(),
                   "plan durations must match");

    const double angle = geom::angle_between_deg(hs, final_heading(victim));
    if (angle < lo_deg - config.eps || angle > hi_deg + config.eps) {
      check.issues.push_back({5, vid, "crash angle band", angle,
                              "relative heading " + fmt(angle) + " outside [" + fmt(lo_deg) +
                                  ", " + fmt(hi_deg) + "] for " +
                                  to_string(s.abstract.crash.crash_type)});
    }
  }
  return report;
}

std::string issue_bucket(const VerifyIssue& issue) {
  if (issue.label.find("crash angle band") != std::string::npos) return "crash-type mismatch";
  if (issue.label.find("region") != std::string::npos ||
      issue.label.find("collision area") != std::string::npos) {
    return "crossing";
  }
  return "trajectory-planning failure";
}

}  // namespace crashsynth
