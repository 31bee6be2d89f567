#include "crashsynth/constraint_builder.hpp"

#include <algorithm>
#include <cmath>

#include "crashsynth/errors.hpp"

namespace crashsynth {

namespace {

constexpr double kPi = 3.14159265358979323846;
// Heading-band edges are pulled in by this much so solved trajectories sit
// strictly inside the crash-type interval.
constexpr double kBandInsetDeg = 1.0;

double deg_cos(double deg) { return std::cos(deg * kPi / 180.0); }

struct BoundingBox {
  double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;

  void add(const geom::Vec2& p) {
    xlo = std::min(xlo, p.x);
    xhi = std::max(xhi, p.x);
    ylo = std::min(ylo, p.y);
    yhi = std::max(yhi, p.y);
  }
  void add(const geom::Polygon& poly) {
    for (const geom::Vec2& p : poly) add(p);
  }
  bool valid() const { return xlo <= xhi; }
  void pad(double m) {
    xlo -= m;
    xhi += m;
    ylo -= m;
    yhi += m;
  }
};

// Evenly resamples a polyline to n points by arclength.
std::vector<geom::Vec2> sample_polyline(const std::vector<geom::Vec2>& path, int n) {
  std::vector<geom::Vec2> out;
  if (path.empty() || n <= 0) return out;
  if (path.size() == 1) {
    out.assign(static_cast<std::size_t>(n), path.front());
    return out;
  }
  std::vector<double> cumulative{0.0};
  for (std::size_t i = 1; i < path.size(); ++i) {
    cumulative.push_back(cumulative.back() + geom::distance(path[i - 1], path[i]));
  }
  double total = cumulative.back();
  for (int i = 0; i < n; ++i) {
    double target = total * (n == 1 ? 0.0 : static_cast<double>(i) / (n - 1));
    std::size_t seg = 1;
    while (seg + 1 < cumulative.size() && cumulative[seg] < target) ++seg;
    double span = cumulative[seg] - cumulative[seg - 1];
    double t = span < 1e-12 ? 0.0 : (target - cumulative[seg - 1]) / span;
    out.push_back(path[seg - 1] + (path[seg] - path[seg - 1]) * t);
  }
  return out;
}

void emit_region(ConstraintSet& set, const geom::Polygon& region, int xi, int yi,
                 RelationTag tag) {
  for (std::size_t k = 0; k < region.size(); ++k) {
    const geom::Vec2& a = region[k];
    const geom::Vec2& b = region[(k + 1) % region.size()];
    double ex = b.x - a.x;
    double ey = b.y - a.y;
    // Inside a CCW polygon: cross(edge, p - a) >= 0 for every edge.
    Expr rel = Expr::constant(ex) * (set.var(yi) - a.y) - Expr::constant(ey) * (set.var(xi) - a.x);
    set.add_inequality(std::move(rel), tag);
  }
}

}  // namespace

bool fd_holds(const geom::Vec2& wi, const geom::Vec2& wj, const geom::Vec2& lane_entrance,
              const geom::Vec2& lane_exit, double axis_eps) {
  double lx = lane_exit.x - lane_entrance.x;
  double ly = lane_exit.y - lane_entrance.y;
  if (std::abs(lx) > axis_eps && (wj.x - wi.x) * lx <= 0.0) return false;
  if (std::abs(ly) > axis_eps && (wj.y - wi.y) * ly <= 0.0) return false;
  return true;
}

void crash_angle_band(CrashType type, double& lo_deg, double& hi_deg) {
  switch (type) {
    case CrashType::RearEnd:
      lo_deg = 0.0;
      hi_deg = 30.0;
      return;
    case CrashType::Frontal:
      lo_deg = 150.0;
      hi_deg = 180.0;
      return;
    case CrashType::FrontToSide:
      lo_deg = 60.0;
      hi_deg = 120.0;
      return;
  }
}

ActionVars build_action_constraints(ConstraintSet& set, const ActionGeometry& g,
                                    const SolverConfig& cfg) {
  const int e = g.waypoints;
  if (e < 2) throw SemanticError("an action needs at least two waypoints");
  if (g.curvature_sign != 0 && e < 3) {
    throw SemanticError("curved actions need at least three waypoints");
  }
  if (!g.interior_regions.empty() &&
      static_cast<int>(g.interior_regions.size()) != e - 2) {
    throw SemanticError("interior region count does not match waypoint count");
  }

  std::string action_name = to_string(g.action);
  std::replace(action_name.begin(), action_name.end(), ' ', '_');
  const std::string prefix = g.participant + ".a" + std::to_string(g.position);

  auto tag = [&](int group, const std::string& label, bool extrapolated = false) {
    RelationTag t;
    t.group = group;
    t.participant = g.participant;
    t.action = action_name;
    t.label = label;
    t.extrapolated = extrapolated;
    return t;
  };

  // Loose fallback bounds from everything this action can touch.
  BoundingBox everywhere;
  everywhere.add(g.start_region);
  everywhere.add(g.end_region);
  for (const geom::Polygon& r : g.interior_regions) everywhere.add(r);
  for (const geom::Vec2& p : g.seed_path) everywhere.add(p);
  if (!everywhere.valid()) throw SemanticError("action '" + action_name + "' has no geometry");
  everywhere.pad(30.0);

  std::vector<geom::Vec2> seeds = sample_polyline(g.seed_path, e);
  if (seeds.empty()) {
    seeds.assign(static_cast<std::size_t>(e),
                 geom::Vec2{(everywhere.xlo + everywhere.xhi) * 0.5,
                            (everywhere.ylo + everywhere.yhi) * 0.5});
  }

  ActionVars vars;
  vars.count = e;
  for (int i = 0; i < e; ++i) {
    const geom::Polygon* region = nullptr;
    if (i == 0 && !g.start_region.empty()) region = &g.start_region;
    if (i == e - 1 && !g.end_region.empty()) region = &g.end_region;
    if (i > 0 && i < e - 1 && !g.interior_regions.empty() &&
        !g.interior_regions[static_cast<std::size_t>(i - 1)].empty()) {
      region = &g.interior_regions[static_cast<std::size_t>(i - 1)];
    }
    BoundingBox box = everywhere;
    if (region) {
      BoundingBox rb;
      rb.add(*region);
      rb.pad(0.5);
      box = rb;
    }
    const std::string w = prefix + ".w" + std::to_string(i);
    vars.x.push_back(set.add_variable(w + ".x", box.xlo, box.xhi, seeds[static_cast<std::size_t>(i)].x, 2.0));
    vars.y.push_back(set.add_variable(w + ".y", box.ylo, box.yhi, seeds[static_cast<std::size_t>(i)].y, 2.0));

    geom::Vec2 dir{0.0, 0.0};
    if (i + 1 < e) {
      dir = seeds[static_cast<std::size_t>(i + 1)] - seeds[static_cast<std::size_t>(i)];
    } else {
      dir = seeds[static_cast<std::size_t>(i)] - seeds[static_cast<std::size_t>(i - 1)];
    }
    double len = geom::norm(dir);
    geom::Vec2 vdir = len > 1e-9 ? dir / len : geom::Vec2{1.0, 0.0};
    double vseed = (g.stop_at_end && i == e - 1) ? 0.0 : g.seed_speed;
    vars.vx.push_back(set.add_variable(w + ".vx", -cfg.speed_cap, cfg.speed_cap, vdir.x * vseed, 1.5));
    vars.vy.push_back(set.add_variable(w + ".vy", -cfg.speed_cap, cfg.speed_cap, vdir.y * vseed, 1.5));
  }
  vars.speed = set.add_variable(prefix + ".s", cfg.speed_min, cfg.speed_cap, g.seed_speed, 0.8);
  for (int c = 0; c + 1 < e; ++c) {
    double chord = geom::distance(seeds[static_cast<std::size_t>(c)], seeds[static_cast<std::size_t>(c + 1)]);
    double dt_seed = std::clamp(chord / std::max(g.seed_speed, 0.5), cfg.dt_min, cfg.dt_max);
    vars.dt.push_back(set.add_variable(prefix + ".dt" + std::to_string(c), cfg.dt_min, cfg.dt_max,
                                       dt_seed, 0.4));
  }

  // Group 1: membership of the start and end waypoints in their regions.
  if (!g.start_region.empty()) {
    emit_region(set, g.start_region, vars.x.front(), vars.y.front(),
                tag(1, "start region", g.shape_extrapolated));
  }
  if (!g.end_region.empty()) {
    emit_region(set, g.end_region, vars.x.back(), vars.y.back(),
                tag(1, g.collision_bound ? "eq4 end region" : "end region", g.shape_extrapolated));
  }
  // Group 2: interior membership (catalog refinement).
  for (int i = 1; i + 1 < e; ++i) {
    if (g.interior_regions.empty()) break;
    const geom::Polygon& region = g.interior_regions[static_cast<std::size_t>(i - 1)];
    if (region.empty()) continue;
    emit_region(set, region, vars.x[static_cast<std::size_t>(i)], vars.y[static_cast<std::size_t>(i)],
                tag(2, "interior region", g.interiors_extrapolated));
  }

  // Group 1, Eq 1: forward direction along the bound axis, one conjunct per
  // coordinate axis with nonzero extent.
  if (g.apply_fd) {
    double lx = g.axis_exit.x - g.axis_entrance.x;
    double ly = g.axis_exit.y - g.axis_entrance.y;
    if (std::abs(lx) > 1e-6) {
      set.add_inequality((set.var(vars.x.back()) - set.var(vars.x.front())) * lx,
                         tag(1, "eq1 forward x"));
    }
    if (std::abs(ly) > 1e-6) {
      set.add_inequality((set.var(vars.y.back()) - set.var(vars.y.front())) * ly,
                         tag(1, "eq1 forward y"));
    }
  }

  // Group 2, Eq 5: consistent turn orientation over consecutive triples.
  if (g.curvature_sign != 0) {
    for (int i = 0; i + 2 < e; ++i) {
      Expr ax = set.var(vars.x[static_cast<std::size_t>(i + 1)]) - set.var(vars.x[static_cast<std::size_t>(i)]);
      Expr ay = set.var(vars.y[static_cast<std::size_t>(i + 1)]) - set.var(vars.y[static_cast<std::size_t>(i)]);
      Expr bx = set.var(vars.x[static_cast<std::size_t>(i + 2)]) - set.var(vars.x[static_cast<std::size_t>(i)]);
      Expr by = set.var(vars.y[static_cast<std::size_t>(i + 2)]) - set.var(vars.y[static_cast<std::size_t>(i)]);
      Expr turn = ax * by - ay * bx;
      if (g.curvature_sign < 0) turn = -turn;
      set.add_inequality(std::move(turn), tag(2, "eq5 curvature", g.shape_extrapolated));
    }
  }

  // Group 2, Eq 6/7: constant road-orientation checks, recorded so dumps and
  // re-verification can see them.
  if (g.perpendicular_dot) {
    set.add_inequality(Expr::constant(kPerpendicularTolerance - std::abs(*g.perpendicular_dot)),
                       tag(2, "eq6 perpendicular roads"));
  }
  if (g.acute_dot) {
    set.add_inequality(Expr::constant(*g.acute_dot), tag(2, "eq7 acute crossing"));
  }

  // Group 3, Eq 9: one speed magnitude per action, bounded by the limit.
  for (int i = 0; i < e; ++i) {
    if (g.stop_at_end && i == e - 1) {
      set.add_equality(set.var(vars.vx.back()), tag(3, "eq9 terminal stop", g.shape_extrapolated));
      set.add_equality(set.var(vars.vy.back()), tag(3, "eq9 terminal stop", g.shape_extrapolated));
      continue;
    }
    Expr speed_sq = set.var(vars.vx[static_cast<std::size_t>(i)]) * set.var(vars.vx[static_cast<std::size_t>(i)]) +
                    set.var(vars.vy[static_cast<std::size_t>(i)]) * set.var(vars.vy[static_cast<std::size_t>(i)]) -
                    set.var(vars.speed) * set.var(vars.speed);
    set.add_equality(std::move(speed_sq), tag(3, "eq9 constant speed"));
  }
  set.add_inequality(Expr::constant(g.speed_limit) - set.var(vars.speed), tag(3, "eq9 speed limit"));
  set.add_inequality(set.var(vars.speed), tag(3, "eq9 positive speed"));

  // Group 3, Eq 8: per-segment displacement equals the trapezoidal average
  // velocity times the segment duration (telescopes to the whole action).
  for (int c = 0; c + 1 < e; ++c) {
    Expr mean_vx = (set.var(vars.vx[static_cast<std::size_t>(c)]) + set.var(vars.vx[static_cast<std::size_t>(c + 1)])) * 0.5;
    Expr mean_vy = (set.var(vars.vy[static_cast<std::size_t>(c)]) + set.var(vars.vy[static_cast<std::size_t>(c + 1)])) * 0.5;
    Expr dx = set.var(vars.x[static_cast<std::size_t>(c + 1)]) - set.var(vars.x[static_cast<std::size_t>(c)]);
    Expr dy = set.var(vars.y[static_cast<std::size_t>(c + 1)]) - set.var(vars.y[static_cast<std::size_t>(c)]);
    set.add_equality(dx - mean_vx * set.var(vars.dt[static_cast<std::size_t>(c)]), tag(3, "eq8 displacement x"));
    set.add_equality(dy - mean_vy * set.var(vars.dt[static_cast<std::size_t>(c)]), tag(3, "eq8 displacement y"));
  }

  return vars;
}

void build_chain_constraints(ConstraintSet& set, const ActionVars& previous,
                             const ActionVars& next, const std::string& participant,
                             const std::string& next_action_name) {
  RelationTag t;
  t.group = 4;
  t.participant = participant;
  t.action = next_action_name;
  t.label = "eq10 chain position";
  set.add_equality(set.var(next.x.front()) - set.var(previous.x.back()), t);
  t.label = "eq11 chain position";
  set.add_equality(set.var(next.y.front()) - set.var(previous.y.back()), t);
}

namespace {

struct ChordVars {
  int ux = -1;
  int uy = -1;
  int r = -1;
};

// The replayed final heading is the last chord's direction, proportional to
// the sum of the last two velocity vectors (trapezoidal displacement). The
// unit direction becomes explicit through auxiliary variables.
ChordVars build_chord(ConstraintSet& set, const CrashParticipantVars& p,
                      const SolverConfig& cfg) {
  const ActionVars& a = p.final_action;
  int e = a.count;
  std::string prefix = p.participant_id + ".crash";
  ChordVars c;
  c.ux = set.add_variable(prefix + ".ux", -1.0, 1.0, 0.0, 0.3);
  c.uy = set.add_variable(prefix + ".uy", -1.0, 1.0, 1.0, 0.3);
  c.r = set.add_variable(prefix + ".r", 0.05, 2.0 * cfg.speed_cap, 8.0, 1.0);

  RelationTag t;
  t.group = 5;
  t.participant = p.participant_id;
  t.action = "crash";
  t.label = "final chord direction";
  Expr sum_vx = set.var(a.vx[static_cast<std::size_t>(e - 2)]) + set.var(a.vx[static_cast<std::size_t>(e - 1)]);
  Expr sum_vy = set.var(a.vy[static_cast<std::size_t>(e - 2)]) + set.var(a.vy[static_cast<std::size_t>(e - 1)]);
  set.add_equality(sum_vx - set.var(c.r) * set.var(c.ux), t);
  set.add_equality(sum_vy - set.var(c.r) * set.var(c.uy), t);
  t.label = "chord unit norm";
  set.add_equality(set.var(c.ux) * set.var(c.ux) + set.var(c.uy) * set.var(c.uy) - 1.0, t);
  return c;
}

}  // namespace

void build_crash_constraints(ConstraintSet& set, const CrashParticipantVars& striker,
                             const std::vector<CrashParticipantVars>& victims,
                             CrashType crash_type, const geom::Polygon& collision_area,
                             const SolverConfig& cfg) {
  if (victims.empty()) throw SemanticError("crash constraints need at least one victim");
  if (collision_area.size() < 3) {
    throw DegenerateCollisionArea("collision area polygon is degenerate");
  }

  const ActionVars& sa = striker.final_action;

  RelationTag tag;
  tag.group = 5;
  tag.participant = striker.participant_id;
  tag.action = "crash";

  // Eq 12: the striker's final waypoint lies inside the collision area and
  // every victim's final waypoint coincides with it.
  tag.label = "eq12 collision area";
  emit_region(set, collision_area, sa.x.back(), sa.y.back(), tag);

  for (const CrashParticipantVars& v : victims) {
    RelationTag vt = tag;
    vt.participant = v.participant_id;
    vt.label = "eq12 crash point";
    set.add_equality(set.var(sa.x.back()) - set.var(v.final_action.x.back()), vt);
    set.add_equality(set.var(sa.y.back()) - set.var(v.final_action.y.back()), vt);

    // Eq 13: striker and victim schedules span the same total duration.
    vt.label = "eq13 simultaneity";
    Expr total_s = Expr::constant(0.0);
    for (int dt : striker.all_dt) total_s = total_s + set.var(dt);
    Expr total_v = Expr::constant(0.0);
    for (int dt : v.all_dt) total_v = total_v + set.var(dt);
    set.add_equality(total_s - total_v, vt);
  }

  // Relative-heading band between the striker and each victim.
  double lo_deg = 0.0, hi_deg = 180.0;
  crash_angle_band(crash_type, lo_deg, hi_deg);
  double lo_eff = lo_deg > 0.0 ? lo_deg + kBandInsetDeg : lo_deg;
  double hi_eff = hi_deg < 180.0 ? hi_deg - kBandInsetDeg : hi_deg;

  ChordVars sc = build_chord(set, striker, cfg);
  for (const CrashParticipantVars& v : victims) {
    ChordVars vc = build_chord(set, v, cfg);
    Expr d = set.var(sc.ux) * set.var(vc.ux) + set.var(sc.uy) * set.var(vc.uy);
    RelationTag bt;
    bt.group = 5;
    bt.participant = v.participant_id;
    bt.action = "crash";
    bt.label = "crash angle band";
    // angle in [lo, hi] <=> cos(angle) in [cos(hi), cos(lo)]; edges at 0 and
    // 180 degrees are vacuous for unit vectors and are skipped.
    if (hi_deg < 180.0) set.add_inequality(d - deg_cos(hi_eff), bt);
    if (lo_deg > 0.0) set.add_inequality(deg_cos(lo_eff) - d, bt);
  }
}

ManeuverState initial_state(const RoadNetwork& network, const ParticipantBinding& binding) {
  ManeuverState s;
  s.road = binding.road;
  s.lane = binding.lane;
  s.travel = binding.travel;
  (void)network;
  return s;
}

namespace {

geom::Polygon lane_end_strip(const Lane& lane, double corridor_half) {
  double len = std::min(3.0, lane.length() * 0.25);
  geom::Vec2 u = lane.direction();
  return geom::segment_rectangle(lane.exit - u * len, lane.exit, 0.5 * corridor_half);
}

geom::Polygon lane_entry_strip(const Lane& lane, double corridor_half) {
  double len = std::min(3.0, lane.length() * 0.25);
  geom::Vec2 u = lane.direction();
  return geom::segment_rectangle(lane.entrance, lane.entrance + u * len, 0.5 * corridor_half);
}

// Band continuing the lane centerline through the junction, clipped to it.
geom::Polygon junction_band(const Lane& lane, double half_width, const geom::Polygon& junction,
                            bool backwards = false) {
  geom::Vec2 u = lane.direction();
  geom::Vec2 anchor = backwards ? lane.entrance : lane.exit;
  geom::Vec2 dir = backwards ? u * -1.0 : u;
  double span = 1.0;
  for (const geom::Vec2& v : junction) {
    span = std::max(span, geom::dot(v - anchor, dir));
  }
  geom::Polygon band = geom::segment_rectangle(anchor - dir * 0.5, anchor + dir * (span + 0.5),
                                               half_width);
  geom::Polygon clipped = geom::convex_intersection(band, junction);
  return clipped.empty() ? junction : clipped;
}

geom::Polygon hull_of(const std::vector<geom::Polygon>& polys) {
  std::vector<geom::Vec2> pts;
  for (const geom::Polygon& p : polys) pts.insert(pts.end(), p.begin(), p.end());
  return geom::convex_hull(std::move(pts));
}

geom::Vec2 seed_corner(const Lane& src, const Lane& dst) {
  geom::Vec2 u = src.direction();
  geom::Vec2 v = dst.direction();
  double denom = geom::cross(u, v);
  if (std::abs(denom) < 1e-9) return (src.exit + dst.entrance) * 0.5;
  // Intersection of the source centerline extension with the destination
  // centerline back-extension.
  geom::Vec2 w = dst.entrance - src.exit;
  double t = geom::cross(w, v) / denom;
  return src.exit + u * t;
}

double corridor_half_width(const Lane& lane, double vehicle_width) {
  double half = (lane.width_m - vehicle_width) * 0.5;
  if (half <= 0.0) {
    throw GeometryError("lane '" + lane.id + "' is narrower than the vehicle");
  }
  return half;
}

geom::Polygon strip_on_left(const Road& road, double strip_width) {
  const Lane* leftmost = &road.lanes.front();
  for (const Lane& l : road.lanes) {
    if (l.index < leftmost->index) leftmost = &l;
  }
  geom::Vec2 u = leftmost->direction();
  geom::Vec2 shift = geom::left_normal(u) * (leftmost->width_m * 0.5 + strip_width * 0.5);
  return geom::segment_rectangle(leftmost->entrance + shift, leftmost->exit + shift,
                                 strip_width * 0.5);
}

}  // namespace

ResolvedAction resolve_action(const RoadNetwork& network, const Site& site,
                              const ManeuverState& state, const ParticipantSpec& participant,
                              DrivingAction action, int position, bool is_final,
                              double abstract_speed_limit,
                              const std::optional<geom::Vec2>& collision_seed,
                              const std::optional<geom::Vec2>& seed_entry,
                              const SolverConfig& cfg) {
  const Road& road = network.roads[static_cast<std::size_t>(state.road)];
  const Lane& lane = road.lane_at(std::min(state.lane, static_cast<int>(road.lanes.size())));
  const geom::Polygon& junction = site.junction_polygon;

  ResolvedAction out;
  out.source_road = state.road;
  out.source_lane = lane.index;
  out.next_state = state;

  ActionGeometry& g = out.geometry;
  g.action = action;
  g.participant = participant.id;
  g.position = position;
  g.collision_bound = is_final;
  g.waypoints = action == DrivingAction::FollowLane ? cfg.waypoints_follow_lane
                                                    : cfg.waypoints_default;
  g.speed_limit = std::min(abstract_speed_limit, road.speed_limit_mps);
  g.axis_entrance = lane.entrance;
  g.axis_exit = lane.exit;

  geom::Vec2 u = lane.direction();
  auto seed_start = [&](const geom::Polygon& region, const geom::Vec2& fallback) {
    if (seed_entry) return *seed_entry;
    if (!region.empty()) return geom::polygon_centroid(region);
    return fallback;
  };
  auto seed_end = [&](const geom::Polygon& region, const geom::Vec2& fallback) {
    if (is_final && collision_seed) return *collision_seed;
    if (!region.empty()) return geom::polygon_centroid(region);
    return fallback;
  };

  switch (action) {
    case DrivingAction::FollowLane:
    case DrivingAction::Stop: {
      double corr = corridor_half_width(lane, cfg.vehicle_width);
      geom::Polygon corridor = lane.corridor(cfg.vehicle_width);
      g.start_region = corridor;
      g.end_region = corridor;
      g.interior_regions.assign(static_cast<std::size_t>(g.waypoints - 2), corridor);
      g.stop_at_end = action == DrivingAction::Stop;
      g.shape_extrapolated = action == DrivingAction::Stop;
      g.seed_speed = std::min(g.speed_limit * 0.8, 10.0);
      geom::Vec2 p0 = seed_entry ? *seed_entry : lane.entrance + u * (lane.length() * 0.2);
      geom::Vec2 pe = (is_final && collision_seed) ? *collision_seed
                                                   : lane.exit - u * (lane.length() * 0.2);
      g.seed_path = {p0, pe};
      (void)corr;
      out.area_polygons = {lane.rectangle()};
      break;
    }

    case DrivingAction::TurnLeft:
    case DrivingAction::TurnRight: {
      if (junction.empty()) {
        throw UnsupportedAction("turn at site '" + site.id + "' without a junction");
      }
      bool left = action == DrivingAction::TurnLeft;
      std::optional<int> dest = left ? left_successor(network, state.road)
                                     : right_successor(network, state.road);
      if (!dest) {
        throw ConnectivityError("road '" + road.id + "' has no " +
                                std::string(left ? "left" : "right") + "-turn successor");
      }
      const Road& dr = network.roads[static_cast<std::size_t>(*dest)];
      int dest_lane_index = left ? 1 : static_cast<int>(dr.lanes.size());
      const Lane& dl = dr.lane_at(dest_lane_index);
      double corr = corridor_half_width(lane, cfg.vehicle_width);
      double corr_d = corridor_half_width(dl, cfg.vehicle_width);

      out.dest_road = *dest;
      out.dest_lane = dest_lane_index;
      g.start_region = lane_end_strip(lane, corr);
      g.curvature_sign = left ? +1 : -1;
      g.shape_extrapolated = !left;
      g.perpendicular_dot = geom::dot(u, dr.direction_vector());
      g.speed_limit = std::min(g.speed_limit, dr.speed_limit_mps);
      g.seed_speed = std::min(g.speed_limit * 0.8, 7.0);

      g.interior_regions.assign(static_cast<std::size_t>(g.waypoints - 2), junction);
      g.interior_regions.front() = junction_band(lane, 0.75 * corr, junction);
      if (is_final) {
        g.end_region = junction;
      } else {
        g.end_region = lane_entry_strip(dl, corr_d);
        g.interior_regions.back() = junction_band(dl, 0.75 * corr_d, junction, true);
      }

      geom::Vec2 p0 = seed_start(g.start_region, lane.exit - u * 1.5);
      geom::Vec2 corner = seed_corner(lane, dl);
      geom::Vec2 pe = seed_end(is_final ? junction : g.end_region, dl.entrance);
      g.seed_path = {p0, (p0 + corner) * 0.5, corner, (corner + pe) * 0.5, pe};

      out.area_polygons.push_back(junction);
      for (const Lane& l : dr.lanes) out.area_polygons.push_back(l.rectangle());
      out.next_state.road = *dest;
      out.next_state.lane = dest_lane_index;
      out.next_state.travel = dr.direction_vector();
      break;
    }

    case DrivingAction::VehicleCross: {
      if (junction.empty()) {
        throw UnsupportedAction("crossing at site '" + site.id + "' without a junction");
      }
      std::optional<int> dest = straight_successor(network, state.road);
      if (!dest) {
        throw ConnectivityError("road '" + road.id + "' has no straight successor");
      }
      const Road& dr = network.roads[static_cast<std::size_t>(*dest)];
      int dest_lane_index = std::min(lane.index, static_cast<int>(dr.lanes.size()));
      const Lane& dl = dr.lane_at(dest_lane_index);
      double corr = corridor_half_width(lane, cfg.vehicle_width);
      double corr_d = corridor_half_width(dl, cfg.vehicle_width);

      out.dest_road = *dest;
      out.dest_lane = dest_lane_index;
      g.start_region = lane_end_strip(lane, corr);
      g.acute_dot = geom::dot(u, dr.direction_vector());
      g.speed_limit = std::min(g.speed_limit, dr.speed_limit_mps);
      g.seed_speed = std::min(g.speed_limit * 0.8, 9.0);
      g.interior_regions.assign(static_cast<std::size_t>(g.waypoints - 2),
                                junction_band(lane, 0.75 * corr, junction));
      g.end_region = is_final ? junction : lane_entry_strip(dl, corr_d);

      geom::Vec2 p0 = seed_start(g.start_region, lane.exit - u * 1.5);
      geom::Vec2 pe = seed_end(g.end_region, dl.entrance + dl.direction() * 1.5);
      g.seed_path = {p0, pe};

      out.area_polygons.push_back(junction);
      for (const Lane& l : dr.lanes) out.area_polygons.push_back(l.rectangle());
      out.next_state.road = *dest;
      out.next_state.lane = dest_lane_index;
      out.next_state.travel = dr.direction_vector();
      break;
    }

    case DrivingAction::ChangeLane: {
      if (lane.index + 1 > static_cast<int>(road.lanes.size())) {
        throw ConnectivityError("no lane right of '" + lane.id + "' to change into");
      }
      const Lane& dl = road.lane_at(lane.index + 1);
      double corr_d = corridor_half_width(dl, cfg.vehicle_width);
      corridor_half_width(lane, cfg.vehicle_width);
      out.dest_road = state.road;
      out.dest_lane = dl.index;
      g.start_region = lane.corridor(cfg.vehicle_width);
      g.end_region = dl.corridor(cfg.vehicle_width);
      g.interior_regions.assign(static_cast<std::size_t>(g.waypoints - 2),
                                hull_of({lane.corridor(cfg.vehicle_width), dl.corridor(cfg.vehicle_width)}));
      g.shape_extrapolated = true;
      g.seed_speed = std::min(g.speed_limit * 0.8, 10.0);
      geom::Vec2 p0 = seed_entry ? *seed_entry : lane.entrance + u * (lane.length() * 0.25);
      geom::Vec2 pe = (is_final && collision_seed)
                          ? *collision_seed
                          : dl.entrance + dl.direction() * (dl.length() * 0.75);
      g.seed_path = {p0, pe};
      (void)corr_d;
      out.area_polygons = {lane.rectangle(), dl.rectangle()};
      out.next_state.lane = dl.index;
      break;
    }

    case DrivingAction::UTurn: {
      std::optional<int> dest = uturn_successor(network, state.road);
      if (!dest) dest = opposing_road(network, site, state.road);
      if (!dest) {
        throw ConnectivityError("road '" + road.id + "' has no opposing road for a u-turn");
      }
      const Road& dr = network.roads[static_cast<std::size_t>(*dest)];
      const Lane& dl = dr.lane_at(1);
      double corr = corridor_half_width(lane, cfg.vehicle_width);
      double corr_d = corridor_half_width(dl, cfg.vehicle_width);

      out.dest_road = *dest;
      out.dest_lane = 1;
      bool at_junction = !junction.empty();
      g.start_region = at_junction ? lane_end_strip(lane, corr) : lane.corridor(cfg.vehicle_width);
      g.end_region = is_final
                         ? (at_junction ? junction : dl.corridor(cfg.vehicle_width))
                         : (at_junction ? lane_entry_strip(dl, corr_d) : dl.corridor(cfg.vehicle_width));
      g.interior_regions.assign(
          static_cast<std::size_t>(g.waypoints - 2),
          at_junction ? junction : hull_of({lane.rectangle(), dl.rectangle()}));
      g.curvature_sign = +1;
      g.apply_fd = false;
      g.shape_extrapolated = true;
      g.speed_limit = std::min(g.speed_limit, dr.speed_limit_mps);
      g.seed_speed = std::min(g.speed_limit * 0.6, 5.0);

      geom::Vec2 p0 = seed_start(g.start_region, lane.exit - u * 2.0);
      double separation = geom::lateral_offset(dl.entrance, lane.entrance, u);
      geom::Vec2 apex = p0 + u * 5.0 + geom::left_normal(u) * (separation * 0.5);
      geom::Vec2 pe = (is_final && collision_seed)
                          ? *collision_seed
                          : p0 + geom::left_normal(u) * separation - u * 3.0;
      g.seed_path = {p0, apex, pe};

      out.area_polygons = {lane.rectangle(), dl.rectangle()};
      if (at_junction) out.area_polygons.push_back(junction);
      out.next_state.road = *dest;
      out.next_state.lane = 1;
      out.next_state.travel = dr.direction_vector();
      break;
    }

    case DrivingAction::DriveIntoRoads: {
      geom::Polygon strip = roadside_strip(road);
      geom::Polygon corridor = lane.corridor(cfg.vehicle_width);
      corridor_half_width(lane, cfg.vehicle_width);
      g.start_region = strip;
      g.end_region = corridor;
      g.interior_regions.assign(static_cast<std::size_t>(g.waypoints - 2),
                                hull_of({strip, lane.rectangle()}));
      g.shape_extrapolated = true;
      g.seed_speed = std::min(g.speed_limit * 0.5, 6.0);
      geom::Vec2 p0 = seed_start(strip, geom::polygon_centroid(strip));
      geom::Vec2 pe = (is_final && collision_seed) ? *collision_seed
                                                   : lane.exit - u * (lane.length() * 0.25);
      g.seed_path = {p0, pe};
      out.area_polygons = {strip, lane.rectangle()};
      break;
    }

    case DrivingAction::DriveOffRoad: {
      geom::Polygon strip = roadside_strip(road);
      geom::Polygon corridor = lane.corridor(cfg.vehicle_width);
      corridor_half_width(lane, cfg.vehicle_width);
      g.start_region = corridor;
      g.end_region = strip;
      g.interior_regions.assign(static_cast<std::size_t>(g.waypoints - 2),
                                hull_of({strip, lane.rectangle()}));
      g.shape_extrapolated = true;
      g.seed_speed = std::min(g.speed_limit * 0.6, 8.0);
      geom::Vec2 p0 = seed_entry ? *seed_entry : lane.entrance + u * (lane.length() * 0.25);
      geom::Vec2 pe = (is_final && collision_seed) ? *collision_seed
                                                   : geom::polygon_centroid(strip);
      g.seed_path = {p0, pe};
      out.area_polygons = {lane.rectangle(), strip};
      break;
    }

    case DrivingAction::Retrograde: {
      std::optional<int> opp = opposing_road(network, site, state.road);
      if (!opp) {
        throw ConnectivityError("road '" + road.id + "' has no opposing road to drive against");
      }
      const Road& orc = network.roads[static_cast<std::size_t>(*opp)];
      const Lane& ol = orc.lane_at(1);
      corridor_half_width(ol, cfg.vehicle_width);
      out.dest_road = *opp;
      out.dest_lane = 1;
      g.start_region = ol.corridor(cfg.vehicle_width);
      g.end_region = ol.corridor(cfg.vehicle_width);
      g.interior_regions.assign(static_cast<std::size_t>(g.waypoints - 2),
                                ol.corridor(cfg.vehicle_width));
      // Moving against the bound lane: the axis is the opposing lane reversed.
      g.axis_entrance = ol.exit;
      g.axis_exit = ol.entrance;
      g.shape_extrapolated = true;
      g.speed_limit = std::min(abstract_speed_limit, orc.speed_limit_mps);
      g.seed_speed = std::min(g.speed_limit * 0.7, 9.0);
      geom::Vec2 ou = ol.direction();
      geom::Vec2 p0 = seed_entry ? *seed_entry : ol.exit - ou * (ol.length() * 0.2);
      geom::Vec2 pe = (is_final && collision_seed) ? *collision_seed
                                                   : ol.entrance + ou * (ol.length() * 0.2);
      g.seed_path = {p0, pe};
      out.area_polygons = {ol.rectangle()};
      out.next_state.road = *opp;
      out.next_state.lane = 1;
      break;
    }

    case DrivingAction::PedestrianCross: {
      geom::Polygon near_strip = roadside_strip(road);
      std::optional<int> opp = opposing_road(network, site, state.road);
      geom::Polygon far_strip = opp ? roadside_strip(network.roads[static_cast<std::size_t>(*opp)])
                                    : strip_on_left(road, 2.5);
      geom::Vec2 travel = state.travel;
      geom::Vec2 near_c = geom::polygon_centroid(near_strip);
      geom::Vec2 far_c = geom::polygon_centroid(far_strip);
      if (geom::dot(travel, far_c - near_c) < 0.0) std::swap(near_strip, far_strip);
      near_c = geom::polygon_centroid(near_strip);
      far_c = geom::polygon_centroid(far_strip);

      // Crossing window: mid-block on straight carriageways, beside the
      // junction otherwise.
      geom::Vec2 anchor;
      if (junction.empty()) {
        anchor = (lane.entrance + lane.exit) * 0.5;
      } else {
        anchor = lane.exit - u * 4.0;
      }
      std::vector<geom::Vec2> span_pts;
      for (const geom::Polygon& p : {near_strip, far_strip}) {
        span_pts.insert(span_pts.end(), p.begin(), p.end());
      }
      geom::Vec2 axis = geom::normalized(far_c - near_c);
      double lo = 0.0, hi = 0.0;
      for (const geom::Vec2& p : span_pts) {
        double d = geom::dot(p - anchor, axis);
        lo = std::min(lo, d);
        hi = std::max(hi, d);
      }
      geom::Polygon band = geom::segment_rectangle(anchor + axis * lo, anchor + axis * hi, 3.0);

      g.start_region = geom::convex_intersection(near_strip, band);
      if (g.start_region.empty()) g.start_region = near_strip;
      geom::Polygon far_window = geom::convex_intersection(far_strip, band);
      if (far_window.empty()) far_window = far_strip;
      g.end_region = is_final ? band : far_window;
      g.interior_regions.assign(static_cast<std::size_t>(g.waypoints - 2), band);
      g.axis_entrance = near_c;
      g.axis_exit = far_c;
      g.shape_extrapolated = true;
      g.speed_limit = cfg.pedestrian_speed_max;
      g.seed_speed = 1.4;
      geom::Vec2 p0 = seed_start(g.start_region, near_c);
      geom::Vec2 pe = seed_end(g.end_region, far_c);
      g.seed_path = {p0, pe};
      out.area_polygons = {band};
      break;
    }

    case DrivingAction::PedestrianWalk: {
      geom::Polygon strip = roadside_strip(road);
      geom::Vec2 travel = state.travel;
      bool along = geom::dot(travel, u) >= 0.0;
      g.start_region = strip;
      g.end_region = strip;
      g.interior_regions.assign(static_cast<std::size_t>(g.waypoints - 2), strip);
      geom::Vec2 c = geom::polygon_centroid(strip);
      geom::Vec2 half_span = u * (lane.length() * 0.5);
      g.axis_entrance = along ? c - half_span : c + half_span;
      g.axis_exit = along ? c + half_span : c - half_span;
      g.shape_extrapolated = true;
      g.speed_limit = cfg.pedestrian_speed_max;
      g.seed_speed = 1.4;
      geom::Vec2 p0 = seed_entry ? *seed_entry : g.axis_entrance + (g.axis_exit - g.axis_entrance) * 0.2;
      geom::Vec2 pe = (is_final && collision_seed)
                          ? *collision_seed
                          : g.axis_entrance + (g.axis_exit - g.axis_entrance) * 0.8;
      g.seed_path = {p0, pe};
      out.area_polygons = {strip};
      break;
    }
  }

  return out;
}

}  // namespace crashsynth
