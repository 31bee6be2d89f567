#include "crashsynth/map_gen.hpp"

#include <array>

#include "crashsynth/errors.hpp"

namespace crashsynth {
namespace mapgen {

namespace {

geom::Vec2 unit(CompassDirection d) {
  switch (d) {
    case CompassDirection::Northbound: return {0.0, 1.0};
    case CompassDirection::Southbound: return {0.0, -1.0};
    case CompassDirection::Eastbound: return {1.0, 0.0};
    case CompassDirection::Westbound: return {-1.0, 0.0};
  }
  return {0.0, 1.0};
}

CompassDirection opposite(CompassDirection d) {
  switch (d) {
    case CompassDirection::Northbound: return CompassDirection::Southbound;
    case CompassDirection::Southbound: return CompassDirection::Northbound;
    case CompassDirection::Eastbound: return CompassDirection::Westbound;
    case CompassDirection::Westbound: return CompassDirection::Eastbound;
  }
  return d;
}

CompassDirection left_of(CompassDirection d) {
  switch (d) {
    case CompassDirection::Northbound: return CompassDirection::Westbound;
    case CompassDirection::Westbound: return CompassDirection::Southbound;
    case CompassDirection::Southbound: return CompassDirection::Eastbound;
    case CompassDirection::Eastbound: return CompassDirection::Northbound;
  }
  return d;
}

std::string suffix(CompassDirection d) {
  switch (d) {
    case CompassDirection::Northbound: return "n";
    case CompassDirection::Southbound: return "s";
    case CompassDirection::Eastbound: return "e";
    case CompassDirection::Westbound: return "w";
  }
  return "n";
}

constexpr std::array<CompassDirection, 4> kAllDirections{
    CompassDirection::Northbound, CompassDirection::Southbound, CompassDirection::Eastbound,
    CompassDirection::Westbound};

struct SiteBuilder {
  const SiteSpec& spec;
  RoadNetwork& net;
  Site site;

  int lanes_for(CompassDirection d) const {
    auto it = spec.lane_overrides.find(d);
    return it != spec.lane_overrides.end() ? it->second : spec.lanes;
  }

  double carriageway_width(CompassDirection d, bool present) const {
    return present ? lanes_for(d) * spec.lane_width : 0.0;
  }

  // Road traveling `d` whose centerline runs from `from` to `to`; lanes sit
  // on the right side of the centerline, lane 1 leftmost.
  void add_road(CompassDirection d, const std::string& id, geom::Vec2 from, geom::Vec2 to) {
    Road r;
    r.id = id;
    r.direction = d;
    r.speed_limit_mps = spec.speed_limit_mps;
    geom::Vec2 u = unit(d);
    geom::Vec2 right = geom::left_normal(u) * -1.0;
    for (int i = 1; i <= lanes_for(d); ++i) {
      Lane l;
      l.id = id + "_l" + std::to_string(i);
      l.index = i;
      l.width_m = spec.lane_width;
      geom::Vec2 off = right * ((i - 0.5) * spec.lane_width);
      l.entrance = from + off;
      l.exit = to + off;
      r.lanes.push_back(std::move(l));
    }
    net.roads.push_back(std::move(r));
    site.legs.push_back(id);
  }
};

void add_junction_site(RoadNetwork& net, const SiteSpec& spec) {
  std::map<CompassDirection, bool> arm;
  for (CompassDirection d : kAllDirections) arm[d] = true;
  if (spec.type == RoadType::TJunction) arm[spec.missing_arm] = false;

  // Travel direction d has an inbound road when the arm behind it exists and
  // an outbound road when the arm ahead exists.
  std::map<CompassDirection, bool> has_in, has_out;
  for (CompassDirection d : kAllDirections) {
    has_in[d] = arm[opposite(d)];
    has_out[d] = arm[d];
  }
  if (spec.type == RoadType::TJunction && spec.one_way) {
    // One-way main: keep only the main direction to the left of the stem's
    // travel (a fixed convention).
    CompassDirection dropped = left_of(opposite(spec.missing_arm));
    has_in[dropped] = false;
    has_out[dropped] = false;
  }

  // Carriageway widths for each travel direction determine the junction
  // rectangle: northbound occupies the east half, eastbound the south half.
  auto width = [&](CompassDirection d) {
    SiteBuilder probe{spec, net, {}};
    return (has_in.at(d) || has_out.at(d)) ? probe.lanes_for(d) * spec.lane_width : 0.0;
  };
  double xhi = width(CompassDirection::Northbound);
  double xlo = -width(CompassDirection::Southbound);
  double yhi = width(CompassDirection::Westbound);
  double ylo = -width(CompassDirection::Eastbound);
  // A junction boundary with zero extent collapses region geometry; give the
  // rectangle a minimal skirt on missing sides.
  if (xhi - xlo < 1.0) xhi = xlo + 1.0;
  if (yhi - ylo < 1.0) yhi = ylo + 1.0;

  SiteBuilder b{spec, net, {}};
  b.site.id = spec.id;
  b.site.type = spec.type;
  const geom::Vec2 c = spec.center;
  b.site.junction_polygon = geom::normalize_polygon(
      {{c.x + xlo, c.y + ylo}, {c.x + xhi, c.y + ylo}, {c.x + xhi, c.y + yhi}, {c.x + xlo, c.y + yhi}});

  auto extent_along = [&](geom::Vec2 d) {
    if (d.x > 0.5) return xhi;
    if (d.x < -0.5) return -xlo;
    if (d.y > 0.5) return yhi;
    return -ylo;
  };

  for (CompassDirection d : kAllDirections) {
    geom::Vec2 u = unit(d);
    if (has_in.at(d)) {
      geom::Vec2 edge = c - u * extent_along(u * -1.0);
      b.add_road(d, spec.id + "_in_" + suffix(d), edge - u * spec.leg_length, edge);
    }
    if (has_out.at(d)) {
      geom::Vec2 edge = c + u * extent_along(u);
      b.add_road(d, spec.id + "_out_" + suffix(d), edge, edge + u * spec.leg_length);
    }
  }

  for (CompassDirection d : kAllDirections) {
    if (!has_in.at(d)) continue;
    std::string from = spec.id + "_in_" + suffix(d);
    auto link = [&](CompassDirection out_dir) {
      if (has_out.at(out_dir)) {
        net.connectivity.emplace_back(from, spec.id + "_out_" + suffix(out_dir));
      }
    };
    link(d);
    link(left_of(d));
    link(opposite(left_of(d)));
    link(opposite(d));
  }

  net.sites.push_back(std::move(b.site));
}

void add_straight_site(RoadNetwork& net, const SiteSpec& spec) {
  SiteBuilder b{spec, net, {}};
  b.site.id = spec.id;
  b.site.type = RoadType::StraightRoad;

  geom::Vec2 u = unit(spec.axis);
  geom::Vec2 from = spec.center - u * spec.leg_length;
  geom::Vec2 to = spec.center + u * spec.leg_length;
  b.add_road(spec.axis, spec.id + "_" + suffix(spec.axis), from, to);
  if (!spec.one_way) {
    CompassDirection back = opposite(spec.axis);
    b.add_road(back, spec.id + "_" + suffix(back), to, from);
  }
  net.sites.push_back(std::move(b.site));
}

}  // namespace

void add_site(RoadNetwork& net, const SiteSpec& spec) {
  if (spec.id.empty()) throw SemanticError("site spec needs an id");
  if (spec.type == RoadType::StraightRoad) {
    add_straight_site(net, spec);
  } else {
    add_junction_site(net, spec);
  }
}

RoadNetwork single_site(const SiteSpec& spec) {
  RoadNetwork net;
  add_site(net, spec);
  return net;
}

RoadNetwork standard_grid() {
  RoadNetwork net;
  auto at = [](int col, int row) {
    return geom::Vec2{col * 500.0, row * 500.0};
  };

  SiteSpec s;
  s.type = RoadType::Intersection;

  s.id = "x_a";
  s.center = at(0, 0);
  add_site(net, s);

  s.id = "x_b";
  s.center = at(1, 0);
  s.lane_width = 3.0;
  add_site(net, s);

  s.id = "x_c";
  s.center = at(2, 0);
  s.lane_width = 3.5;
  s.lanes = 3;
  add_site(net, s);

  s.id = "x_d";
  s.center = at(3, 0);
  s.lanes = 2;
  s.lane_width = 4.0;
  add_site(net, s);

  s.id = "x_narrow_leg";
  s.center = at(0, 1);
  s.lane_width = 3.5;
  s.lane_overrides = {{CompassDirection::Eastbound, 1}};
  add_site(net, s);

  s.id = "x_single";
  s.center = at(1, 1);
  s.lane_overrides.clear();
  s.lanes = 1;
  add_site(net, s);

  s.type = RoadType::TJunction;
  s.lanes = 2;

  s.id = "t_a";
  s.center = at(2, 1);
  s.missing_arm = CompassDirection::Northbound;
  add_site(net, s);

  s.id = "t_b";
  s.center = at(3, 1);
  s.missing_arm = CompassDirection::Eastbound;
  add_site(net, s);

  s.id = "t_c";
  s.center = at(0, 2);
  s.missing_arm = CompassDirection::Southbound;
  s.lane_width = 3.0;
  add_site(net, s);

  s.id = "t_wide";
  s.center = at(1, 2);
  s.missing_arm = CompassDirection::Northbound;
  s.lane_width = 4.0;
  add_site(net, s);

  s.type = RoadType::StraightRoad;
  s.lane_width = 3.5;
  s.leg_length = 70.0;
  s.speed_limit_mps = 22.4;

  s.id = "str_a";
  s.center = at(2, 2);
  s.axis = CompassDirection::Northbound;
  add_site(net, s);

  s.id = "str_b";
  s.center = at(3, 2);
  s.axis = CompassDirection::Eastbound;
  s.lanes = 3;
  s.lane_width = 3.0;
  add_site(net, s);

  return net;
}

}  // namespace mapgen
}  // namespace crashsynth
