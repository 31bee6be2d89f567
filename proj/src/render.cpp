#include "crashsynth/render.hpp"

#include <algorithm>
#include <cstdio>
#include <string>

#include "crashsynth/errors.hpp"

namespace crashsynth {

namespace {

constexpr double kCanvas = 800.0;
constexpr double kMargin = 40.0;

const char* kParticipantColors[] = {"#d62728", "#1f77b4", "#2ca02c",
                                    "#9467bd", "#ff7f0e", "#8c564b"};

struct Frame {
  double min_x = 0.0, min_y = 0.0, scale = 1.0;

  // Map coordinates to canvas; y flipped so north stays up.
  double x(double wx) const { return kMargin + (wx - min_x) * scale; }
  double y(double wy) const { return kCanvas - kMargin - (wy - min_y) * scale; }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string polygon_points(const geom::Polygon& poly, const Frame& f) {
  std::string out;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    if (i) out += " ";
    out += num(f.x(poly[i].x)) + "," + num(f.y(poly[i].y));
  }
  return out;
}

void grow(const geom::Polygon& poly, double& min_x, double& min_y, double& max_x,
          double& max_y) {
  for (const geom::Vec2& p : poly) {
    min_x = std::min(min_x, p.x);
    min_y = std::min(min_y, p.y);
    max_x = std::max(max_x, p.x);
    max_y = std::max(max_y, p.y);
  }
}

}  // namespace

std::string render_scenario_svg(const ReconstructedScenario& scenario,
                                const RoadNetwork& network) {
  const int site_idx = network.site_index(scenario.site_id);
  if (site_idx < 0)
    throw SemanticError("scenario site '" + scenario.site_id + "' is not in the map");
  const Site& site = network.sites[static_cast<std::size_t>(site_idx)];

  double min_x = 1e300, min_y = 1e300, max_x = -1e300, max_y = -1e300;
  for (const std::string& leg : site.legs) {
    for (const Lane& lane : network.road(leg).lanes) grow(lane.rectangle(), min_x, min_y, max_x, max_y);
  }
  grow(site.junction_polygon, min_x, min_y, max_x, max_y);
  grow(scenario.collision_area, min_x, min_y, max_x, max_y);
  for (const ParticipantScenarioPlan& part : scenario.participants) {
    for (const PlannedAction& action : part.actions) {
      for (const Waypoint& w : action.waypoints) {
        min_x = std::min(min_x, w.x);
        min_y = std::min(min_y, w.y);
        max_x = std::max(max_x, w.x);
        max_y = std::max(max_y, w.y);
      }
    }
  }
  if (min_x > max_x) {
    min_x = min_y = 0.0;
    max_x = max_y = 1.0;
  }

  Frame f;
  f.min_x = min_x;
  f.min_y = min_y;
  const double span = std::max({max_x - min_x, max_y - min_y, 1e-9});
  f.scale = (kCanvas - 2.0 * kMargin) / span;

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kCanvas) + "\" height=\"" +
         num(kCanvas) + "\" viewBox=\"0 0 " + num(kCanvas) + " " + num(kCanvas) + "\">\n";
  svg += "  <title>" + escape(scenario.site_id) + "</title>\n";
  svg += "  <rect x=\"0\" y=\"0\" width=\"" + num(kCanvas) + "\" height=\"" + num(kCanvas) +
         "\" fill=\"#ffffff\"/>\n";

  for (const std::string& leg : site.legs) {
    const Road& road = network.road(leg);
    for (const Lane& lane : road.lanes) {
      svg += "  <polygon class=\"lane\" points=\"" + polygon_points(lane.rectangle(), f) +
             "\" fill=\"#e9e9e9\" stroke=\"#9a9a9a\" stroke-width=\"1\"/>\n";
    }
  }
  if (!site.junction_polygon.empty()) {
    svg += "  <polygon class=\"junction\" points=\"" +
           polygon_points(site.junction_polygon, f) +
           "\" fill=\"#f4f4f4\" stroke=\"#9a9a9a\" stroke-width=\"1\"/>\n";
  }
  if (!scenario.collision_area.empty()) {
    svg += "  <polygon class=\"collision-area\" points=\"" +
           polygon_points(scenario.collision_area, f) +
           "\" fill=\"#ffb3b3\" fill-opacity=\"0.6\" stroke=\"#cc0000\" stroke-width=\"1.5\"/>\n";
  }

  for (std::size_t pi = 0; pi < scenario.participants.size(); ++pi) {
    const ParticipantScenarioPlan& part = scenario.participants[pi];
    const char* color = kParticipantColors[pi % 6];
    double t = 0.0;
    for (const PlannedAction& action : part.actions) {
      std::string points;
      for (std::size_t i = 0; i < action.waypoints.size(); ++i) {
        if (i) points += " ";
        points += num(f.x(action.waypoints[i].x)) + "," + num(f.y(action.waypoints[i].y));
      }
      svg += "  <polyline class=\"action\" data-participant=\"" + escape(part.id) +
             "\" data-action=\"" + escape(to_string(action.geometry.action)) + "\" points=\"" +
             points + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
      for (std::size_t i = 0; i < action.waypoints.size(); ++i) {
        const Waypoint& w = action.waypoints[i];
        if (i > 0) t += action.dt[i - 1];
        svg += "  <circle cx=\"" + num(f.x(w.x)) + "\" cy=\"" + num(f.y(w.y)) +
               "\" r=\"3\" fill=\"" + color + "\"/>\n";
        svg += "  <text x=\"" + num(f.x(w.x) + 5.0) + "\" y=\"" + num(f.y(w.y) - 5.0) +
               "\" font-size=\"10\" fill=\"" + color + "\">" + escape(part.id) + " t=" + num(t) +
               "</text>\n";
      }
    }
  }

  svg += "</svg>\n";
  return svg;
}

}  // namespace crashsynth
