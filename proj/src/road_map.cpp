#include "crashsynth/road_map.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "crashsynth/errors.hpp"

namespace crashsynth {

using nlohmann::ordered_json;

geom::Polygon Lane::corridor(double vehicle_width) const {
  double half = (width_m - vehicle_width) * 0.5;
  if (half <= 0.0) return {};
  return geom::segment_rectangle(entrance, exit, half);
}

const Lane& Road::lane_at(int index) const {
  for (const Lane& l : lanes) {
    if (l.index == index) return l;
  }
  throw SemanticError("road '" + id + "' has no lane with index " + std::to_string(index));
}

geom::Vec2 Road::direction_vector() const {
  if (lanes.empty()) throw SemanticError("road '" + id + "' has no lanes");
  return lanes.front().direction();
}

int RoadNetwork::road_index(const std::string& id) const {
  for (std::size_t i = 0; i < roads.size(); ++i) {
    if (roads[i].id == id) return static_cast<int>(i);
  }
  throw SemanticError("no road with id '" + id + "'");
}

int RoadNetwork::site_index(const std::string& id) const {
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (sites[i].id == id) return static_cast<int>(i);
  }
  throw SemanticError("no site with id '" + id + "'");
}

std::vector<int> RoadNetwork::successors(const std::string& road_id) const {
  std::vector<int> out;
  for (const auto& [from, to] : connectivity) {
    if (from == road_id) out.push_back(road_index(to));
  }
  return out;
}

namespace {

geom::Vec2 parse_point(const ordered_json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw SchemaError(std::string(what) + " is not a [x, y] pair");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

void validate_network(const RoadNetwork& net) {
  std::set<std::string> road_ids;
  for (const Road& r : net.roads) {
    if (!road_ids.insert(r.id).second) throw SemanticError("duplicate road id '" + r.id + "'");
    if (r.lanes.empty()) throw SemanticError("road '" + r.id + "' has no lanes");
    std::set<int> indices;
    for (const Lane& l : r.lanes) {
      if (l.width_m <= 0) throw SemanticError("lane '" + l.id + "' has non-positive width");
      if (geom::distance(l.entrance, l.exit) < 1e-6) {
        throw SemanticError("lane '" + l.id + "' entrance and exit coincide");
      }
      if (!indices.insert(l.index).second) {
        throw SemanticError("road '" + r.id + "' has duplicate lane index " + std::to_string(l.index));
      }
    }
    for (int i = 1; i <= static_cast<int>(r.lanes.size()); ++i) {
      if (!indices.count(i)) {
        throw SemanticError("road '" + r.id + "' lane indices are not 1..n");
      }
    }
  }
  std::set<std::string> site_ids;
  for (const Site& s : net.sites) {
    if (!site_ids.insert(s.id).second) throw SemanticError("duplicate site id '" + s.id + "'");
    if (s.legs.empty()) throw SemanticError("site '" + s.id + "' has no legs");
    for (const std::string& leg : s.legs) net.road_index(leg);
    if (s.type != RoadType::StraightRoad && s.junction_polygon.size() < 3) {
      throw SemanticError("site '" + s.id + "' needs a junction polygon");
    }
  }
  for (const auto& [from, to] : net.connectivity) {
    net.road_index(from);
    net.road_index(to);
  }
}

}  // namespace

RoadNetwork parse_map(const std::string& json_text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("map is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw SchemaError("map document is not a JSON object");
  if (!doc.contains("sites") || !doc.contains("roads")) {
    throw SchemaError("map needs 'sites' and 'roads' arrays");
  }

  RoadNetwork net;
  for (const auto& rj : doc.at("roads")) {
    Road r;
    if (!rj.contains("id")) throw SchemaError("road without 'id'");
    r.id = rj.at("id").get<std::string>();
    if (!rj.contains("direction")) throw SchemaError("road '" + r.id + "' without 'direction'");
    r.direction = parse_compass_direction(rj.at("direction").get<std::string>());
    if (rj.contains("speed_limit_mps")) r.speed_limit_mps = rj.at("speed_limit_mps").get<double>();
    if (!rj.contains("lanes") || !rj.at("lanes").is_array()) {
      throw SchemaError("road '" + r.id + "' without 'lanes' array");
    }
    for (const auto& lj : rj.at("lanes")) {
      Lane l;
      if (!lj.contains("id")) throw SchemaError("lane without 'id' on road '" + r.id + "'");
      l.id = lj.at("id").get<std::string>();
      if (!lj.contains("index")) throw SchemaError("lane '" + l.id + "' without 'index'");
      l.index = lj.at("index").get<int>();
      if (lj.contains("width_m")) l.width_m = lj.at("width_m").get<double>();
      l.entrance = parse_point(lj.at("entrance"), "lane entrance");
      l.exit = parse_point(lj.at("exit"), "lane exit");
      r.lanes.push_back(std::move(l));
    }
    std::sort(r.lanes.begin(), r.lanes.end(),
              [](const Lane& a, const Lane& b) { return a.index < b.index; });
    net.roads.push_back(std::move(r));
  }

  for (const auto& sj : doc.at("sites")) {
    Site s;
    if (!sj.contains("id")) throw SchemaError("site without 'id'");
    s.id = sj.at("id").get<std::string>();
    if (!sj.contains("type")) throw SchemaError("site '" + s.id + "' without 'type'");
    s.type = parse_road_type(sj.at("type").get<std::string>());
    if (!sj.contains("legs") || !sj.at("legs").is_array()) {
      throw SchemaError("site '" + s.id + "' without 'legs' array");
    }
    for (const auto& leg : sj.at("legs")) s.legs.push_back(leg.get<std::string>());
    if (sj.contains("junction_polygon")) {
      geom::Polygon poly;
      for (const auto& pj : sj.at("junction_polygon")) {
        poly.push_back(parse_point(pj, "junction polygon vertex"));
      }
      s.junction_polygon = geom::normalize_polygon(poly);
    }
    net.sites.push_back(std::move(s));
  }

  if (doc.contains("connectivity")) {
    for (const auto& cj : doc.at("connectivity")) {
      if (!cj.is_array() || cj.size() != 2) {
        throw SchemaError("connectivity entries must be [from, to] pairs");
      }
      net.connectivity.emplace_back(cj[0].get<std::string>(), cj[1].get<std::string>());
    }
  }

  validate_network(net);
  return net;
}

RoadNetwork parse_map_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open map file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_map(ss.str());
}

std::string serialize_map(const RoadNetwork& network, int indent) {
  ordered_json doc;
  doc["sites"] = ordered_json::array();
  for (const Site& s : network.sites) {
    ordered_json sj;
    sj["id"] = s.id;
    sj["type"] = to_string(s.type);
    sj["legs"] = s.legs;
    if (!s.junction_polygon.empty()) {
      ordered_json poly = ordered_json::array();
      for (const geom::Vec2& v : s.junction_polygon) poly.push_back({v.x, v.y});
      sj["junction_polygon"] = std::move(poly);
    }
    doc["sites"].push_back(std::move(sj));
  }
  doc["roads"] = ordered_json::array();
  for (const Road& r : network.roads) {
    ordered_json rj;
    rj["id"] = r.id;
    rj["direction"] = to_string(r.direction);
    rj["speed_limit_mps"] = r.speed_limit_mps;
    rj["lanes"] = ordered_json::array();
    for (const Lane& l : r.lanes) {
      ordered_json lj;
      lj["id"] = l.id;
      lj["index"] = l.index;
      lj["width_m"] = l.width_m;
      lj["entrance"] = {l.entrance.x, l.entrance.y};
      lj["exit"] = {l.exit.x, l.exit.y};
      rj["lanes"].push_back(std::move(lj));
    }
    doc["roads"].push_back(std::move(rj));
  }
  doc["connectivity"] = ordered_json::array();
  for (const auto& [from, to] : network.connectivity) {
    doc["connectivity"].push_back({from, to});
  }
  return indent >= 0 ? doc.dump(indent) : doc.dump();
}

int cal_max_lanes(const AccidentAbstract& abstract) {
  int needed = 1;
  for (const ParticipantSpec& p : abstract.participants) {
    int changes = static_cast<int>(
        std::count(p.actions.begin(), p.actions.end(), DrivingAction::ChangeLane));
    needed = std::max(needed, std::max(p.running_lane, p.running_lane + changes));
  }
  return needed;
}

std::vector<int> enumerate_candidates(const RoadNetwork& network, RoadType type,
                                      int required_lanes) {
  std::vector<int> out;
  for (std::size_t i = 0; i < network.sites.size(); ++i) {
    const Site& s = network.sites[i];
    if (s.type != type) continue;
    bool ok = true;
    for (const std::string& leg : s.legs) {
      if (static_cast<int>(network.road(leg).lanes.size()) < required_lanes) {
        ok = false;
        break;
      }
    }
    if (ok) out.push_back(static_cast<int>(i));
  }
  return out;
}

OrientationClass orientation_class(CompassDirection a, CompassDirection b) {
  if (a == b) return OrientationClass::Same;
  auto axis = [](CompassDirection d) {
    return (d == CompassDirection::Northbound || d == CompassDirection::Southbound) ? 0 : 1;
  };
  return axis(a) == axis(b) ? OrientationClass::Opposing : OrientationClass::Perpendicular;
}

OrientationClass orientation_class(const geom::Vec2& a, const geom::Vec2& b) {
  double d = geom::dot(geom::normalized(a), geom::normalized(b));
  if (d > 0.7) return OrientationClass::Same;
  if (d < -0.7) return OrientationClass::Opposing;
  return OrientationClass::Perpendicular;
}

std::vector<int> inbound_legs(const RoadNetwork& network, const Site& site) {
  std::vector<int> out;
  if (site.junction_polygon.empty()) {
    for (const std::string& leg : site.legs) out.push_back(network.road_index(leg));
    return out;
  }
  geom::Vec2 center = geom::polygon_centroid(site.junction_polygon);
  for (const std::string& leg : site.legs) {
    int idx = network.road_index(leg);
    const Lane& l = network.roads[idx].lanes.front();
    if (geom::distance(l.exit, center) < geom::distance(l.entrance, center)) out.push_back(idx);
  }
  return out;
}

namespace {

std::optional<int> classified_successor(const RoadNetwork& network, int road,
                                        OrientationClass want, int turn_sign) {
  geom::Vec2 u = network.roads[road].direction_vector();
  for (int succ : network.successors(network.roads[road].id)) {
    geom::Vec2 v = network.roads[succ].direction_vector();
    if (orientation_class(u, v) != want) continue;
    if (turn_sign != 0) {
      double c = geom::cross(u, v);
      if (turn_sign > 0 && c <= 0) continue;
      if (turn_sign < 0 && c >= 0) continue;
    }
    return succ;
  }
  return std::nullopt;
}

}  // namespace

std::optional<int> straight_successor(const RoadNetwork& network, int road) {
  return classified_successor(network, road, OrientationClass::Same, 0);
}

std::optional<int> left_successor(const RoadNetwork& network, int road) {
  return classified_successor(network, road, OrientationClass::Perpendicular, +1);
}

std::optional<int> right_successor(const RoadNetwork& network, int road) {
  return classified_successor(network, road, OrientationClass::Perpendicular, -1);
}

std::optional<int> uturn_successor(const RoadNetwork& network, int road) {
  return classified_successor(network, road, OrientationClass::Opposing, 0);
}

std::optional<int> opposing_road(const RoadNetwork& network, const Site& site, int road) {
  geom::Vec2 u = network.roads[road].direction_vector();
  geom::Vec2 anchor = network.roads[road].lanes.front().entrance;
  std::optional<int> best;
  double best_dist = 1e300;
  for (const std::string& leg : site.legs) {
    int idx = network.road_index(leg);
    if (idx == road) continue;
    const Road& other = network.roads[idx];
    if (orientation_class(u, other.direction_vector()) != OrientationClass::Opposing) continue;
    // Prefer the carriageway half that runs alongside (closest exit to our
    // entrance), which distinguishes the adjacent opposing road from an
    // opposing leg across the junction.
    double d = geom::distance(other.lanes.front().exit, anchor);
    if (d < best_dist) {
      best_dist = d;
      best = idx;
    }
  }
  return best;
}

SiteBinding convert_info(const RoadNetwork& network, int site_index,
                         const AccidentAbstract& abstract) {
  const Site& site = network.sites[site_index];
  std::vector<int> legs = inbound_legs(network, site);
  if (legs.empty()) throw UnmappableDirections("site '" + site.id + "' has no inbound legs");

  // Distinct vehicle directions in first-appearance order; equal directions
  // share a leg. Pedestrians move relative to the vehicles (a crossing
  // pedestrian walks across a leg, not along one), so they are bound after.
  std::vector<CompassDirection> dirs;
  for (const ParticipantSpec& p : abstract.participants) {
    if (p.kind != ParticipantKind::Vehicle) continue;
    if (std::find(dirs.begin(), dirs.end(), p.direction) == dirs.end()) {
      dirs.push_back(p.direction);
    }
  }
  std::size_t k = dirs.size();
  if (k == 0) throw UnmappableDirections("abstract has no vehicle participants to anchor legs");
  if (k > legs.size()) {
    throw UnmappableDirections("abstract needs " + std::to_string(k) + " distinct legs, site '" +
                               site.id + "' offers " + std::to_string(legs.size()));
  }

  // Try injective assignments dirs -> legs in lexicographic leg order; keep
  // the first that preserves every pairwise orientation class.
  auto matches = [&](const std::vector<int>& assignment) {
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = i + 1; j < k; ++j) {
        OrientationClass want = orientation_class(dirs[i], dirs[j]);
        OrientationClass got =
            orientation_class(network.roads[legs[assignment[i]]].direction_vector(),
                              network.roads[legs[assignment[j]]].direction_vector());
        if (want != got) return false;
      }
    }
    return true;
  };

  std::vector<int> assignment(k);
  std::vector<int> chosen;
  std::vector<bool> used(legs.size(), false);
  bool found = false;
  auto search = [&](auto&& self, std::size_t depth) -> void {
    if (found) return;
    if (depth == k) {
      if (matches(assignment)) {
        chosen = assignment;
        found = true;
      }
      return;
    }
    for (std::size_t li = 0; li < legs.size(); ++li) {
      if (used[li]) continue;
      used[li] = true;
      assignment[depth] = static_cast<int>(li);
      self(self, depth + 1);
      used[li] = false;
      if (found) return;
    }
  };
  search(search, 0);
  if (!found) {
    throw UnmappableDirections("no leg assignment preserves the relative directions at site '" +
                               site.id + "'");
  }

  SiteBinding binding;
  binding.site = site_index;
  const ParticipantSpec* anchor = nullptr;
  for (const ParticipantSpec& p : abstract.participants) {
    if (p.kind != ParticipantKind::Vehicle) continue;
    if (!anchor) anchor = &p;
    std::size_t di = std::find(dirs.begin(), dirs.end(), p.direction) - dirs.begin();
    ParticipantBinding pb;
    pb.road = legs[chosen[di]];
    pb.lane = p.running_lane;
    pb.travel = network.roads[pb.road].direction_vector();
    const Road& r = network.roads[pb.road];
    int reach = p.running_lane + static_cast<int>(std::count(
                                     p.actions.begin(), p.actions.end(), DrivingAction::ChangeLane));
    if (p.running_lane > static_cast<int>(r.lanes.size()) ||
        reach > static_cast<int>(r.lanes.size())) {
      throw UnmappableDirections("participant '" + p.id + "' needs lane " + std::to_string(reach) +
                                 " but road '" + r.id + "' has " + std::to_string(r.lanes.size()));
    }
    binding.participants[p.id] = pb;
  }

  // Pedestrian movement in map coordinates follows from its orientation
  // relative to the anchor vehicle; crossing binds to a leg across the
  // movement, walking to a leg along it.
  for (const ParticipantSpec& p : abstract.participants) {
    if (p.kind != ParticipantKind::Pedestrian) continue;
    geom::Vec2 anchor_dir = binding.participants.at(anchor->id).travel;
    geom::Vec2 move;
    switch (orientation_class(p.direction, anchor->direction)) {
      case OrientationClass::Same: move = anchor_dir; break;
      case OrientationClass::Opposing: move = anchor_dir * -1.0; break;
      case OrientationClass::Perpendicular: move = geom::left_normal(anchor_dir); break;
    }
    bool crossing = std::find(p.actions.begin(), p.actions.end(), DrivingAction::PedestrianCross) !=
                    p.actions.end();
    std::optional<int> target;
    for (int leg : legs) {
      OrientationClass got = orientation_class(move, network.roads[leg].direction_vector());
      bool ok = crossing ? (got == OrientationClass::Perpendicular)
                         : (got == OrientationClass::Same || got == OrientationClass::Opposing);
      if (ok) {
        target = leg;
        break;
      }
    }
    if (!target) {
      throw UnmappableDirections("no leg fits pedestrian '" + p.id + "' at site '" + site.id + "'");
    }
    ParticipantBinding pb;
    pb.road = *target;
    pb.lane = std::min(p.running_lane, static_cast<int>(network.roads[*target].lanes.size()));
    pb.travel = move;
    binding.participants[p.id] = pb;
  }
  return binding;
}

geom::Polygon roadside_strip(const Road& road, double strip_width) {
  const Lane* rightmost = &road.lanes.front();
  for (const Lane& l : road.lanes) {
    if (l.index > rightmost->index) rightmost = &l;
  }
  geom::Vec2 u = rightmost->direction();
  geom::Vec2 right = geom::left_normal(u) * -1.0;
  geom::Vec2 shift = right * (rightmost->width_m * 0.5 + strip_width * 0.5);
  return geom::segment_rectangle(rightmost->entrance + shift, rightmost->exit + shift,
                                 strip_width * 0.5);
}

}  // namespace crashsynth
