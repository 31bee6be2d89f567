#include "crashsynth/scenario.hpp"

#include <fstream>
#include <sstream>

#include "crashsynth/errors.hpp"
#include "json.hpp"

namespace crashsynth {

using nlohmann::json;

double PlannedAction::duration() const {
  double sum = 0.0;
  for (double d : dt) sum += d;
  return sum;
}

double ParticipantScenarioPlan::total_time() const {
  double sum = 0.0;
  for (const auto& a : actions) sum += a.duration();
  return sum;
}

const Waypoint& ParticipantScenarioPlan::final_waypoint() const {
  if (actions.empty() || actions.back().waypoints.empty()) {
    throw SemanticError("participant " + id + " has no waypoints");
  }
  return actions.back().waypoints.back();
}

const ParticipantScenarioPlan& ReconstructedScenario::participant(const std::string& pid) const {
  for (const auto& p : participants) {
    if (p.id == pid) return p;
  }
  throw SemanticError("scenario has no participant " + pid);
}

const ParticipantScenarioPlan& ReconstructedScenario::striker() const {
  return participant(abstract.crash.striker_id);
}

std::string serialize_scenario(const ReconstructedScenario& s, int indent) {
  json j;
  j["abstract"] = json::parse(serialize_abstract(s.abstract, 0));
  j["site_id"] = s.site_id;
  j["environment"] = {{"weather", to_string(s.abstract.weather)},
                      {"lighting", to_string(s.abstract.lighting)}};

  json parts = json::array();
  for (const auto& p : s.participants) {
    json jp;
    jp["id"] = p.id;
    jp["role"] = p.is_striker ? "striker" : "victim";
    json plan = json::array();
    double t = 0.0;
    for (const auto& act : p.actions) {
      json ja;
      ja["action"] = to_string(act.geometry.action);
      json wps = json::array();
      for (std::size_t i = 0; i < act.waypoints.size(); ++i) {
        const Waypoint& w = act.waypoints[i];
        if (i > 0) t += act.dt[i - 1];
        wps.push_back({{"x", w.x}, {"y", w.y}, {"v", w.v}, {"t", t}});
      }
      ja["waypoints"] = std::move(wps);
      plan.push_back(std::move(ja));
    }
    jp["plan"] = std::move(plan);
    parts.push_back(std::move(jp));
  }
  j["participants"] = std::move(parts);

  json area = json::array();
  for (const auto& v : s.collision_area) area.push_back({v.x, v.y});
  j["collision_area"] = std::move(area);

  return j.dump(indent) + "\n";
}

namespace {

double require_number(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw SchemaError(std::string("waypoint missing numeric '") + key + "'");
  }
  return j.at(key).get<double>();
}

// Rebuilds velocity vectors from positions and speeds: each waypoint points
// along its outgoing chord (the incoming one for the last waypoint).
void reconstruct_velocities(std::vector<Waypoint>& wps) {
  for (std::size_t i = 0; i < wps.size(); ++i) {
    geom::Vec2 dir{0.0, 0.0};
    if (i + 1 < wps.size()) {
      dir = wps[i + 1].pos() - wps[i].pos();
    } else if (i > 0) {
      dir = wps[i].pos() - wps[i - 1].pos();
    }
    if (geom::norm(dir) > 1e-12) dir = geom::normalized(dir);
    wps[i].vx = dir.x * wps[i].v;
    wps[i].vy = dir.y * wps[i].v;
  }
}

}  // namespace

ReconstructedScenario parse_scenario(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError("scenario root must be an object");
  for (const char* key : {"abstract", "site_id", "participants", "collision_area"}) {
    if (!j.contains(key)) throw SchemaError(std::string("scenario missing '") + key + "'");
  }

  ReconstructedScenario s;
  s.abstract = parse_abstract(j.at("abstract").dump());
  if (!j.at("site_id").is_string()) throw SchemaError("'site_id' must be a string");
  s.site_id = j.at("site_id").get<std::string>();

  if (!j.at("participants").is_array()) throw SchemaError("'participants' must be an array");
  for (const auto& jp : j.at("participants")) {
    if (!jp.is_object() || !jp.contains("id") || !jp.contains("plan")) {
      throw SchemaError("participant entries need 'id' and 'plan'");
    }
    ParticipantScenarioPlan p;
    p.id = jp.at("id").get<std::string>();
    const ParticipantSpec& spec = s.abstract.participant(p.id);
    p.kind = spec.kind;
    p.is_striker = (p.id == s.abstract.crash.striker_id);
    if (jp.contains("role")) {
      const std::string role = jp.at("role").get<std::string>();
      if (role != (p.is_striker ? "striker" : "victim")) {
        throw SemanticError("participant " + p.id + " role disagrees with the abstract");
      }
    }

    if (!jp.at("plan").is_array() || jp.at("plan").empty()) {
      throw SchemaError("participant " + p.id + " needs a non-empty 'plan'");
    }
    double last_t = 0.0;
    bool first_action = true;
    for (const auto& ja : jp.at("plan")) {
      PlannedAction act;
      act.geometry.action = normalize_action(ja.at("action").get<std::string>());
      act.geometry.participant = p.id;
      if (!ja.contains("waypoints") || !ja.at("waypoints").is_array() ||
          ja.at("waypoints").size() < 2) {
        throw SchemaError("action entries need at least two waypoints");
      }
      double prev_t = 0.0;
      for (const auto& jw : ja.at("waypoints")) {
        Waypoint w;
        w.x = require_number(jw, "x");
        w.y = require_number(jw, "y");
        w.v = require_number(jw, "v");
        double t = require_number(jw, "t");
        if (!act.waypoints.empty()) {
          if (t <= prev_t) throw SemanticError("waypoint times must be strictly increasing");
          act.dt.push_back(t - prev_t);
        } else if (!first_action && std::abs(t - last_t) > 1e-6) {
          throw SemanticError("chained actions must continue the time axis");
        }
        prev_t = t;
        act.waypoints.push_back(w);
      }
      last_t = prev_t;
      first_action = false;
      reconstruct_velocities(act.waypoints);
      p.actions.push_back(std::move(act));
    }
    s.participants.push_back(std::move(p));
  }
  if (s.participants.size() != s.abstract.participants.size()) {
    throw SemanticError("scenario participants disagree with the abstract");
  }

  if (!j.at("collision_area").is_array() || j.at("collision_area").size() < 3) {
    throw SchemaError("'collision_area' needs at least three vertices");
  }
  for (const auto& jv : j.at("collision_area")) {
    if (!jv.is_array() || jv.size() != 2) {
      throw SchemaError("collision_area vertices must be [x, y] pairs");
    }
    s.collision_area.push_back({jv.at(0).get<double>(), jv.at(1).get<double>()});
  }
  s.collision_area = geom::normalize_polygon(s.collision_area);
  return s;
}

ReconstructedScenario parse_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::vector<ResolvedAction> resolve_participant_chain(
    const RoadNetwork& network, const Site& site, const ParticipantBinding& binding,
    const ParticipantSpec& spec, double abstract_speed_limit,
    const std::optional<geom::Vec2>& collision_seed, const SolverConfig& config) {
  std::vector<ResolvedAction> chain;
  ManeuverState state = initial_state(network, binding);
  std::optional<geom::Vec2> seed_entry;
  for (std::size_t k = 0; k < spec.actions.size(); ++k) {
    const bool is_final = (k + 1 == spec.actions.size());
    ResolvedAction resolved =
        resolve_action(network, site, state, spec, spec.actions[k], static_cast<int>(k),
                       is_final, abstract_speed_limit, is_final ? collision_seed : std::nullopt,
                       seed_entry, config);
    state = resolved.next_state;
    seed_entry = resolved.geometry.seed_path.back();
    chain.push_back(std::move(resolved));
  }
  return chain;
}

void rebind_scenario(ReconstructedScenario& s, const RoadNetwork& network,
                     const SolverConfig& config) {
  const int site_index = network.site_index(s.site_id);
  const Site& site = network.sites[site_index];
  SiteBinding binding = convert_info(network, site_index, s.abstract);

  std::optional<geom::Vec2> seed;
  if (!s.collision_area.empty()) seed = geom::polygon_centroid(s.collision_area);

  for (auto& p : s.participants) {
    const ParticipantSpec& spec = s.abstract.participant(p.id);
    if (p.actions.size() != spec.actions.size()) {
      throw SemanticError("participant " + p.id + " plan length disagrees with the abstract");
    }
    std::vector<ResolvedAction> chain = resolve_participant_chain(
        network, site, binding.participants.at(p.id), spec, s.abstract.speed_limit_mps, seed,
        config);
    for (std::size_t k = 0; k < chain.size(); ++k) {
      if (chain[k].geometry.action != p.actions[k].geometry.action) {
        throw SemanticError("participant " + p.id + " action order disagrees with the abstract");
      }
      auto waypoints = std::move(p.actions[k].waypoints);
      auto dt = std::move(p.actions[k].dt);
      p.actions[k].geometry = chain[k].geometry;
      p.actions[k].waypoints = std::move(waypoints);
      p.actions[k].dt = std::move(dt);
      p.actions[k].source_road = chain[k].source_road;
      p.actions[k].source_lane = chain[k].source_lane;
      p.actions[k].dest_road = chain[k].dest_road;
      p.actions[k].dest_lane = chain[k].dest_lane;
    }
  }
}

}  // namespace crashsynth
