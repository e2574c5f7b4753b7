#include "swarmsim/scenario_io.hpp"

#include <fstream>

namespace swarmsim {

using nlohmann::json;

namespace {

Point2 point_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) {
    throw ValidationError({"expected a point [x, y], got " + j.dump()});
  }
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

json point_to_json(Point2 p) { return json::array({p.x, p.y}); }

std::vector<Point2> points_from_json(const json& j, const char* key) {
  if (!j.is_array()) throw ValidationError({std::string(key) + " must be an array"});
  std::vector<Point2> out;
  out.reserve(j.size());
  for (const auto& e : j) out.push_back(point_from_json(e));
  return out;
}

template <typename T>
void read_optional(const json& obj, const char* key, T& dst) {
  if (auto it = obj.find(key); it != obj.end()) dst = it->get<T>();
}

}  // namespace

Scenario scenario_from_json(const json& doc) {
  Scenario s;
  try {
    read_optional(doc, "id", s.id);
    s.n_uavs = doc.at("n_uavs").get<std::size_t>();
    s.initial_state.uavs = points_from_json(doc.at("initial_positions"), "initial_positions");
    s.desired = points_from_json(doc.at("desired_positions"), "desired_positions");
    if (auto it = doc.find("obstacles"); it != doc.end()) {
      for (const auto& o : *it) {
        s.obstacles.push_back({point_from_json(o.at("min")), point_from_json(o.at("max"))});
      }
    }
    s.sensing_mode = sensing_mode_from_string(doc.at("sensing_mode").get<std::string>());
    read_optional(doc, "n_known", s.n_known);

    const json& noise = doc.at("noise");
    read_optional(noise, "shadowing_std_db", s.noise.shadowing_std_db);
    read_optional(noise, "path_loss_exponent", s.noise.path_loss_exponent);
    read_optional(noise, "nlos_bias_db", s.noise.nlos_bias_db);
    read_optional(noise, "model_aware", s.noise.model_aware);
    const bool has_deg = noise.contains("bearing_std_deg");
    const bool has_rad = noise.contains("bearing_std_rad");
    if (has_deg && has_rad) {
      throw ValidationError({"noise: give either bearing_std_deg or bearing_std_rad, not both"});
    }
    if (has_deg) s.noise.bearing_std_rad = deg_to_rad(noise.at("bearing_std_deg").get<double>());
    if (has_rad) s.noise.bearing_std_rad = noise.at("bearing_std_rad").get<double>();
    if (auto it = noise.find("ranging_info"); it != noise.end()) {
      const auto v = it->get<std::string>();
      if (v == "linear") {
        s.noise.ranging_info = RangingInfoModel::Linear;
      } else if (v == "exact") {
        s.noise.ranging_info = RangingInfoModel::Exact;
      } else {
        throw ValidationError({"noise.ranging_info must be \"linear\" or \"exact\""});
      }
    }

    const json& motion = doc.at("motion");
    read_optional(motion, "speed", s.motion.speed);
    read_optional(motion, "slot_duration", s.motion.slot_duration);
    read_optional(motion, "safety_distance", s.motion.safety_distance);
    read_optional(motion, "obstacle_clearance", s.motion.obstacle_clearance);
    read_optional(motion, "goal_tolerance", s.motion.goal_tolerance);
    read_optional(motion, "max_slots", s.motion.max_slots);

    if (auto it = doc.find("options"); it != doc.end()) {
      read_optional(*it, "baseline_per_slot", s.options.baseline_per_slot);
      if (auto cm = it->find("control_mode"); cm != it->end()) {
        const auto v = cm->get<std::string>();
        if (v == "per_uav") {
          s.options.control_mode = ControlMode::PerUav;
        } else if (v == "joint") {
          s.options.control_mode = ControlMode::Joint;
        } else {
          throw ValidationError({"options.control_mode must be \"per_uav\" or \"joint\""});
        }
      }
      if (auto kg = it->find("kappa_geometry"); kg != it->end()) {
        const auto v = kg->get<std::string>();
        if (v == "previous_estimate") {
          s.options.kappa_geometry = KappaGeometry::PreviousEstimate;
        } else if (v == "truth") {
          s.options.kappa_geometry = KappaGeometry::Truth;
        } else {
          throw ValidationError({"options.kappa_geometry must be \"previous_estimate\" or \"truth\""});
        }
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError({std::string("malformed scenario document: ") + e.what()});
  }
  validate_scenario(s);
  return s;
}

json scenario_to_json(const Scenario& s) {
  json doc;
  doc["id"] = s.id;
  doc["n_uavs"] = s.n_uavs;
  doc["n_known"] = s.n_known;
  doc["initial_positions"] = json::array();
  for (auto p : s.initial_state.uavs) doc["initial_positions"].push_back(point_to_json(p));
  doc["desired_positions"] = json::array();
  for (auto p : s.desired) doc["desired_positions"].push_back(point_to_json(p));
  doc["obstacles"] = json::array();
  for (const auto& o : s.obstacles) {
    doc["obstacles"].push_back({{"min", point_to_json(o.min_corner)}, {"max", point_to_json(o.max_corner)}});
  }
  doc["sensing_mode"] = to_string(s.sensing_mode);

  json noise;
  noise["shadowing_std_db"] = s.noise.shadowing_std_db;
  noise["path_loss_exponent"] = s.noise.path_loss_exponent;
  noise["nlos_bias_db"] = s.noise.nlos_bias_db;
  const double deg = rad_to_deg(s.noise.bearing_std_rad);
  // Degrees are the documented unit; fall back to radians when the
  // conversion would not reproduce the stored value bit for bit.
  if (deg_to_rad(deg) == s.noise.bearing_std_rad) {
    noise["bearing_std_deg"] = deg;
  } else {
    noise["bearing_std_rad"] = s.noise.bearing_std_rad;
  }
  noise["model_aware"] = s.noise.model_aware;
  noise["ranging_info"] = s.noise.ranging_info == RangingInfoModel::Linear ? "linear" : "exact";
  doc["noise"] = noise;

  doc["motion"] = {{"speed", s.motion.speed},
                   {"slot_duration", s.motion.slot_duration},
                   {"safety_distance", s.motion.safety_distance},
                   {"obstacle_clearance", s.motion.obstacle_clearance},
                   {"goal_tolerance", s.motion.goal_tolerance},
                   {"max_slots", s.motion.max_slots}};
  doc["options"] = {{"baseline_per_slot", s.options.baseline_per_slot},
                    {"control_mode", s.options.control_mode == ControlMode::PerUav ? "per_uav" : "joint"},
                    {"kappa_geometry",
                     s.options.kappa_geometry == KappaGeometry::PreviousEstimate ? "previous_estimate" : "truth"}};
  return doc;
}

void apply_override(json& doc, const std::string& assignment, const json* schema) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw InvalidArgument("override '" + assignment + "' is not of the form key.path=value");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);

  json* node = &doc;
  const json* known = schema;
  std::size_t start = 0;
  while (true) {
    const auto dot_pos = path.find('.', start);
    const std::string key = path.substr(start, dot_pos == std::string::npos ? std::string::npos : dot_pos - start);
    const bool in_schema = known != nullptr && known->is_object() && known->contains(key);
    if (node->is_null() && known != nullptr) *node = json::object();
    if (!node->is_object() || (!node->contains(key) && !in_schema)) {
      throw InvalidArgument("override '" + assignment + "' references unknown key '" + path + "'");
    }
    known = in_schema ? &known->at(key) : nullptr;
    node = &(*node)[key];
    if (dot_pos == std::string::npos) break;
    start = dot_pos + 1;
  }
  json value = json::parse(raw, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) value = raw;
  *node = std::move(value);
  // The two bearing keys are mutually exclusive; the override wins.
  if (path == "noise.bearing_std_deg") doc["noise"].erase("bearing_std_rad");
  if (path == "noise.bearing_std_rad") doc["noise"].erase("bearing_std_deg");
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  json doc = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) throw ValidationError({path.string() + " is not valid JSON"});
  return doc;
}

Scenario load_scenario(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  json doc = read_json_file(path);
  if (!overrides.empty()) {
    // Keys absent from the file but part of the format (optional fields) may be overridden too.
    json schema = scenario_to_json(scenario_from_json(doc));
    schema["noise"]["bearing_std_deg"] = 0.0;
    schema["noise"]["bearing_std_rad"] = 0.0;
    for (const auto& o : overrides) apply_override(doc, o, &schema);
  }
  Scenario s = scenario_from_json(doc);
  if (!doc.contains("id")) s.id = path.stem().string();
  return s;
}

void save_scenario(const std::filesystem::path& path, const Scenario& scenario) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << scenario_to_json(scenario).dump(2) << '\n';
}

}  // namespace swarmsim
