#include "clothtrack/config.hpp"

#include <charconv>
#include <cstdio>
#include <functional>
#include <sstream>

namespace clothtrack {

void Settings::validate() const {
  scenario.validate();
  tracker.validate();
}

namespace {

struct Field {
  std::string key;
  std::function<std::string()> get;
  std::function<void(const std::string&)> set;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw Error(ErrorKind::kConfig, "'" + key + "': expected a number, got '" + text + "'");
  return v;
}

template <typename Int>
Int parse_int(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  Int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw Error(ErrorKind::kConfig, "'" + key + "': expected an integer, got '" + text + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

std::string fmt_list(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += fmt_double(values[i]);
  }
  return out;
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const std::string& item : split(text, ',')) out.push_back(parse_double(key, item));
  if (out.empty()) throw Error(ErrorKind::kConfig, "'" + key + "': empty list");
  return out;
}

class Registry {
 public:
  std::vector<Field> fields;

  void real(const std::string& key, double& ref) {
    fields.push_back({key, [&ref] { return fmt_double(ref); },
                      [&ref, key](const std::string& v) { ref = parse_double(key, v); }});
  }
  template <typename Int>
  void integer(const std::string& key, Int& ref) {
    fields.push_back({key, [&ref] { return std::to_string(ref); },
                      [&ref, key](const std::string& v) { ref = parse_int<Int>(key, v); }});
  }
  void list(const std::string& key, std::vector<double>& ref) {
    fields.push_back({key, [&ref] { return fmt_list(ref); },
                      [&ref, key](const std::string& v) { ref = parse_list(key, v); }});
  }
  void custom(const std::string& key, std::function<std::string()> get,
              std::function<void(const std::string&)> set) {
    fields.push_back({key, std::move(get), std::move(set)});
  }

  void sim(const std::string& prefix, SimParams& p) {
    real(prefix + ".stiffness", p.stiffness);
    real(prefix + ".dynamic_friction", p.dynamic_friction);
    real(prefix + ".particle_friction", p.particle_friction);
    real(prefix + ".gravity", p.gravity);
    real(prefix + ".dt", p.dt);
    integer(prefix + ".substeps", p.substeps);
    integer(prefix + ".solver_iterations", p.solver_iterations);
    real(prefix + ".particle_radius", p.particle_radius);
    real(prefix + ".damping", p.damping);
  }

  void tto(const std::string& prefix, TtoConfig& c) {
    real(prefix + ".alpha", c.alpha);
    real(prefix + ".beta", c.beta);
    integer(prefix + ".iterations", c.iterations);
    real(prefix + ".learning_rate", c.learning_rate);
    real(prefix + ".beta1", c.beta1);
    real(prefix + ".beta2", c.beta2);
    real(prefix + ".epsilon", c.epsilon);
    integer(prefix + ".correspondence_refresh", c.correspondence_refresh);
  }

  void camera(const std::string& prefix, CameraModel& c) {
    real(prefix + ".x_min", c.x_min);
    real(prefix + ".x_max", c.x_max);
    real(prefix + ".y_min", c.y_min);
    real(prefix + ".y_max", c.y_max);
    integer(prefix + ".width", c.width);
    integer(prefix + ".height", c.height);
    real(prefix + ".camera_height", c.camera_height);
    real(prefix + ".depth_noise_sigma", c.depth_noise_sigma);
    real(prefix + ".dropout_rate", c.dropout_rate);
    real(prefix + ".z_epsilon", c.z_epsilon);
    real(prefix + ".splat_radius", c.splat_radius);
  }
};

std::string fmt_script(const std::vector<ScriptedPick>& script) {
  std::string out;
  for (std::size_t i = 0; i < script.size(); ++i) {
    if (i) out += ';';
    const ScriptedPick& s = script[i];
    for (int k = 0; k < 3; ++k) out += fmt_double(s.pick_point[k]) + ',';
    for (int k = 0; k < 3; ++k) out += fmt_double(s.place_point[k]) + (k < 2 ? "," : "");
  }
  return out;
}

std::vector<ScriptedPick> parse_script(const std::string& key, const std::string& text) {
  std::vector<ScriptedPick> out;
  if (trim(text).empty()) return out;
  for (const std::string& item : split(text, ';')) {
    const std::vector<double> v = parse_list(key, item);
    if (v.size() != 6)
      throw Error(ErrorKind::kConfig, "'" + key + "': each pick needs px,py,pz,qx,qy,qz");
    out.push_back({Vec3(v[0], v[1], v[2]), Vec3(v[3], v[4], v[5])});
  }
  return out;
}

Registry registry(Settings& s) {
  Registry r;
  ScenarioConfig& sc = s.scenario;
  TrackerConfig& tc = s.tracker;

  r.integer("scenario.seed", sc.rng_seed);
  r.integer("scenario.num_trajectories", sc.num_trajectories);
  r.integer("scenario.segments", sc.segments_per_trajectory);
  r.integer("scenario.num_x", sc.num_x);
  r.integer("scenario.num_y", sc.num_y);
  r.real("scenario.spacing", sc.spacing);
  r.custom(
      "scenario.policy", [&sc] { return std::string(to_string(sc.policy)); },
      [&sc](const std::string& v) { sc.policy = pick_policy_from_string(trim(v)); });
  r.custom(
      "scenario.script", [&sc] { return fmt_script(sc.script); },
      [&sc](const std::string& v) { sc.script = parse_script("scenario.script", v); });
  r.integer("scenario.substeps_per_action", sc.substeps_per_action);
  r.real("scenario.lift_height", sc.lift_height);
  r.real("scenario.drag_lift_height", sc.drag_lift_height);
  r.real("scenario.min_place_distance", sc.min_place_distance);
  r.real("scenario.max_place_distance", sc.max_place_distance);
  r.real("scenario.occluder_radius", sc.occluder_radius);
  r.integer("scenario.settle_steps", sc.settle_steps);
  r.integer("scenario.max_pick_retries", sc.max_pick_retries);
  r.real("scenario.explosion_threshold", sc.explosion_threshold);
  r.sim("hidden", sc.hidden_params);
  r.camera("camera", sc.camera);

  r.sim("sim", tc.base_params);
  r.tto("tto1", tc.tto1);
  r.tto("tto2", tc.tto2);
  r.real("tracker.gamma", tc.gamma);
  r.integer("tracker.max_line_search_retries", tc.max_line_search_retries);
  r.real("tracker.explosion_threshold", tc.explosion_threshold);
  r.real("tracker.collision_threshold", tc.collision_threshold);
  r.integer("tracker.calibration_rank", tc.calibration_rank);
  r.custom(
      "tracker.calibration",
      [&tc] { return std::string(tc.calibration_mode == CalibrationMode::kOnline ? "online" : "offline"); },
      [&tc](const std::string& v) {
        const std::string m = trim(v);
        if (m == "online") {
          tc.calibration_mode = CalibrationMode::kOnline;
        } else if (m == "offline") {
          tc.calibration_mode = CalibrationMode::kOffline;
        } else {
          throw Error(ErrorKind::kConfig, "'tracker.calibration' must be online or offline");
        }
      });
  r.custom(
      "tracker.ablation", [&tc] { return tc.ablation.label(); },
      [&tc](const std::string& v) { tc.ablation = AblationFlags::from_label(trim(v)); });
  r.list("grid.stiffness", tc.grid.stiffness);
  r.list("grid.dynamic_friction", tc.grid.dynamic_friction);
  r.list("grid.particle_friction", tc.grid.particle_friction);
  return r;
}

}  // namespace

FlatConfig parse_flat_config(const std::string& text) {
  FlatConfig out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::kConfig, "line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty())
      throw Error(ErrorKind::kConfig, "line " + std::to_string(lineno) + ": empty key");
    if (!out.emplace(key, trim(line.substr(eq + 1))).second)
      throw Error(ErrorKind::kConfig,
                  "line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
  }
  return out;
}

void apply_setting(Settings& settings, const std::string& key, const std::string& value) {
  for (const Field& f : registry(settings).fields)
    if (f.key == key) {
      f.set(value);
      return;
    }
  throw Error(ErrorKind::kConfig, "unknown config key '" + key + "'");
}

void apply_config(Settings& settings, const FlatConfig& config) {
  Registry r = registry(settings);
  for (const auto& [key, value] : config) {
    bool found = false;
    for (const Field& f : r.fields)
      if (f.key == key) {
        f.set(value);
        found = true;
        break;
      }
    if (!found) throw Error(ErrorKind::kConfig, "unknown config key '" + key + "'");
  }
}

std::string format_config(const Settings& settings) {
  Settings copy = settings;
  std::map<std::string, std::string> sorted;
  for (const Field& f : registry(copy).fields) sorted[f.key] = f.get();
  std::string out;
  for (const auto& [key, value] : sorted) out += key + " = " + value + "\n";
  return out;
}

std::vector<std::string> config_keys() {
  Settings s;
  std::vector<std::string> keys;
  for (const Field& f : registry(s).fields) keys.push_back(f.key);
  return keys;
}

std::string format_sim_params(const SimParams& params) {
  Registry r;
  SimParams copy = params;
  r.sim("sim", copy);
  std::string out;
  for (const Field& f : r.fields) out += f.key + " = " + f.get() + "\n";
  return out;
}

SimParams parse_sim_params(const std::string& text) {
  SimParams p;
  Registry r;
  r.sim("sim", p);
  for (const auto& [key, value] : parse_flat_config(text)) {
    bool found = false;
    for (const Field& f : r.fields)
      if (f.key == key) {
        f.set(value);
        found = true;
      }
    if (!found) throw Error(ErrorKind::kConfig, "unknown sim parameter '" + key + "'");
  }
  return p;
}

}  // namespace clothtrack
