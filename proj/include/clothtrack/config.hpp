#pragma once

// Flat "key = value" configuration. Keys are dotted paths such as
// `tto1.beta`, `sim.stiffness` or `scenario.num_trajectories`; `#` starts a
// comment. Every field of ScenarioConfig, TrackerConfig, TtoConfig,
// SimParams and CameraModel is reachable.

#include <map>
#include <string>
#include <vector>

#include "clothtrack/scenario.hpp"
#include "clothtrack/tracker.hpp"

namespace clothtrack {

struct Settings {
  ScenarioConfig scenario;
  TrackerConfig tracker;

  void validate() const;
};

using FlatConfig = std::map<std::string, std::string>;

// Throws Error(kConfig) on malformed lines or duplicate keys.
FlatConfig parse_flat_config(const std::string& text);

// Throws Error(kConfig) on unknown keys or unparsable values. Does not
// validate the result.
void apply_config(Settings& settings, const FlatConfig& config);
void apply_setting(Settings& settings, const std::string& key, const std::string& value);

// Every key with its current value, one per line, sorted by key.
std::string format_config(const Settings& settings);

std::vector<std::string> config_keys();

// Only the sim.* keys, for snapshotting calibrated parameters.
std::string format_sim_params(const SimParams& params);
SimParams parse_sim_params(const std::string& text);

}  // namespace clothtrack
