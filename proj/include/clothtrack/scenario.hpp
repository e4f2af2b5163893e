#pragma once

// Synthetic pick-and-place trajectories simulated under hidden "real world"
// parameters and observed through the noisy top-down camera.

#include <cstdint>
#include <string>
#include <vector>

#include "clothtrack/dynamics.hpp"
#include "clothtrack/mesh.hpp"
#include "clothtrack/sensing.hpp"

namespace clothtrack {

enum class PickPolicy { kRandomEdgePick, kFoldInHalf, kDrag, kScripted };

const char* to_string(PickPolicy policy);
PickPolicy pick_policy_from_string(const std::string& name);

struct ScriptedPick {
  Vec3 pick_point = Vec3::Zero();
  Vec3 place_point = Vec3::Zero();
};

struct ScenarioConfig {
  std::uint64_t rng_seed = 0;
  int num_trajectories = 1;
  int segments_per_trajectory = 3;
  int num_x = 25;
  int num_y = 25;
  double spacing = 0.005;
  // Midway between calibration grid values so the tracker's dynamics are
  // never exact.
  SimParams hidden_params{.stiffness = 0.725, .dynamic_friction = 1.85,
                          .particle_friction = 2.75};
  PickPolicy policy = PickPolicy::kRandomEdgePick;
  std::vector<ScriptedPick> script;
  int substeps_per_action = 40;
  double lift_height = 0.08;
  double drag_lift_height = 0.02;
  double min_place_distance = 0.06;
  double max_place_distance = 0.15;
  double occluder_radius = 0.02;
  int settle_steps = 10;
  int max_pick_retries = 20;
  // Random and drag picks whose ground-truth rollout moves any vertex faster
  // than this (m/s) are resampled, up to max_pick_retries times.
  double explosion_threshold = 2.5;
  CameraModel camera;

  void validate() const;
};

// Grasp, lift, carry, lower and release. `pick_vertex` is the grasped vertex
// and `start` its position when grasped.
std::vector<LowLevelAction> decompose_pick_place(const PickPlaceAction& action,
                                                 VertexIndex pick_vertex, const Vec3& start);

std::vector<Trajectory> generate_synthetic_trajectories(const ScenarioConfig& scenario);

// Occluding spheres for the tweezer during `action` applied to `state`.
std::vector<Sphere> tweezer_occluders(const ClothState& after, const LowLevelAction& action,
                                      double radius);

}  // namespace clothtrack
