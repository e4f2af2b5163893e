#pragma once

// Position-based cloth dynamics with a kinematic picker.
//
// One dyn_step covers `substeps` integration substeps of length dt. Each
// substep predicts positions with semi-implicit Euler, runs Gauss-Seidel
// projection of the mesh distance constraints, particle separation and the
// z = 0 ground plane, applies Coulomb friction, and derives velocities from
// the position change.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clothtrack/mesh.hpp"

namespace clothtrack {

struct SimParams {
  double stiffness = 0.9;
  double dynamic_friction = 2.3;
  double particle_friction = 2.3;
  double gravity = 9.81;
  double dt = 0.01;
  int substeps = 4;
  int solver_iterations = 8;
  double particle_radius = 0.005;
  double damping = 0.02;

  // Stiffness range over which the projection factor goes from 0 to 1.
  static constexpr double kStiffnessScale = 1.6;

  double projection_factor() const;
  double step_duration() const { return dt * substeps; }
  void validate() const;
};

// Per-vertex displacement over one step for the vertices flagged in
// `affected`. It replaces the inertial prediction of those vertices: at
// substep s of S they are predicted at
//   start + displacement * s / S + path_offsets[s - 1]
// and stay dynamic during projection. `path_offsets` is empty or has S
// entries of one offset per vertex; it lets the straight-line path bend the
// way a reference rollout bent (see substep_path_offsets).
struct PseudoAction {
  std::vector<Vec3> displacement;
  std::vector<std::uint8_t> affected;
  std::vector<std::vector<Vec3>> path_offsets;

  static PseudoAction zeros(std::size_t num_vertices);
};

// `predictions`, if given, receives the S pre-projection positions.
ClothState dyn_step(const ClothMesh& mesh, const ClothState& state, const SimParams& params,
                    const LowLevelAction& action,
                    const PseudoAction* pseudo_action = nullptr,
                    std::vector<std::vector<Vec3>>* predictions = nullptr);

// Offsets of the recorded predictions from the line start -> end, so that a
// pseudo-action with displacement end - start and these offsets predicts
// exactly `predictions` at every substep.
std::vector<std::vector<Vec3>> substep_path_offsets(
    std::span<const Vec3> start, std::span<const Vec3> end,
    const std::vector<std::vector<Vec3>>& predictions);

std::vector<ClothState> simulate_segment(const ClothMesh& mesh, const ClothState& state,
                                         const SimParams& params,
                                         std::span<const LowLevelAction> actions);

// True if any vertex moved faster than `threshold` (m/s) over `dt`, or any
// coordinate of `next` is non-finite.
bool explosion_check(const ClothState& prev, const ClothState& next, double dt,
                     double threshold);

}  // namespace clothtrack
