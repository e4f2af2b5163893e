#pragma once

// Test-time optimisation of a per-vertex correction field: one-way Chamfer
// from the observation to the displaced visible vertices plus a rigidity term
// over mesh edges, minimised with Adam.

#include <span>
#include <vector>

#include "clothtrack/mesh.hpp"

namespace clothtrack {

struct CorrectionField {
  std::vector<Vec3> deltas;

  static CorrectionField zeros(std::size_t n) { return {std::vector<Vec3>(n, Vec3::Zero())}; }
  std::size_t size() const { return deltas.size(); }
  double max_abs() const;
};

struct TtoConfig {
  double alpha = 1.0;
  double beta = 10.0;
  int iterations = 200;
  double learning_rate = 2e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int correspondence_refresh = 1;

  void validate() const;
};

// Mean over edges of |delta_i - delta_j|^2.
double rigidity_loss(std::span<const Vec3> deltas, std::span<const Edge> edges);

struct TtoEvaluation {
  double loss = 0.0;
  double chamfer = 0.0;
  double rigidity = 0.0;
  std::vector<Vec3> gradient;
};

// For every observed point, the position in `visible` of its nearest
// displaced visible vertex.
std::vector<std::size_t> match_observation(std::span<const Vec3> predicted,
                                           std::span<const Vec3> deltas,
                                           const PointCloud& observation,
                                           std::span<const VertexIndex> visible);

// Loss and analytic gradient with correspondences recomputed from the
// current displacement.
TtoEvaluation tto_objective(std::span<const Vec3> predicted, std::span<const Vec3> deltas,
                            const PointCloud& observation, std::span<const VertexIndex> visible,
                            std::span<const Edge> edges, double alpha, double beta);

// Same with correspondences held fixed.
TtoEvaluation tto_objective(std::span<const Vec3> predicted, std::span<const Vec3> deltas,
                            const PointCloud& observation, std::span<const VertexIndex> visible,
                            std::span<const std::size_t> correspondences,
                            std::span<const Edge> edges, double alpha, double beta);

class Adam {
 public:
  Adam(std::size_t n, double learning_rate, double beta1, double beta2, double epsilon);
  void step(std::vector<Vec3>& params, std::span<const Vec3> gradient);

 private:
  double lr_, beta1_, beta2_, eps_;
  double beta1_pow_ = 1.0;
  double beta2_pow_ = 1.0;
  std::vector<Vec3> m_, v_;
};

struct TtoResult {
  CorrectionField correction;
  double initial_loss = 0.0;
  double best_loss = 0.0;
  int best_iteration = 0;
  // Best loss seen after each evaluation (iterations + 1 entries unless the
  // run was cut short by a non-finite loss).
  std::vector<double> best_loss_history;
  bool non_finite = false;
};

TtoResult run_tto(std::span<const Vec3> predicted, const PointCloud& observation,
                  std::span<const VertexIndex> visible, std::span<const Edge> edges,
                  const TtoConfig& config);

}  // namespace clothtrack
