#include "clothtrack/optimize.hpp"

#include <cmath>
#include <limits>

#include "clothtrack/spatial.hpp"

namespace clothtrack {

double CorrectionField::max_abs() const {
  double m = 0.0;
  for (const Vec3& d : deltas) m = std::max(m, d.cwiseAbs().maxCoeff());
  return m;
}

void TtoConfig::validate() const {
  require(alpha >= 0.0 && beta >= 0.0, ErrorKind::kConfig, "TTO weights must be non-negative");
  require(iterations >= 1, ErrorKind::kConfig, "TTO needs at least one iteration");
  require(learning_rate > 0.0, ErrorKind::kConfig, "TTO learning rate must be positive");
  require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0, ErrorKind::kConfig,
          "Adam moment decay rates must be in [0, 1)");
  require(epsilon > 0.0, ErrorKind::kConfig, "Adam epsilon must be positive");
  require(correspondence_refresh >= 1, ErrorKind::kConfig,
          "correspondence refresh interval must be >= 1");
}

double rigidity_loss(std::span<const Vec3> deltas, std::span<const Edge> edges) {
  require(!edges.empty(), ErrorKind::kInvalidArgument, "rigidity loss over an empty edge set");
  double sum = 0.0;
  for (const Edge& e : edges) {
    require(e.a < deltas.size() && e.b < deltas.size(), ErrorKind::kInvalidArgument,
            "edge index out of range");
    sum += squared_distance(deltas[e.a], deltas[e.b]);
  }
  return sum / static_cast<double>(edges.size());
}

namespace {

void check_inputs(std::span<const Vec3> predicted, std::span<const Vec3> deltas,
                  const PointCloud& observation, std::span<const VertexIndex> visible) {
  require(predicted.size() == deltas.size(), ErrorKind::kDimensionMismatch,
          "correction field does not match the predicted state");
  require(!visible.empty(), ErrorKind::kLostTracking, "visible set is empty");
  require(!observation.empty(), ErrorKind::kLostTracking, "observation is empty");
  for (VertexIndex v : visible)
    require(v < predicted.size(), ErrorKind::kInvalidArgument, "visible index out of range");
}

}  // namespace

std::vector<std::size_t> match_observation(std::span<const Vec3> predicted,
                                           std::span<const Vec3> deltas,
                                           const PointCloud& observation,
                                           std::span<const VertexIndex> visible) {
  check_inputs(predicted, deltas, observation, visible);
  std::vector<Vec3> displaced(visible.size());
  for (std::size_t k = 0; k < visible.size(); ++k)
    displaced[k] = predicted[visible[k]] + deltas[visible[k]];
  const KdTree tree(displaced);
  std::vector<std::size_t> match(observation.size());
  for (std::size_t i = 0; i < observation.size(); ++i)
    match[i] = tree.nearest(observation.points[i]).index;
  return match;
}

TtoEvaluation tto_objective(std::span<const Vec3> predicted, std::span<const Vec3> deltas,
                            const PointCloud& observation, std::span<const VertexIndex> visible,
                            std::span<const std::size_t> correspondences,
                            std::span<const Edge> edges, double alpha, double beta) {
  check_inputs(predicted, deltas, observation, visible);
  require(correspondences.size() == observation.size(), ErrorKind::kDimensionMismatch,
          "one correspondence per observed point required");
  TtoEvaluation out;
  out.gradient.assign(deltas.size(), Vec3::Zero());

  const double inv_p = 1.0 / static_cast<double>(observation.size());
  double chamfer = 0.0;
  for (std::size_t i = 0; i < observation.size(); ++i) {
    const VertexIndex v = visible[correspondences[i]];
    const Vec3 residual = predicted[v] + deltas[v] - observation.points[i];
    chamfer += residual.squaredNorm();
    out.gradient[v] += (2.0 * alpha * inv_p) * residual;
  }
  out.chamfer = chamfer * inv_p;

  out.rigidity = rigidity_loss(deltas, edges);
  const double rig_scale = 2.0 * beta / static_cast<double>(edges.size());
  for (const Edge& e : edges) {
    const Vec3 diff = rig_scale * (deltas[e.a] - deltas[e.b]);
    out.gradient[e.a] += diff;
    out.gradient[e.b] -= diff;
  }
  out.loss = alpha * out.chamfer + beta * out.rigidity;
  return out;
}

TtoEvaluation tto_objective(std::span<const Vec3> predicted, std::span<const Vec3> deltas,
                            const PointCloud& observation, std::span<const VertexIndex> visible,
                            std::span<const Edge> edges, double alpha, double beta) {
  const auto match = match_observation(predicted, deltas, observation, visible);
  return tto_objective(predicted, deltas, observation, visible, match, edges, alpha, beta);
}

Adam::Adam(std::size_t n, double learning_rate, double beta1, double beta2, double epsilon)
    : lr_(learning_rate),
      beta1_(beta1),
      beta2_(beta2),
      eps_(epsilon),
      m_(n, Vec3::Zero()),
      v_(n, Vec3::Zero()) {}

void Adam::step(std::vector<Vec3>& params, std::span<const Vec3> gradient) {
  require(params.size() == m_.size() && gradient.size() == m_.size(),
          ErrorKind::kDimensionMismatch, "Adam parameter size changed");
  beta1_pow_ *= beta1_;
  beta2_pow_ *= beta2_;
  const double c1 = 1.0 / (1.0 - beta1_pow_);
  const double c2 = 1.0 / (1.0 - beta2_pow_);
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * gradient[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * gradient[i].cwiseProduct(gradient[i]);
    const Vec3 m_hat = m_[i] * c1;
    const Vec3 v_hat = v_[i] * c2;
    params[i].array() -= lr_ * m_hat.array() / (v_hat.array().sqrt() + eps_);
  }
}

TtoResult run_tto(std::span<const Vec3> predicted, const PointCloud& observation,
                  std::span<const VertexIndex> visible, std::span<const Edge> edges,
                  const TtoConfig& config) {
  config.validate();
  const std::size_t n = predicted.size();
  std::vector<Vec3> deltas(n, Vec3::Zero());
  Adam adam(n, config.learning_rate, config.beta1, config.beta2, config.epsilon);

  TtoResult result;
  result.correction = CorrectionField::zeros(n);
  result.best_loss = std::numeric_limits<double>::infinity();
  result.best_loss_history.reserve(config.iterations + 1);

  std::vector<std::size_t> match;
  for (int it = 0; it <= config.iterations; ++it) {
    if (it % config.correspondence_refresh == 0)
      match = match_observation(predicted, deltas, observation, visible);
    TtoEvaluation eval =
        tto_objective(predicted, deltas, observation, visible, match, edges, config.alpha,
                      config.beta);
    if (!std::isfinite(eval.loss)) {
      result.non_finite = true;
      break;
    }
    if (it == 0) result.initial_loss = eval.loss;
    if (eval.loss < result.best_loss) {
      result.best_loss = eval.loss;
      result.best_iteration = it;
      result.correction.deltas = deltas;
    }
    result.best_loss_history.push_back(result.best_loss);
    if (it == config.iterations) break;
    adam.step(deltas, eval.gradient);
  }
  return result;
}

}  // namespace clothtrack
