#include "clothtrack/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "clothtrack/spatial.hpp"

namespace clothtrack {

double SimParams::projection_factor() const {
  return std::clamp(stiffness / kStiffnessScale, 0.0, 1.0);
}

void SimParams::validate() const {
  require(dt > 0.0, ErrorKind::kConfig, "dt must be positive");
  require(substeps >= 1, ErrorKind::kConfig, "substeps must be >= 1");
  require(solver_iterations >= 1, ErrorKind::kConfig, "solver_iterations must be >= 1");
  require(particle_radius > 0.0, ErrorKind::kConfig, "particle_radius must be positive");
  require(dynamic_friction >= 0.0 && particle_friction >= 0.0, ErrorKind::kConfig,
          "friction coefficients must be non-negative");
  require(stiffness >= 0.0 && stiffness <= 2.0, ErrorKind::kConfig, "stiffness must be in [0, 2]");
  require(damping >= 0.0 && damping <= 1.0, ErrorKind::kConfig, "damping must be in [0, 1]");
  require(std::isfinite(gravity), ErrorKind::kConfig, "gravity must be finite");
}

PseudoAction PseudoAction::zeros(std::size_t num_vertices) {
  PseudoAction p;
  p.displacement.assign(num_vertices, Vec3::Zero());
  p.affected.assign(num_vertices, 0);
  return p;
}

namespace {

inline void project_distance(Vec3& pi, Vec3& pj, double wi, double wj, double rest,
                             double factor) {
  const double wsum = wi + wj;
  if (wsum == 0.0) return;
  const double dx = pi.x() - pj.x();
  const double dy = pi.y() - pj.y();
  const double dz = pi.z() - pj.z();
  const double len = std::sqrt(dx * dx + dy * dy + dz * dz);
  if (len < 1e-12) return;
  const double s = factor * (len - rest) / (wsum * len);
  const double ai = wi * s;
  const double aj = wj * s;
  pi.x() -= ai * dx;
  pi.y() -= ai * dy;
  pi.z() -= ai * dz;
  pj.x() += aj * dx;
  pj.y() += aj * dy;
  pj.z() += aj * dz;
}

}  // namespace

ClothState dyn_step(const ClothMesh& mesh, const ClothState& state, const SimParams& params,
                    const LowLevelAction& action, const PseudoAction* pseudo_action,
                    std::vector<std::vector<Vec3>>* predictions) {
  state.validate(mesh);
  params.validate();
  const std::size_t n = mesh.num_vertices();
  action.validate(n);
  if (pseudo_action != nullptr) {
    require(pseudo_action->displacement.size() == n && pseudo_action->affected.size() == n,
            ErrorKind::kDimensionMismatch, "pseudo-action size differs from vertex count");
    require(all_finite(pseudo_action->displacement), ErrorKind::kNonFinite,
            "pseudo-action is not finite");
    const auto& off = pseudo_action->path_offsets;
    require(off.empty() || (off.size() == static_cast<std::size_t>(params.substeps) &&
                            std::all_of(off.begin(), off.end(),
                                        [n](const auto& o) { return o.size() == n; })),
            ErrorKind::kDimensionMismatch, "pseudo-action path offsets do not match the step");
  }
  if (predictions != nullptr) predictions->clear();

  const auto& edges = mesh.edges();
  const auto& rest = mesh.rest_lengths();
  const auto& order = mesh.solve_order();
  const double factor = params.projection_factor();
  const double h = params.dt;
  const int num_sub = params.substeps;
  const double radius = params.particle_radius;

  std::vector<Vec3> x = state.positions;
  std::vector<Vec3> v = state.velocities;
  const std::vector<Vec3>& x_start = state.positions;
  std::vector<Vec3> p(n);
  std::vector<double> w(n);
  std::vector<double> ground_depth(n);

  for (int s = 1; s <= num_sub; ++s) {
    const double frac = static_cast<double>(s) / num_sub;
    for (std::size_t i = 0; i < n; ++i) {
      if (action.grasp_active && i == action.picked_vertex) {
        p[i] = x_start[i] + action.picker_delta * frac;
        w[i] = 0.0;
      } else if (pseudo_action != nullptr && pseudo_action->affected[i]) {
        p[i] = x_start[i] + pseudo_action->displacement[i] * frac;
        if (!pseudo_action->path_offsets.empty()) p[i] += pseudo_action->path_offsets[s - 1][i];
        w[i] = 1.0;
      } else {
        v[i].z() -= params.gravity * h;
        p[i] = x[i] + v[i] * h;
        w[i] = 1.0;
      }
      ground_depth[i] = (w[i] > 0.0 && p[i].z() < 0.0) ? -p[i].z() : 0.0;
    }

    if (predictions != nullptr) predictions->push_back(p);

    const auto candidates = pairs_within(p, 1.5 * radius);
    std::vector<double> overlap(candidates.size(), 0.0);

    for (int it = 0; it < params.solver_iterations; ++it) {
      for (const std::uint32_t e : order)
        project_distance(p[edges[e].a], p[edges[e].b], w[edges[e].a], w[edges[e].b], rest[e],
                         factor);
      for (std::size_t c = 0; c < candidates.size(); ++c) {
        const auto [i, j] = candidates[c];
        const double d = std::sqrt(squared_distance(p[i], p[j]));
        if (d < radius && w[i] + w[j] > 0.0) {
          overlap[c] = std::max(overlap[c], radius - d);
          project_distance(p[i], p[j], w[i], w[j], radius, 1.0);
        }
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (w[i] > 0.0 && p[i].z() < 0.0) {
          ground_depth[i] = std::max(ground_depth[i], -p[i].z());
          p[i].z() = 0.0;
        }
      }
    }

    // Coulomb friction on the displacement accumulated this substep.
    for (std::size_t i = 0; i < n; ++i) {
      if (w[i] == 0.0 || ground_depth[i] == 0.0) continue;
      Vec3 tangential = p[i] - x[i];
      tangential.z() = 0.0;
      const double len = tangential.norm();
      const double limit = params.dynamic_friction * ground_depth[i];
      if (len <= limit) {
        p[i].x() = x[i].x();
        p[i].y() = x[i].y();
      } else {
        p[i] -= tangential * (limit / len);
      }
    }
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (overlap[c] == 0.0) continue;
      const auto [i, j] = candidates[c];
      const double wsum = w[i] + w[j];
      const Vec3 d = p[i] - p[j];
      const double len = d.norm();
      if (wsum == 0.0 || len < 1e-12) continue;
      const Vec3 normal = d / len;
      const Vec3 rel = (p[i] - x[i]) - (p[j] - x[j]);
      const Vec3 rel_t = rel - normal * normal.dot(rel);
      const double t_len = rel_t.norm();
      if (t_len == 0.0) continue;
      const double limit = params.particle_friction * overlap[c];
      const Vec3 corr = t_len <= limit ? rel_t : Vec3(rel_t * (limit / t_len));
      p[i] -= (w[i] / wsum) * corr;
      p[j] += (w[j] / wsum) * corr;
    }

    const double keep = 1.0 - params.damping;
    for (std::size_t i = 0; i < n; ++i) {
      if (w[i] > 0.0 && p[i].z() < 0.0) p[i].z() = 0.0;
      v[i] = (p[i] - x[i]) * (keep / h);
      x[i] = p[i];
    }
  }

  ClothState next;
  next.positions = std::move(x);
  next.velocities = std::move(v);
  next.time_index = state.time_index + 1;
  return next;
}

std::vector<std::vector<Vec3>> substep_path_offsets(
    std::span<const Vec3> start, std::span<const Vec3> end,
    const std::vector<std::vector<Vec3>>& predictions) {
  require(start.size() == end.size(), ErrorKind::kDimensionMismatch,
          "path endpoints differ in size");
  const std::size_t num_sub = predictions.size();
  std::vector<std::vector<Vec3>> out(num_sub);
  for (std::size_t s = 0; s < num_sub; ++s) {
    require(predictions[s].size() == start.size(), ErrorKind::kDimensionMismatch,
            "prediction size differs from vertex count");
    const double frac = static_cast<double>(s + 1) / static_cast<double>(num_sub);
    out[s].resize(start.size());
    for (std::size_t i = 0; i < start.size(); ++i)
      out[s][i] = predictions[s][i] - (start[i] + (end[i] - start[i]) * frac);
  }
  return out;
}

std::vector<ClothState> simulate_segment(const ClothMesh& mesh, const ClothState& state,
                                         const SimParams& params,
                                         std::span<const LowLevelAction> actions) {
  require(!actions.empty(), ErrorKind::kInvalidArgument, "simulate_segment needs actions");
  std::vector<ClothState> out;
  out.reserve(actions.size());
  const ClothState* current = &state;
  for (const LowLevelAction& a : actions) {
    out.push_back(dyn_step(mesh, *current, params, a));
    current = &out.back();
  }
  return out;
}

bool explosion_check(const ClothState& prev, const ClothState& next, double dt,
                     double threshold) {
  require(prev.positions.size() == next.positions.size(), ErrorKind::kDimensionMismatch,
          "explosion_check on states of different size");
  const double limit2 = threshold * threshold * dt * dt;
  for (std::size_t i = 0; i < next.positions.size(); ++i) {
    if (!next.positions[i].allFinite()) return true;
    if (i < next.velocities.size() && !next.velocities[i].allFinite()) return true;
    if (squared_distance(prev.positions[i], next.positions[i]) > limit2) return true;
  }
  return false;
}

}  // namespace clothtrack
