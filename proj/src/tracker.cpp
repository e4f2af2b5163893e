#include "clothtrack/tracker.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>

#include "clothtrack/parallel.hpp"
#include "clothtrack/spatial.hpp"

#ifndef CLOTHTRACK_VERSION
#define CLOTHTRACK_VERSION "dev"
#endif

namespace clothtrack {

CalibrationGrid CalibrationGrid::grid_125() {
  CalibrationGrid g;
  g.dynamic_friction.resize(5);
  g.particle_friction.resize(5);
  return g;
}

std::size_t CalibrationGrid::size() const {
  return stiffness.size() * dynamic_friction.size() * particle_friction.size();
}

SimParams CalibrationGrid::at(std::size_t index, const SimParams& base) const {
  require(index < size(), ErrorKind::kInvalidArgument, "calibration grid index out of range");
  SimParams p = base;
  const std::size_t np = particle_friction.size();
  const std::size_t nd = dynamic_friction.size();
  p.particle_friction = particle_friction[index % np];
  p.dynamic_friction = dynamic_friction[(index / np) % nd];
  p.stiffness = stiffness[index / (np * nd)];
  return p;
}

std::size_t CalibrationGrid::midpoint_index() const {
  const std::size_t np = particle_friction.size();
  const std::size_t nd = dynamic_friction.size();
  return ((stiffness.size() / 2) * nd + nd / 2) * np + np / 2;
}

void CalibrationGrid::validate() const {
  require(!stiffness.empty() && !dynamic_friction.empty() && !particle_friction.empty(),
          ErrorKind::kConfig, "calibration grid axes must be non-empty");
  for (double s : stiffness)
    require(s >= 0.0 && s <= 2.0, ErrorKind::kConfig, "grid stiffness outside [0, 2]");
  for (double f : dynamic_friction)
    require(f >= 0.0, ErrorKind::kConfig, "grid friction must be non-negative");
  for (double f : particle_friction)
    require(f >= 0.0, ErrorKind::kConfig, "grid friction must be non-negative");
}

std::string AblationFlags::label() const {
  if (no_pseudo_action) return "no_pseudo_action";
  if (no_dyn_init) return "no_dyn_init";
  if (no_act_cond) return "no_act_cond";
  if (no_tto2) return "no_tto2";
  return "ours";
}

AblationFlags AblationFlags::from_label(const std::string& label) {
  std::string key = label;
  std::replace(key.begin(), key.end(), '-', '_');
  AblationFlags f;
  if (key == "ours" || key == "none") return f;
  if (key == "no_pseudo_action" || key == "no_pseudo_act") {
    f.no_pseudo_action = true;
  } else if (key == "no_dyn_init") {
    f.no_dyn_init = true;
  } else if (key == "no_act_cond") {
    f.no_act_cond = true;
  } else if (key == "no_tto2") {
    f.no_tto2 = true;
  } else {
    throw Error(ErrorKind::kConfig, "unknown ablation '" + label + "'");
  }
  return f;
}

int AblationFlags::count() const {
  return int(no_pseudo_action) + int(no_dyn_init) + int(no_act_cond) + int(no_tto2);
}

void TrackerConfig::validate() const {
  require(gamma > 0.0 && gamma < 1.0, ErrorKind::kConfig, "gamma must be in (0, 1)");
  require(max_line_search_retries >= 1, ErrorKind::kConfig, "line-search retries must be >= 1");
  require(explosion_threshold > 0.0, ErrorKind::kConfig, "explosion threshold must be positive");
  require(ablation.count() <= 1, ErrorKind::kConfig, "at most one ablation may be enabled");
  require(collision_threshold > 0.0, ErrorKind::kConfig, "collision threshold must be positive");
  tto1.validate();
  tto2.validate();
  grid.validate();
  base_params.validate();
}

CalibrationResult calibrate_grid(const ClothMesh& mesh, const ClothState& state,
                                 std::span<const LowLevelAction> actions,
                                 const PointCloud& final_observation,
                                 const CalibrationGrid& grid, const SimParams& base,
                                 const CameraModel& camera, double explosion_threshold) {
  grid.validate();
  require(!actions.empty(), ErrorKind::kInvalidArgument, "calibration needs actions");
  require(!final_observation.empty(), ErrorKind::kInvalidArgument,
          "calibration needs a non-empty final observation");
  state.validate(mesh);

  const double inf = std::numeric_limits<double>::infinity();
  CalibrationResult out;
  out.objectives.assign(grid.size(), inf);
  parallel_for(grid.size(), [&](std::size_t k) {
    const SimParams params = grid.at(k, base);
    ClothState current = state;
    for (const LowLevelAction& a : actions) {
      ClothState next = dyn_step(mesh, current, params, a);
      if (explosion_check(current, next, params.step_duration(), explosion_threshold)) return;
      current = std::move(next);
    }
    const auto visible = visible_vertices(mesh, current, camera);
    if (visible.empty()) return;
    out.objectives[k] =
        chamfer_one_way(final_observation, gather(current.positions, visible));
  });

  out.ranking.resize(grid.size());
  std::iota(out.ranking.begin(), out.ranking.end(), std::size_t{0});
  std::stable_sort(out.ranking.begin(), out.ranking.end(), [&](std::size_t a, std::size_t b) {
    return out.objectives[a] < out.objectives[b];
  });
  out.all_exploded = !std::isfinite(out.objectives[out.ranking.front()]);
  out.index = out.all_exploded ? grid.midpoint_index() : out.ranking.front();
  out.objective = out.objectives[out.index];
  out.params = grid.at(out.index, base);
  return out;
}

SimParams calibrate(const ClothMesh& mesh, const ClothState& state,
                    std::span<const LowLevelAction> actions, const PointCloud& final_observation,
                    const CalibrationGrid& grid, const CameraModel& camera, const SimParams& base,
                    double explosion_threshold) {
  return calibrate_grid(mesh, state, actions, final_observation, grid, base, camera,
                        explosion_threshold)
      .params;
}

PseudoAction PseudoActionProposal::at_scale(double scale) const {
  PseudoAction p;
  p.affected = affected;
  p.path_offsets = path_offsets;
  p.displacement.resize(dynamics_motion.size());
  for (std::size_t i = 0; i < dynamics_motion.size(); ++i)
    p.displacement[i] = dynamics_motion[i] + scale * correction[i];
  return p;
}

LineSearchOutcome line_search_step(const ClothMesh& mesh, const ClothState& state,
                                   const SimParams& params, const LowLevelAction& action,
                                   const PseudoActionProposal& proposal,
                                   const TrackerConfig& config) {
  const std::size_t n = mesh.num_vertices();
  require(proposal.dynamics_motion.size() == n && proposal.correction.size() == n &&
              proposal.affected.size() == n,
          ErrorKind::kDimensionMismatch, "pseudo-action proposal does not match the mesh");
  const double duration = params.step_duration();

  double scale = 1.0;
  for (int attempt = 0; attempt < config.max_line_search_retries; ++attempt) {
    const PseudoAction pseudo = proposal.at_scale(scale);
    ClothState next = dyn_step(mesh, state, params, action, &pseudo);
    if (!explosion_check(state, next, duration, config.explosion_threshold))
      return {std::move(next), attempt, scale};
    scale *= config.gamma;
  }
  ClothState next = dyn_step(mesh, state, params, action);
  if (explosion_check(state, next, duration, config.explosion_threshold))
    throw Error(ErrorKind::kUnstable, "dynamics explode even without a pseudo-action");
  return {std::move(next), config.max_line_search_retries, 0.0};
}

int TrackResult::total_retries() const {
  int total = 0;
  for (const StepDiagnostics& s : steps) total += s.retries;
  return total;
}

double visible_chamfer(const ClothMesh& mesh, const ClothState& state, const PointCloud& cloud,
                       const CameraModel& camera, ChamferMetric metric) {
  const auto visible = visible_vertices(mesh, state, camera);
  if (visible.empty() || cloud.empty()) return std::numeric_limits<double>::infinity();
  const auto surface = gather(state.positions, visible);
  return chamfer_bidirectional(std::span<const Vec3>(surface),
                               std::span<const Vec3>(cloud.points), metric);
}

TrackResult track_segment(const ClothMesh& mesh, const ClothState& initial,
                          std::span<const LowLevelAction> actions,
                          std::span<const PointCloud> observations, const SimParams& params,
                          const TrackerConfig& config, const CameraModel& camera) {
  const auto t0 = std::chrono::steady_clock::now();
  config.validate();
  params.validate();
  initial.validate(mesh);
  require(actions.size() == observations.size(), ErrorKind::kDimensionMismatch,
          "actions and observations differ in length");
  require(!actions.empty(), ErrorKind::kInvalidArgument, "segment without actions");

  const AblationFlags& ablate = config.ablation;
  const std::span<const Edge> edges(mesh.edges());
  const std::size_t n = mesh.num_vertices();

  TrackResult result;
  result.params = params;
  result.states.reserve(actions.size());
  ClothState state = initial;

  for (std::size_t t = 0; t < actions.size(); ++t) {
    const LowLevelAction& action = actions[t];
    const PointCloud& observed = observations[t];
    StepDiagnostics diag;
    diag.step = static_cast<int>(t) + 1;

    ClothState next;
    if (ablate.no_pseudo_action || observed.empty()) {
      next = dyn_step(mesh, state, params, action);
      if (explosion_check(state, next, params.step_duration(), config.explosion_threshold))
        throw Error(ErrorKind::kUnstable, "plain rollout exploded");
    } else {
      const LowLevelAction applied = ablate.no_act_cond ? LowLevelAction::none() : action;
      const bool dynamics_init = !(ablate.no_dyn_init || ablate.no_act_cond);
      std::vector<std::vector<Vec3>> predictions;
      const ClothState init =
          dynamics_init ? dyn_step(mesh, state, params, action, nullptr, &predictions) : state;
      const auto visible = visible_vertices(mesh, init, camera);
      if (visible.empty())
        throw Error(ErrorKind::kLostTracking,
                    "no visible vertices at step " + std::to_string(diag.step));
      const TtoResult tto = run_tto(init.positions, observed, visible, edges, config.tto1);
      diag.tto_initial_loss = tto.initial_loss;
      diag.tto_best_loss = tto.best_loss;
      diag.num_visible = visible.size();

      PseudoActionProposal proposal;
      proposal.dynamics_motion.assign(n, Vec3::Zero());
      proposal.correction.assign(n, Vec3::Zero());
      proposal.affected.assign(n, 0);
      for (VertexIndex v : visible) {
        proposal.affected[v] = 1;
        proposal.dynamics_motion[v] = init.positions[v] - state.positions[v];
        proposal.correction[v] = tto.correction.deltas[v];
      }
      if (dynamics_init)
        proposal.path_offsets =
            substep_path_offsets(state.positions, init.positions, predictions);
      LineSearchOutcome ls = line_search_step(mesh, state, params, applied, proposal, config);
      diag.retries = ls.retries;
      diag.scale = ls.scale;
      next = std::move(ls.state);
    }
    diag.visible_chamfer = visible_chamfer(mesh, next, observed, camera);
    result.steps.push_back(diag);
    result.states.push_back(next);
    state = std::move(next);
  }

  result.pre_tto2 = state;
  result.final_state = state;
  const PointCloud& last = observations.back();
  result.pre_tto2_chamfer = visible_chamfer(mesh, state, last, camera);
  if (!ablate.no_tto2 && !last.empty()) {
    const auto visible = visible_vertices(mesh, state, camera);
    if (visible.empty()) throw Error(ErrorKind::kLostTracking, "no visible vertices before TTO2");
    const TtoResult tto = run_tto(state.positions, last, visible, edges, config.tto2);
    for (std::size_t i = 0; i < n; ++i)
      result.final_state.positions[i] += tto.correction.deltas[i];
  }
  result.final_chamfer = visible_chamfer(mesh, result.final_state, last, camera);
  result.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

std::size_t collision_count(const ClothMesh& mesh, const ClothState& state, double threshold) {
  require(threshold > 0.0, ErrorKind::kInvalidArgument, "collision threshold must be positive");
  require(state.positions.size() == mesh.num_vertices(), ErrorKind::kDimensionMismatch,
          "state does not match mesh");
  std::size_t count = 0;
  for (const auto& [i, j] : pairs_within(state.positions, threshold))
    if (!mesh.adjacent(i, j)) ++count;
  return count;
}

std::optional<CalibrationResult> CalibrationCache::find(std::uint64_t key) const {
  std::lock_guard lock(mutex_);
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void CalibrationCache::insert(std::uint64_t key, const CalibrationResult& result) {
  std::lock_guard lock(mutex_);
  entries_.emplace(key, result);
}

namespace {

class Fnv1a {
 public:
  void bytes(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      hash_ ^= p[i];
      hash_ *= 1099511628211ull;
    }
  }
  void value(double v) { bytes(&v, sizeof v); }
  void value(std::uint64_t v) { bytes(&v, sizeof v); }
  void vec(const Vec3& v) {
    value(v.x());
    value(v.y());
    value(v.z());
  }
  std::uint64_t digest() const { return hash_; }

 private:
  std::uint64_t hash_ = 14695981039346656037ull;
};

}  // namespace

std::uint64_t calibration_key(const ClothState& state, std::span<const LowLevelAction> actions,
                              const PointCloud& final_observation, const TrackerConfig& config,
                              const CameraModel& camera) {
  Fnv1a h;
  for (const Vec3& p : state.positions) h.vec(p);
  for (const Vec3& v : state.velocities) h.vec(v);
  for (const LowLevelAction& a : actions) {
    h.value(static_cast<std::uint64_t>(a.picked_vertex));
    h.vec(a.picker_delta);
    h.value(static_cast<std::uint64_t>(a.grasp_active));
  }
  for (const Vec3& p : final_observation.points) h.vec(p);
  for (const auto* axis : {&config.grid.stiffness, &config.grid.dynamic_friction,
                           &config.grid.particle_friction}) {
    h.value(static_cast<std::uint64_t>(axis->size()));
    for (double v : *axis) h.value(v);
  }
  const SimParams& b = config.base_params;
  for (double v : {b.gravity, b.dt, b.particle_radius, b.damping, config.explosion_threshold,
                   camera.x_min, camera.x_max, camera.y_min, camera.y_max, camera.z_epsilon,
                   camera.splat_radius})
    h.value(v);
  h.value(static_cast<std::uint64_t>(b.substeps));
  h.value(static_cast<std::uint64_t>(b.solver_iterations));
  h.value(static_cast<std::uint64_t>(camera.width));
  h.value(static_cast<std::uint64_t>(camera.height));
  return h.digest();
}

namespace {

CalibrationResult cached_calibration(const ClothMesh& mesh, const ClothState& state,
                                     const Segment& segment, const TrackerConfig& config,
                                     const CameraModel& camera, CalibrationCache* cache) {
  std::uint64_t key = 0;
  if (cache != nullptr) {
    key = calibration_key(state, segment.actions, segment.observations.back(), config, camera);
    if (auto hit = cache->find(key)) return *hit;
  }
  CalibrationResult r =
      calibrate_grid(mesh, state, segment.actions, segment.observations.back(), config.grid,
                     config.base_params, camera, config.explosion_threshold);
  if (cache != nullptr) cache->insert(key, r);
  return r;
}

std::size_t ranked_choice(const CalibrationResult& r, std::size_t rank) {
  if (r.all_exploded) return r.index;
  return r.ranking[std::min(rank, r.ranking.size() - 1)];
}

// Mode of the per-segment winners over plain rollouts of every trajectory;
// ties go to the lowest grid index.
std::size_t offline_calibration(std::span<const Trajectory> trajectories,
                                const TrackerConfig& config, const CameraModel& camera,
                                CalibrationCache* cache) {
  std::map<std::size_t, int> votes;
  for (const Trajectory& traj : trajectories) {
    const ClothMesh mesh = traj.mesh();
    ClothState state = traj.initial_state;
    for (const Segment& seg : traj.segments) {
      if (seg.observations.empty() || seg.observations.back().empty()) continue;
      const CalibrationResult r = cached_calibration(mesh, state, seg, config, camera, cache);
      ++votes[r.index];
      state = simulate_segment(mesh, state, r.params, seg.actions).back();
    }
  }
  if (votes.empty()) return config.grid.midpoint_index();
  std::size_t best = votes.begin()->first;
  int best_votes = votes.begin()->second;
  for (const auto& [index, count] : votes)
    if (count > best_votes) {
      best = index;
      best_votes = count;
    }
  return best;
}

}  // namespace

PseudoLabelDataset generate_pseudo_dataset(std::span<const Trajectory> trajectories,
                                           const TrackerConfig& config,
                                           const CameraModel& camera, CalibrationCache* cache,
                                           const SegmentObserver& observer) {
  config.validate();
  camera.validate();
  PseudoLabelDataset dataset;
  dataset.method = config.ablation.label();
  dataset.code_version = CLOTHTRACK_VERSION;
  if (!trajectories.empty()) {
    dataset.num_x = trajectories.front().num_x;
    dataset.num_y = trajectories.front().num_y;
    dataset.spacing = trajectories.front().spacing;
  }

  std::optional<std::size_t> offline_index;
  if (config.calibration_mode == CalibrationMode::kOffline)
    offline_index = offline_calibration(trajectories, config, camera, cache);

  for (const Trajectory& traj : trajectories) {
    traj.validate();
    const ClothMesh mesh = traj.mesh();
    const std::size_t first = dataset.records.size();

    DatasetRecord initial;
    initial.trajectory_id = traj.id;
    initial.segment_index = 0;
    initial.observation = traj.initial_observation;
    initial.pseudo_mesh = traj.initial_state;
    dataset.records.push_back(std::move(initial));

    ClothState state = traj.initial_state;
    for (std::size_t s = 0; s < traj.segments.size(); ++s) {
      const Segment& seg = traj.segments[s];
      try {
        std::size_t index = 0;
        if (offline_index) {
          index = *offline_index;
        } else {
          const CalibrationResult r = cached_calibration(mesh, state, seg, config, camera, cache);
          index = ranked_choice(r, config.calibration_rank);
        }
        const SimParams params = config.grid.at(index, config.base_params);
        TrackResult tracked =
            track_segment(mesh, state, seg.actions, seg.observations, params, config, camera);
        if (observer) observer(traj, s, tracked);

        DatasetRecord rec;
        rec.trajectory_id = traj.id;
        rec.segment_index = static_cast<int>(s) + 1;
        rec.observation = seg.observations.back();
        rec.pseudo_mesh = tracked.final_state;
        rec.pre_tto2 = tracked.pre_tto2;
        rec.params = params;
        rec.calibration_index = index;
        rec.diagnostics = std::move(tracked.steps);
        rec.wall_time_seconds = tracked.wall_time_seconds;
        dataset.records.push_back(std::move(rec));
        state = std::move(tracked.final_state);
      } catch (const Error&) {
        for (std::size_t r = first; r < dataset.records.size(); ++r)
          dataset.records[r].partial = true;
        break;
      }
    }
  }
  return dataset;
}

}  // namespace clothtrack
