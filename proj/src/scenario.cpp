#include "clothtrack/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "clothtrack/parallel.hpp"

namespace clothtrack {

const char* to_string(PickPolicy policy) {
  switch (policy) {
    case PickPolicy::kRandomEdgePick: return "random-edge-pick";
    case PickPolicy::kFoldInHalf: return "fold-in-half";
    case PickPolicy::kDrag: return "drag";
    case PickPolicy::kScripted: return "scripted";
  }
  return "unknown";
}

PickPolicy pick_policy_from_string(const std::string& name) {
  for (PickPolicy p : {PickPolicy::kRandomEdgePick, PickPolicy::kFoldInHalf, PickPolicy::kDrag,
                       PickPolicy::kScripted})
    if (name == to_string(p)) return p;
  throw Error(ErrorKind::kConfig, "unknown pick policy '" + name + "'");
}

void ScenarioConfig::validate() const {
  require(num_trajectories >= 0, ErrorKind::kConfig, "num_trajectories must be >= 0");
  require(segments_per_trajectory >= 0, ErrorKind::kConfig, "segments must be >= 0");
  require(num_x >= 2 && num_y >= 2 && spacing > 0.0, ErrorKind::kConfig, "invalid cloth grid");
  require(substeps_per_action >= 1, ErrorKind::kConfig, "substeps_per_action must be >= 1");
  require(lift_height > 0.0 && drag_lift_height > 0.0, ErrorKind::kConfig,
          "lift heights must be positive");
  require(min_place_distance >= 0.0 && max_place_distance >= min_place_distance,
          ErrorKind::kConfig, "invalid place distance range");
  require(occluder_radius >= 0.0, ErrorKind::kConfig, "occluder radius must be >= 0");
  require(settle_steps >= 0 && max_pick_retries >= 1, ErrorKind::kConfig,
          "invalid settle/retry counts");
  require(explosion_threshold > 0.0, ErrorKind::kConfig, "explosion threshold must be positive");
  require(policy != PickPolicy::kScripted ||
              script.size() >= static_cast<std::size_t>(segments_per_trajectory),
          ErrorKind::kConfig, "scripted policy needs one pick per segment");
  hidden_params.validate();
  camera.validate();
}

std::vector<LowLevelAction> decompose_pick_place(const PickPlaceAction& action,
                                                 VertexIndex pick_vertex, const Vec3& start) {
  action.validate();
  const int total = action.num_substeps;
  int n_lift = 0, n_lower = 0, n_release = 0;
  if (total >= 4) {
    n_lift = std::max(1, total / 4);
    n_lower = std::max(1, 3 * total / 20);
    n_release = std::max(1, 3 * total / 20);
  } else if (total >= 2) {
    n_release = 1;
  }
  const int n_move = total - n_lift - n_lower - n_release;

  Vec3 carry = action.place_point - start;
  carry.z() = 0.0;
  const double lowered = n_lift > 0 ? 0.8 * action.lift_height : 0.0;

  std::vector<LowLevelAction> out;
  out.reserve(total);
  auto grasp = [&](const Vec3& delta) { out.push_back({pick_vertex, delta, true}); };
  for (int i = 0; i < n_lift; ++i) grasp(Vec3(0.0, 0.0, action.lift_height / n_lift));
  for (int i = 0; i < n_move; ++i) grasp(carry / n_move);
  for (int i = 0; i < n_lower; ++i) grasp(Vec3(0.0, 0.0, -lowered / n_lower));
  for (int i = 0; i < n_release; ++i) out.push_back({pick_vertex, Vec3::Zero(), false});
  return out;
}

std::vector<Sphere> tweezer_occluders(const ClothState& after, const LowLevelAction& action,
                                      double radius) {
  if (!action.grasp_active || radius <= 0.0) return {};
  return {Sphere{after.positions[action.picked_vertex], radius}};
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0) {
  return splitmix64(splitmix64(splitmix64(splitmix64(seed) ^ a) ^ b) ^ c);
}

bool inside_workspace(const Vec3& p, const CameraModel& cam, double margin) {
  return p.x() >= cam.x_min + margin && p.x() <= cam.x_max - margin &&
         p.y() >= cam.y_min + margin && p.y() <= cam.y_max - margin;
}

struct PickChoice {
  VertexIndex vertex = kNoVertex;
  PickPlaceAction action;
};

PickChoice choose_pick(const ScenarioConfig& sc, const ClothMesh& mesh, const ClothState& state,
                       int segment, std::mt19937_64& rng) {
  PickChoice choice;
  choice.action.num_substeps = sc.substeps_per_action;
  choice.action.lift_height = sc.lift_height;
  const double margin = 2.0 * sc.spacing;

  if (sc.policy == PickPolicy::kScripted) {
    const ScriptedPick& s = sc.script[segment];
    const VertexIndex v = nearest_vertex(state, s.pick_point);
    if (std::sqrt(squared_distance(state.positions[v], s.pick_point)) > 2.0 * sc.spacing)
      throw Error(ErrorKind::kInvalidArgument, "scripted pick point is not on the cloth");
    choice.vertex = v;
    choice.action.pick_point = state.positions[v];
    choice.action.place_point = s.place_point;
    return choice;
  }

  if (sc.policy == PickPolicy::kFoldInHalf) {
    const std::size_t nx = mesh.num_x();
    const std::size_t ny = mesh.num_y();
    const VertexIndex corners[4] = {0, nx - 1, nx * ny - 1, nx * (ny - 1)};
    const VertexIndex pick = corners[segment % 4];
    const VertexIndex opposite = corners[(segment + 2) % 4];
    choice.vertex = pick;
    choice.action.pick_point = state.positions[pick];
    choice.action.place_point = state.positions[opposite];
    choice.action.place_point.z() = 0.0;
    return choice;
  }

  const auto visible = visible_vertices(mesh, state, sc.camera);
  std::vector<VertexIndex> candidates;
  for (VertexIndex v : visible)
    if (mesh.on_boundary(v)) candidates.push_back(v);
  if (candidates.empty()) candidates = visible;
  require(!candidates.empty(), ErrorKind::kInvalidArgument, "no visible vertex to pick");

  Vec3 centroid = Vec3::Zero();
  for (const Vec3& p : state.positions) centroid += p;
  centroid /= static_cast<double>(state.positions.size());

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int attempt = 0; attempt < sc.max_pick_retries; ++attempt) {
    const VertexIndex v =
        candidates[std::min(candidates.size() - 1,
                            static_cast<std::size_t>(unit(rng) * candidates.size()))];
    const Vec3 start = state.positions[v];
    double angle = 2.0 * std::numbers::pi * unit(rng);
    if (sc.policy == PickPolicy::kDrag) {
      const Vec3 out = start - centroid;
      angle = std::atan2(out.y(), out.x()) + (unit(rng) - 0.5) * std::numbers::pi / 3.0;
      choice.action.lift_height = sc.drag_lift_height;
    }
    const double dist =
        sc.min_place_distance + unit(rng) * (sc.max_place_distance - sc.min_place_distance);
    const Vec3 place(start.x() + dist * std::cos(angle), start.y() + dist * std::sin(angle), 0.0);
    if (!inside_workspace(place, sc.camera, margin)) continue;
    choice.vertex = v;
    choice.action.pick_point = start;
    choice.action.place_point = place;
    return choice;
  }
  throw Error(ErrorKind::kInvalidArgument, "could not sample a place target inside the workspace");
}

bool explodes(const ScenarioConfig& sc, const ClothState& start, const Segment& seg) {
  const ClothState* prev = &start;
  for (const ClothState& next : seg.ground_truth) {
    if (explosion_check(*prev, next, sc.hidden_params.step_duration(), sc.explosion_threshold))
      return true;
    prev = &next;
  }
  return false;
}

Trajectory generate_one(const ScenarioConfig& sc, int id) {
  const ClothMesh mesh = build_grid_cloth(sc.num_x, sc.num_y, sc.spacing);
  Trajectory traj;
  traj.id = id;
  traj.num_x = sc.num_x;
  traj.num_y = sc.num_y;
  traj.spacing = sc.spacing;

  ClothState state = rest_state(mesh);
  for (int i = 0; i < sc.settle_steps; ++i)
    state = dyn_step(mesh, state, sc.hidden_params, LowLevelAction::none());
  state.time_index = 0;
  traj.initial_state = state;
  traj.initial_observation =
      render_point_cloud(mesh, state, sc.camera, {}, stream_seed(sc.rng_seed, id, 0, 0)).cloud;

  std::mt19937_64 rng(stream_seed(sc.rng_seed, id, 0xabcdefull));
  for (int s = 0; s < sc.segments_per_trajectory; ++s) {
    const bool resample =
        sc.policy == PickPolicy::kRandomEdgePick || sc.policy == PickPolicy::kDrag;
    Segment seg;
    for (int attempt = 0;; ++attempt) {
      const PickChoice pick = choose_pick(sc, mesh, state, s, rng);
      seg.pick_place = pick.action;
      seg.actions = decompose_pick_place(pick.action, pick.vertex, state.positions[pick.vertex]);
      seg.ground_truth = simulate_segment(mesh, state, sc.hidden_params, seg.actions);
      if (!resample || attempt + 1 >= sc.max_pick_retries || !explodes(sc, state, seg)) break;
    }
    for (std::size_t t = 0; t < seg.actions.size(); ++t) {
      const auto occluders =
          tweezer_occluders(seg.ground_truth[t], seg.actions[t], sc.occluder_radius);
      seg.observations.push_back(
          render_point_cloud(mesh, seg.ground_truth[t], sc.camera, occluders,
                             stream_seed(sc.rng_seed, id, s + 1, t + 1))
              .cloud);
    }
    state = seg.ground_truth.back();
    traj.segments.push_back(std::move(seg));
  }
  return traj;
}

}  // namespace

std::vector<Trajectory> generate_synthetic_trajectories(const ScenarioConfig& scenario) {
  scenario.validate();
  std::vector<Trajectory> out(scenario.num_trajectories);
  parallel_for(out.size(), [&](std::size_t i) {
    out[i] = generate_one(scenario, static_cast<int>(i));
  });
  return out;
}

}  // namespace clothtrack
