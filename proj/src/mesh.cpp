#include "clothtrack/mesh.hpp"

#include <algorithm>
#include <numeric>
#include <cmath>
#include <set>
#include <string>
#include <utility>

namespace clothtrack {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid_argument";
    case ErrorKind::kDimensionMismatch: return "dimension_mismatch";
    case ErrorKind::kNonFinite: return "non_finite";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kLostTracking: return "lost_tracking";
    case ErrorKind::kUnstable: return "unstable";
  }
  return "unknown";
}

bool all_finite(std::span<const Vec3> points) {
  return std::all_of(points.begin(), points.end(), [](const Vec3& p) { return p.allFinite(); });
}

ClothMesh build_grid_cloth(int num_x, int num_y, double spacing) {
  require(num_x >= 2 && num_y >= 2, ErrorKind::kInvalidArgument,
          "grid cloth needs at least 2x2 vertices");
  require(spacing > 0.0 && std::isfinite(spacing), ErrorKind::kInvalidArgument,
          "grid spacing must be positive");

  ClothMesh mesh;
  mesh.num_x_ = num_x;
  mesh.num_y_ = num_y;
  mesh.spacing_ = spacing;

  const double x0 = -0.5 * spacing * (num_x - 1);
  const double y0 = -0.5 * spacing * (num_y - 1);
  mesh.rest_positions_.reserve(static_cast<std::size_t>(num_x) * num_y);
  for (int iy = 0; iy < num_y; ++iy)
    for (int ix = 0; ix < num_x; ++ix)
      mesh.rest_positions_.emplace_back(x0 + ix * spacing, y0 + iy * spacing, 0.0);

  auto add = [&mesh](VertexIndex a, VertexIndex b, EdgeKind kind) {
    if (a > b) std::swap(a, b);
    mesh.edges_.push_back({a, b});
    mesh.edge_kinds_.push_back(kind);
    mesh.rest_lengths_.push_back(
        std::sqrt(squared_distance(mesh.rest_positions_[a], mesh.rest_positions_[b])));
  };

  for (int iy = 0; iy < num_y; ++iy)
    for (int ix = 0; ix < num_x; ++ix) {
      if (ix + 1 < num_x) add(mesh.index(ix, iy), mesh.index(ix + 1, iy), EdgeKind::kStructural);
      if (iy + 1 < num_y) add(mesh.index(ix, iy), mesh.index(ix, iy + 1), EdgeKind::kStructural);
    }
  for (int iy = 0; iy + 1 < num_y; ++iy)
    for (int ix = 0; ix + 1 < num_x; ++ix) {
      add(mesh.index(ix, iy), mesh.index(ix + 1, iy + 1), EdgeKind::kShear);
      add(mesh.index(ix + 1, iy), mesh.index(ix, iy + 1), EdgeKind::kShear);
    }
  for (int iy = 0; iy < num_y; ++iy)
    for (int ix = 0; ix < num_x; ++ix) {
      if (ix + 2 < num_x) add(mesh.index(ix, iy), mesh.index(ix + 2, iy), EdgeKind::kBending);
      if (iy + 2 < num_y) add(mesh.index(ix, iy), mesh.index(ix, iy + 2), EdgeKind::kBending);
    }

  // CSR adjacency.
  const std::size_t n = mesh.rest_positions_.size();
  std::vector<std::vector<VertexIndex>> lists(n);
  for (const Edge& e : mesh.edges_) {
    lists[e.a].push_back(e.b);
    lists[e.b].push_back(e.a);
  }
  mesh.adjacency_offsets_.assign(n + 1, 0);
  for (std::size_t v = 0; v < n; ++v) {
    std::sort(lists[v].begin(), lists[v].end());
    mesh.adjacency_offsets_[v + 1] = mesh.adjacency_offsets_[v] + lists[v].size();
    mesh.adjacency_.insert(mesh.adjacency_.end(), lists[v].begin(), lists[v].end());
  }

  // Greedy edge colouring; edges of one colour share no vertex.
  std::vector<std::uint32_t> color(mesh.edges_.size());
  std::vector<std::uint64_t> used(n, 0);
  for (std::size_t e = 0; e < mesh.edges_.size(); ++e) {
    const std::uint64_t taken = used[mesh.edges_[e].a] | used[mesh.edges_[e].b];
    std::uint32_t c = 0;
    while (c < 63 && (taken >> c & 1u)) ++c;
    color[e] = c;
    used[mesh.edges_[e].a] |= std::uint64_t{1} << c;
    used[mesh.edges_[e].b] |= std::uint64_t{1} << c;
  }
  mesh.solve_order_.resize(mesh.edges_.size());
  std::iota(mesh.solve_order_.begin(), mesh.solve_order_.end(), 0u);
  std::stable_sort(mesh.solve_order_.begin(), mesh.solve_order_.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return color[a] < color[b]; });
  return mesh;
}

std::span<const VertexIndex> ClothMesh::neighbors(VertexIndex v) const {
  return {adjacency_.data() + adjacency_offsets_[v],
          adjacency_offsets_[v + 1] - adjacency_offsets_[v]};
}

bool ClothMesh::adjacent(VertexIndex a, VertexIndex b) const {
  const auto n = neighbors(a);
  return std::binary_search(n.begin(), n.end(), b);
}

bool ClothMesh::on_boundary(VertexIndex v) const {
  const int ix = static_cast<int>(v % num_x_);
  const int iy = static_cast<int>(v / num_x_);
  return ix == 0 || iy == 0 || ix == num_x_ - 1 || iy == num_y_ - 1;
}

void ClothMesh::validate() const {
  const std::size_t n = rest_positions_.size();
  require(n == static_cast<std::size_t>(num_x_) * num_y_, ErrorKind::kInvalidArgument,
          "vertex count does not match grid dimensions");
  require(edges_.size() == rest_lengths_.size() && edges_.size() == edge_kinds_.size(),
          ErrorKind::kInvalidArgument, "edge arrays have inconsistent lengths");
  std::set<std::pair<VertexIndex, VertexIndex>> seen;
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const Edge& edge = edges_[e];
    require(edge.a < n && edge.b < n, ErrorKind::kInvalidArgument, "edge index out of range");
    require(edge.a != edge.b, ErrorKind::kInvalidArgument, "self edge");
    const auto key = std::minmax(edge.a, edge.b);
    require(seen.insert(key).second, ErrorKind::kInvalidArgument, "duplicate edge");
    const double d = std::sqrt(squared_distance(rest_positions_[edge.a], rest_positions_[edge.b]));
    require(std::abs(d - rest_lengths_[e]) <= 1e-9, ErrorKind::kInvalidArgument,
            "rest length inconsistent with rest positions");
  }
}

bool ClothState::finite() const { return all_finite(positions) && all_finite(velocities); }

void ClothState::validate(const ClothMesh& mesh) const {
  require(positions.size() == mesh.num_vertices() && velocities.size() == mesh.num_vertices(),
          ErrorKind::kDimensionMismatch,
          "state has " + std::to_string(positions.size()) + " positions / " +
              std::to_string(velocities.size()) + " velocities, mesh has " +
              std::to_string(mesh.num_vertices()) + " vertices");
  require(finite(), ErrorKind::kNonFinite, "state contains non-finite values");
}

ClothState rest_state(const ClothMesh& mesh) {
  ClothState s;
  s.positions = mesh.rest_positions();
  s.velocities.assign(mesh.num_vertices(), Vec3::Zero());
  return s;
}

VertexIndex nearest_vertex(const ClothState& state, const Vec3& point) {
  require(!state.positions.empty(), ErrorKind::kInvalidArgument, "nearest_vertex on empty state");
  VertexIndex best = 0;
  double best_d2 = squared_distance(state.positions[0], point);
  for (VertexIndex i = 1; i < state.positions.size(); ++i) {
    const double d2 = squared_distance(state.positions[i], point);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  return best;
}

void PickPlaceAction::validate() const {
  require(num_substeps >= 1, ErrorKind::kInvalidArgument, "pick-and-place needs >= 1 substep");
  require(lift_height > 0.0, ErrorKind::kInvalidArgument, "lift height must be positive");
  require(pick_point.allFinite() && place_point.allFinite(), ErrorKind::kNonFinite,
          "pick/place point is not finite");
}

void LowLevelAction::validate(std::size_t num_vertices) const {
  require(picker_delta.allFinite(), ErrorKind::kNonFinite, "picker delta is not finite");
  if (grasp_active) {
    require(picked_vertex < num_vertices, ErrorKind::kInvalidArgument,
            "grasp active without a valid picked vertex");
  } else {
    require(picker_delta.isZero(0.0), ErrorKind::kInvalidArgument,
            "picker delta must be zero when no grasp is active");
  }
}

bool Trajectory::has_ground_truth() const {
  return !segments.empty() && std::all_of(segments.begin(), segments.end(), [](const Segment& s) {
    return s.ground_truth.size() == s.actions.size();
  });
}

void Trajectory::validate() const {
  const ClothMesh m = mesh();
  initial_state.validate(m);
  for (const Segment& s : segments) {
    s.pick_place.validate();
    require(s.actions.size() == s.observations.size(), ErrorKind::kDimensionMismatch,
            "segment action and observation sequences differ in length");
    require(!s.actions.empty(), ErrorKind::kInvalidArgument, "segment without actions");
    for (const LowLevelAction& a : s.actions) a.validate(m.num_vertices());
    require(s.ground_truth.empty() || s.ground_truth.size() == s.actions.size(),
            ErrorKind::kDimensionMismatch, "ground truth length differs from action count");
    for (const ClothState& g : s.ground_truth) g.validate(m);
  }
}

}  // namespace clothtrack
