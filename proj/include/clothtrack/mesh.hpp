#pragma once

// Cloth topology, per-timestep state, picker actions and trajectories.
//
// Vertices of a grid cloth are stored row-major: index = iy * num_x + ix.
// Rest positions lie in the z = 0 plane, centered on the origin.

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "clothtrack/error.hpp"

namespace clothtrack {

using Vec3 = Eigen::Vector3d;
using VertexIndex = std::size_t;
inline constexpr VertexIndex kNoVertex = std::numeric_limits<VertexIndex>::max();

inline double squared_distance(const Vec3& a, const Vec3& b) {
  const double dx = a.x() - b.x();
  const double dy = a.y() - b.y();
  const double dz = a.z() - b.z();
  return dx * dx + dy * dy + dz * dz;
}

bool all_finite(std::span<const Vec3> points);

struct PointCloud {
  std::vector<Vec3> points;

  bool empty() const { return points.empty(); }
  std::size_t size() const { return points.size(); }
};

struct Edge {
  VertexIndex a = 0;
  VertexIndex b = 0;
};

enum class EdgeKind : std::uint8_t { kStructural, kShear, kBending };

class ClothMesh {
 public:
  ClothMesh() = default;

  int num_x() const { return num_x_; }
  int num_y() const { return num_y_; }
  double spacing() const { return spacing_; }
  std::size_t num_vertices() const { return rest_positions_.size(); }
  VertexIndex index(int ix, int iy) const { return static_cast<VertexIndex>(iy) * num_x_ + ix; }

  const std::vector<Vec3>& rest_positions() const { return rest_positions_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<double>& rest_lengths() const { return rest_lengths_; }
  const std::vector<EdgeKind>& edge_kinds() const { return edge_kinds_; }
  // Edge indices grouped so that consecutive edges rarely share a vertex;
  // the order in which the solver projects distance constraints.
  const std::vector<std::uint32_t>& solve_order() const { return solve_order_; }

  // Neighbours of v over all edge kinds, sorted ascending.
  std::span<const VertexIndex> neighbors(VertexIndex v) const;
  bool adjacent(VertexIndex a, VertexIndex b) const;
  bool on_boundary(VertexIndex v) const;

  // Throws Error(kInvalidArgument) if an invariant is broken.
  void validate() const;

  friend ClothMesh build_grid_cloth(int num_x, int num_y, double spacing);

 private:
  int num_x_ = 0;
  int num_y_ = 0;
  double spacing_ = 0.0;
  std::vector<Vec3> rest_positions_;
  std::vector<Edge> edges_;
  std::vector<double> rest_lengths_;
  std::vector<EdgeKind> edge_kinds_;
  std::vector<std::uint32_t> solve_order_;
  std::vector<std::size_t> adjacency_offsets_;
  std::vector<VertexIndex> adjacency_;
};

// Flat grid with structural (4-neighbour), shear (both diagonals of every cell)
// and bending (two apart along rows and columns) distance edges.
ClothMesh build_grid_cloth(int num_x, int num_y, double spacing);

struct ClothState {
  std::vector<Vec3> positions;
  std::vector<Vec3> velocities;
  int time_index = 0;

  std::size_t size() const { return positions.size(); }
  bool finite() const;
  // Throws kDimensionMismatch / kNonFinite.
  void validate(const ClothMesh& mesh) const;
};

ClothState rest_state(const ClothMesh& mesh);

// Lowest index wins ties.
VertexIndex nearest_vertex(const ClothState& state, const Vec3& point);

struct PickPlaceAction {
  Vec3 pick_point = Vec3::Zero();
  Vec3 place_point = Vec3::Zero();
  double lift_height = 0.08;
  int num_substeps = 40;

  void validate() const;
};

struct LowLevelAction {
  VertexIndex picked_vertex = kNoVertex;
  Vec3 picker_delta = Vec3::Zero();
  bool grasp_active = false;

  static LowLevelAction none() { return {}; }
  void validate(std::size_t num_vertices) const;
};

// One pick-and-place action: T low-level actions and the point cloud observed
// after each of them.
struct Segment {
  PickPlaceAction pick_place;
  std::vector<LowLevelAction> actions;
  std::vector<PointCloud> observations;
  std::vector<ClothState> ground_truth;  // empty for real data
};

struct Trajectory {
  int id = 0;
  int num_x = 0;
  int num_y = 0;
  double spacing = 0.0;
  ClothState initial_state;
  PointCloud initial_observation;
  std::vector<Segment> segments;

  bool has_ground_truth() const;
  ClothMesh mesh() const { return build_grid_cloth(num_x, num_y, spacing); }
  void validate() const;
};

}  // namespace clothtrack
