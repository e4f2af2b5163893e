#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "clothtrack/mesh.hpp"

namespace clothtrack {

// Static 3-D kd-tree with exact nearest-neighbour queries. Among points at the
// same squared distance the lowest input index is returned.
class KdTree {
 public:
  struct Hit {
    std::size_t index = 0;
    double squared_distance = 0.0;
  };

  KdTree() = default;
  explicit KdTree(std::span<const Vec3> points);

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  Hit nearest(const Vec3& query) const;

 private:
  struct Node {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    int axis = 0;
    double split = 0.0;
  };

  int build(std::uint32_t begin, std::uint32_t end);
  void search(int node, const Vec3& q, Hit& best) const;

  std::vector<Vec3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

// All unordered pairs (i < j) with |p_i - p_j| < radius, found through a
// uniform hash grid of cell size `radius`. Output sorted lexicographically.
std::vector<std::pair<std::size_t, std::size_t>> pairs_within(std::span<const Vec3> points,
                                                              double radius);

}  // namespace clothtrack
