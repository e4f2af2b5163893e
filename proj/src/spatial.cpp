#include "clothtrack/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace clothtrack {

namespace {
constexpr std::uint32_t kLeafSize = 8;
}

KdTree::KdTree(std::span<const Vec3> points) : points_(points.begin(), points.end()) {
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    build(0, static_cast<std::uint32_t>(points_.size()));
  }
}

int KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({begin, end, -1, -1, 0, 0.0});
  if (end - begin <= kLeafSize) return id;

  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     return points_[a][axis] < points_[b][axis];
                   });
  const double split = points_[order_[mid]][axis];
  const int left = build(begin, mid);
  const int right = build(mid, end);
  Node& n = nodes_[id];
  n.axis = axis;
  n.split = split;
  n.left = left;
  n.right = right;
  return id;
}

void KdTree::search(int node_id, const Vec3& q, Hit& best) const {
  const Node& node = nodes_[node_id];
  if (node.left < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const std::uint32_t idx = order_[i];
      const double d2 = squared_distance(points_[idx], q);
      if (d2 < best.squared_distance || (d2 == best.squared_distance && idx < best.index)) {
        best = {idx, d2};
      }
    }
    return;
  }
  // Left subtree holds coordinates <= split, right subtree >= split.
  const double diff = q[node.axis] - node.split;
  const int near = diff <= 0.0 ? node.left : node.right;
  const int far = diff <= 0.0 ? node.right : node.left;
  search(near, q, best);
  if (diff * diff <= best.squared_distance) search(far, q, best);
}

KdTree::Hit KdTree::nearest(const Vec3& query) const {
  require(!points_.empty(), ErrorKind::kInvalidArgument, "nearest-neighbour query on empty tree");
  Hit best{std::numeric_limits<std::size_t>::max(), std::numeric_limits<double>::infinity()};
  search(0, query, best);
  return best;
}

std::vector<std::pair<std::size_t, std::size_t>> pairs_within(std::span<const Vec3> points,
                                                              double radius) {
  require(radius > 0.0, ErrorKind::kInvalidArgument, "pair search radius must be positive");
  std::vector<std::pair<std::size_t, std::size_t>> out;
  const std::size_t n = points.size();
  if (n < 2) return out;

  // Cells are packed into 21 bits per axis; the bias keeps coordinates positive.
  constexpr std::int64_t kBias = std::int64_t{1} << 20;
  auto pack = [](std::int64_t x, std::int64_t y, std::int64_t z) {
    return (static_cast<std::uint64_t>(x + kBias) << 42) |
           (static_cast<std::uint64_t>(y + kBias) << 21) | static_cast<std::uint64_t>(z + kBias);
  };
  auto cell = [radius](double v) { return static_cast<std::int64_t>(std::floor(v / radius)); };

  std::vector<std::pair<std::uint64_t, std::uint32_t>> keyed(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& p = points[i];
    keyed[i] = {pack(cell(p.x()), cell(p.y()), cell(p.z())), static_cast<std::uint32_t>(i)};
  }
  std::sort(keyed.begin(), keyed.end());

  std::vector<std::uint64_t> cell_keys;
  std::vector<std::uint32_t> cell_begin;
  for (std::uint32_t k = 0; k < n; ++k)
    if (k == 0 || keyed[k].first != keyed[k - 1].first) {
      cell_keys.push_back(keyed[k].first);
      cell_begin.push_back(k);
    }
  cell_begin.push_back(static_cast<std::uint32_t>(n));

  // Besides the cell itself, the 13 neighbours that follow it
  // lexicographically, so every pair of adjacent cells is visited once. They
  // form five runs that are contiguous in key order: (0, 0, +1) and
  // (dx, dy, -1..+1) for the four forward (dx, dy) columns. Target keys grow
  // with the cell key, so each run keeps a cursor that only moves forward.
  static constexpr int kRuns[5][3] = {{0, 0, 1}, {0, 1, -1}, {1, -1, -1}, {1, 0, -1}, {1, 1, -1}};
  std::size_t cursor[5] = {0, 0, 0, 0, 0};
  const double r2 = radius * radius;
  auto emit = [&](std::uint32_t a, std::uint32_t b) {
    if (squared_distance(points[a], points[b]) < r2)
      out.emplace_back(std::min(a, b), std::max(a, b));
  };

  for (std::size_t c = 0; c < cell_keys.size(); ++c) {
    const std::uint32_t b0 = cell_begin[c], e0 = cell_begin[c + 1];
    for (std::uint32_t i = b0; i < e0; ++i)
      for (std::uint32_t j = i + 1; j < e0; ++j) emit(keyed[i].second, keyed[j].second);

    const std::uint64_t key = cell_keys[c];
    const std::int64_t cx = static_cast<std::int64_t>(key >> 42) - kBias;
    const std::int64_t cy = static_cast<std::int64_t>((key >> 21) & 0x1fffff) - kBias;
    const std::int64_t cz = static_cast<std::int64_t>(key & 0x1fffff) - kBias;
    for (int r = 0; r < 5; ++r) {
      const std::uint64_t lo = pack(cx + kRuns[r][0], cy + kRuns[r][1], cz + kRuns[r][2]);
      const std::uint64_t hi = pack(cx + kRuns[r][0], cy + kRuns[r][1], cz + 1);
      std::size_t& d = cursor[r];
      while (d < cell_keys.size() && cell_keys[d] < lo) ++d;
      for (std::size_t k = d; k < cell_keys.size() && cell_keys[k] <= hi; ++k)
        for (std::uint32_t i = b0; i < e0; ++i)
          for (std::uint32_t j = cell_begin[k]; j < cell_begin[k + 1]; ++j)
            emit(keyed[i].second, keyed[j].second);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace clothtrack
