#include "clothtrack/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "clothtrack/spatial.hpp"

namespace clothtrack {

void CameraModel::validate() const {
  require(x_max > x_min && y_max > y_min, ErrorKind::kConfig, "camera bounds are degenerate");
  require(width >= 16 && height >= 16, ErrorKind::kConfig, "camera resolution below 16x16");
  require(depth_noise_sigma >= 0.0, ErrorKind::kConfig, "depth noise sigma must be >= 0");
  require(dropout_rate >= 0.0 && dropout_rate < 1.0, ErrorKind::kConfig,
          "dropout rate must be in [0, 1)");
  require(z_epsilon >= 0.0 && splat_radius >= 0.0, ErrorKind::kConfig,
          "z_epsilon and splat_radius must be >= 0");
}

bool CameraModel::pixel_of(const Vec3& p, int& px, int& py) const {
  if (!(p.x() >= x_min && p.x() < x_max && p.y() >= y_min && p.y() < y_max)) return false;
  px = std::min(width - 1, static_cast<int>((p.x() - x_min) / pixel_width()));
  py = std::min(height - 1, static_cast<int>((p.y() - y_min) / pixel_height()));
  return true;
}

std::vector<VertexIndex> visible_vertices(std::span<const Vec3> positions,
                                          const CameraModel& camera) {
  camera.validate();
  const double lowest = -std::numeric_limits<double>::infinity();
  std::vector<double> top(static_cast<std::size_t>(camera.width) * camera.height, lowest);
  std::vector<int> own_pixel(positions.size(), -1);
  const double pw = camera.pixel_width();
  const double ph = camera.pixel_height();
  const double r = camera.splat_radius;
  const double r2 = r * r;

  for (std::size_t v = 0; v < positions.size(); ++v) {
    const Vec3& p = positions[v];
    int px = 0, py = 0;
    if (!p.allFinite() || !camera.pixel_of(p, px, py)) continue;
    const int own = py * camera.width + px;
    own_pixel[v] = own;
    top[own] = std::max(top[own], p.z());
    const int x0 = std::max(0, static_cast<int>(std::floor((p.x() - r - camera.x_min) / pw)));
    const int x1 = std::min(camera.width - 1, static_cast<int>((p.x() + r - camera.x_min) / pw));
    const int y0 = std::max(0, static_cast<int>(std::floor((p.y() - r - camera.y_min) / ph)));
    const int y1 = std::min(camera.height - 1, static_cast<int>((p.y() + r - camera.y_min) / ph));
    for (int qy = y0; qy <= y1; ++qy) {
      const double dy = camera.pixel_center_y(qy) - p.y();
      for (int qx = x0; qx <= x1; ++qx) {
        const double dx = camera.pixel_center_x(qx) - p.x();
        if (dx * dx + dy * dy <= r2) {
          double& t = top[qy * camera.width + qx];
          t = std::max(t, p.z());
        }
      }
    }
  }

  std::vector<VertexIndex> visible;
  for (std::size_t v = 0; v < positions.size(); ++v) {
    if (own_pixel[v] < 0) continue;
    if (positions[v].z() >= top[own_pixel[v]] - camera.z_epsilon) visible.push_back(v);
  }
  return visible;
}

std::vector<VertexIndex> visible_vertices(const ClothMesh& mesh, const ClothState& state,
                                          const CameraModel& camera) {
  require(state.positions.size() == mesh.num_vertices(), ErrorKind::kDimensionMismatch,
          "state does not match mesh");
  return visible_vertices(std::span<const Vec3>(state.positions), camera);
}

std::vector<Vec3> gather(std::span<const Vec3> positions, std::span<const VertexIndex> indices) {
  std::vector<Vec3> out;
  out.reserve(indices.size());
  for (VertexIndex i : indices) out.push_back(positions[i]);
  return out;
}

RenderedCloud render_point_cloud(const ClothMesh& mesh, const ClothState& state,
                                 const CameraModel& camera, std::span<const Sphere> occluders,
                                 std::uint64_t rng_seed) {
  const auto visible = visible_vertices(mesh, state, camera);
  auto occluded = [&occluders](const Vec3& p) {
    return std::any_of(occluders.begin(), occluders.end(), [&p](const Sphere& s) {
      return squared_distance(p, s.center) <= s.radius * s.radius;
    });
  };

  std::mt19937_64 rng(rng_seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  RenderedCloud out;
  for (VertexIndex v : visible) {
    const Vec3& p = state.positions[v];
    if (occluded(p)) continue;
    const Vec3 offset(noise(rng), noise(rng), noise(rng));
    const double keep = unit(rng);
    if (keep < camera.dropout_rate) continue;
    const Vec3 q = p + camera.depth_noise_sigma * offset;
    if (occluded(q)) continue;
    out.cloud.points.push_back(q);
  }
  out.fully_occluded = out.cloud.empty();
  return out;
}

double chamfer_one_way(std::span<const Vec3> source, std::span<const Vec3> target,
                       ChamferMetric metric) {
  require(!source.empty() && !target.empty(), ErrorKind::kInvalidArgument,
          "Chamfer distance of an empty point set");
  const KdTree tree(target);
  double sum = 0.0;
  for (const Vec3& p : source) {
    const double d2 = tree.nearest(p).squared_distance;
    sum += metric == ChamferMetric::kSquared ? d2 : std::sqrt(d2);
  }
  return sum / static_cast<double>(source.size());
}

double chamfer_bidirectional(std::span<const Vec3> a, std::span<const Vec3> b,
                             ChamferMetric metric) {
  return 0.5 * (chamfer_one_way(a, b, metric) + chamfer_one_way(b, a, metric));
}

DepthImage depth_from_point_cloud(const PointCloud& cloud, const CameraModel& camera) {
  camera.validate();
  DepthImage img;
  img.width = camera.width;
  img.height = camera.height;
  img.x_min = camera.x_min;
  img.x_max = camera.x_max;
  img.y_min = camera.y_min;
  img.y_max = camera.y_max;
  img.camera_height = camera.camera_height;
  img.depth.assign(static_cast<std::size_t>(img.width) * img.height, 0.0f);

  const double r = camera.splat_radius;
  const double pw = camera.pixel_width();
  const double ph = camera.pixel_height();
  for (const Vec3& p : cloud.points) {
    int px = 0, py = 0;
    if (!camera.pixel_of(p, px, py)) continue;
    const float d = static_cast<float>(camera.camera_height - p.z());
    const int x0 = std::max(0, static_cast<int>(std::floor((p.x() - r - camera.x_min) / pw)));
    const int x1 = std::min(camera.width - 1, static_cast<int>((p.x() + r - camera.x_min) / pw));
    const int y0 = std::max(0, static_cast<int>(std::floor((p.y() - r - camera.y_min) / ph)));
    const int y1 = std::min(camera.height - 1, static_cast<int>((p.y() + r - camera.y_min) / ph));
    for (int qy = std::min(y0, py); qy <= std::max(y1, py); ++qy)
      for (int qx = std::min(x0, px); qx <= std::max(x1, px); ++qx) {
        const double dx = camera.pixel_center_x(qx) - p.x();
        const double dy = camera.pixel_center_y(qy) - p.y();
        if ((qx != px || qy != py) && dx * dx + dy * dy > r * r) continue;
        float& cell = img.depth[static_cast<std::size_t>(qy) * img.width + qx];
        if (cell == 0.0f || d < cell) cell = d;
      }
  }
  return img;
}

}  // namespace clothtrack
