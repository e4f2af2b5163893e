#pragma once

// Top-down orthographic camera: vertex z-buffer visibility, synthetic point
// clouds and Chamfer distances.

#include <cstdint>
#include <span>
#include <vector>

#include "clothtrack/mesh.hpp"

namespace clothtrack {

struct CameraModel {
  double x_min = -0.3;
  double x_max = 0.3;
  double y_min = -0.3;
  double y_max = 0.3;
  int width = 200;
  int height = 200;
  double camera_height = 1.0;
  double depth_noise_sigma = 0.001;
  double dropout_rate = 0.05;
  // A vertex is visible if it lies within z_epsilon of the highest surface
  // over its pixel. Each vertex covers the pixels whose centres lie within
  // splat_radius of it in the image plane, plus its own pixel.
  double z_epsilon = 0.004;
  double splat_radius = 0.007;

  void validate() const;
  double pixel_width() const { return (x_max - x_min) / width; }
  double pixel_height() const { return (y_max - y_min) / height; }
  // False if the point projects outside the image.
  bool pixel_of(const Vec3& p, int& px, int& py) const;
  double pixel_center_x(int px) const { return x_min + (px + 0.5) * pixel_width(); }
  double pixel_center_y(int py) const { return y_min + (py + 0.5) * pixel_height(); }
};

struct Sphere {
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
};

// Ascending vertex indices.
std::vector<VertexIndex> visible_vertices(std::span<const Vec3> positions,
                                          const CameraModel& camera);
std::vector<VertexIndex> visible_vertices(const ClothMesh& mesh, const ClothState& state,
                                          const CameraModel& camera);

struct RenderedCloud {
  PointCloud cloud;
  bool fully_occluded = false;
};

RenderedCloud render_point_cloud(const ClothMesh& mesh, const ClothState& state,
                                 const CameraModel& camera, std::span<const Sphere> occluders,
                                 std::uint64_t rng_seed);

enum class ChamferMetric { kSquared, kUnsquared };

// Mean over source points of the (squared) distance to the nearest target point.
double chamfer_one_way(std::span<const Vec3> source, std::span<const Vec3> target,
                       ChamferMetric metric = ChamferMetric::kSquared);
// Mean of the two one-way distances.
double chamfer_bidirectional(std::span<const Vec3> a, std::span<const Vec3> b,
                             ChamferMetric metric = ChamferMetric::kSquared);

inline double chamfer_one_way(const PointCloud& source, std::span<const Vec3> target,
                              ChamferMetric metric = ChamferMetric::kSquared) {
  return chamfer_one_way(std::span<const Vec3>(source.points), target, metric);
}
inline double chamfer_bidirectional(const PointCloud& a, const PointCloud& b,
                                    ChamferMetric metric = ChamferMetric::kSquared) {
  return chamfer_bidirectional(std::span<const Vec3>(a.points), std::span<const Vec3>(b.points),
                               metric);
}

std::vector<Vec3> gather(std::span<const Vec3> positions, std::span<const VertexIndex> indices);

// Orthographic depth image (distance below the camera plane, row-major,
// 0 where nothing was seen) splatted from a point cloud.
struct DepthImage {
  int width = 0;
  int height = 0;
  double x_min = 0.0, x_max = 0.0, y_min = 0.0, y_max = 0.0;
  double camera_height = 0.0;
  std::vector<float> depth;
};

DepthImage depth_from_point_cloud(const PointCloud& cloud, const CameraModel& camera);

}  // namespace clothtrack
