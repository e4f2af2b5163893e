#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "clothtrack/sensing.hpp"

using namespace clothtrack;

namespace {

// Per-vertex brute force: the highest vertex whose own pixel or splat disc
// covers this vertex's pixel.
std::vector<VertexIndex> visibility_oracle(const std::vector<Vec3>& pos, const CameraModel& cam) {
  auto pixel = [&](const Vec3& p, int& px, int& py) {
    if (p.x() < cam.x_min || p.x() >= cam.x_max || p.y() < cam.y_min || p.y() >= cam.y_max)
      return false;
    px = std::min(cam.width - 1, int(std::floor((p.x() - cam.x_min) / cam.pixel_width())));
    py = std::min(cam.height - 1, int(std::floor((p.y() - cam.y_min) / cam.pixel_height())));
    return true;
  };
  std::vector<VertexIndex> out;
  for (std::size_t v = 0; v < pos.size(); ++v) {
    int px, py;
    if (!pixel(pos[v], px, py)) continue;
    const double cx = cam.pixel_center_x(px), cy = cam.pixel_center_y(py);
    double top = -INFINITY;
    for (const Vec3& u : pos) {
      int ux, uy;
      if (!pixel(u, ux, uy)) continue;
      const double dx = cx - u.x(), dy = cy - u.y();
      if ((ux == px && uy == py) || dx * dx + dy * dy <= cam.splat_radius * cam.splat_radius)
        top = std::max(top, u.z());
    }
    if (pos[v].z() >= top - cam.z_epsilon) out.push_back(v);
  }
  return out;
}

// Right half of the grid reflected over the centre column onto a second layer.
ClothState folded(const ClothMesh& mesh, double gap) {
  ClothState s = rest_state(mesh);
  const int nx = mesh.num_x();
  for (int iy = 0; iy < mesh.num_y(); ++iy)
    for (int ix = nx / 2; ix < nx; ++ix) {
      const VertexIndex v = mesh.index(ix, iy);
      const Vec3 mirror = mesh.rest_positions()[mesh.index(nx - 1 - ix, iy)];
      s.positions[v] = Vec3(mirror.x() + 1e-4, mirror.y() + 1e-4, gap);
    }
  return s;
}

}  // namespace

TEST(Visibility, FlatClothAllVisible) {
  const ClothMesh mesh = build_grid_cloth(20, 20, 0.01);
  const auto vis = visible_vertices(mesh, rest_state(mesh), CameraModel{});
  EXPECT_EQ(vis.size(), mesh.num_vertices());
}

TEST(Visibility, OutOfBoundsNeverVisible) {
  const ClothMesh mesh = build_grid_cloth(4, 4, 0.01);
  ClothState s = rest_state(mesh);
  s.positions[5].x() = 10.0;
  const auto vis = visible_vertices(mesh, s, CameraModel{});
  EXPECT_EQ(vis.size(), 15u);
  EXPECT_EQ(std::count(vis.begin(), vis.end(), VertexIndex(5)), 0);
}

TEST(Visibility, StackedPair) {
  CameraModel cam;
  cam.z_epsilon = 0.005;
  const std::vector<Vec3> pts{Vec3(0.05, 0.05, 0.0), Vec3(0.05, 0.05, 0.1)};
  EXPECT_EQ(visible_vertices(pts, cam), std::vector<VertexIndex>{1});
}

TEST(Visibility, FoldMatchesOracle) {
  const ClothMesh mesh = build_grid_cloth(24, 20, 0.01);
  const CameraModel cam;
  const ClothState s = folded(mesh, 0.006);
  const auto vis = visible_vertices(mesh, s, cam);
  EXPECT_EQ(vis, visibility_oracle(s.positions, cam));
  const double fraction = double(vis.size()) / mesh.num_vertices();
  EXPECT_NEAR(fraction, 0.5, 0.02);
}

TEST(Visibility, RandomCrumpleMatchesOracle) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-0.08, 0.08), z(0.0, 0.03);
  CameraModel cam;
  cam.width = cam.height = 64;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Vec3> pts(300);
    for (Vec3& p : pts) p = Vec3(u(rng), u(rng), z(rng));
    EXPECT_EQ(visible_vertices(pts, cam), visibility_oracle(pts, cam));
  }
}

TEST(Render, NoiselessIsVisibleSet) {
  const ClothMesh mesh = build_grid_cloth(12, 12, 0.01);
  CameraModel cam;
  cam.depth_noise_sigma = 0.0;
  cam.dropout_rate = 0.0;
  const ClothState s = folded(mesh, 0.006);
  const RenderedCloud r = render_point_cloud(mesh, s, cam, {}, 5);
  const auto vis = visible_vertices(mesh, s, cam);
  ASSERT_EQ(r.cloud.size(), vis.size());
  for (std::size_t k = 0; k < vis.size(); ++k) EXPECT_EQ(r.cloud.points[k], s.positions[vis[k]]);
  EXPECT_FALSE(r.fully_occluded);
}

TEST(Render, OccluderRemovesPoints) {
  const ClothMesh mesh = build_grid_cloth(20, 20, 0.01);
  const CameraModel cam;
  const Sphere tip{Vec3(0.02, -0.01, 0.0), 0.03};
  const RenderedCloud r = render_point_cloud(mesh, rest_state(mesh), cam, {&tip, 1}, 8);
  EXPECT_FALSE(r.cloud.empty());
  for (const Vec3& p : r.cloud.points) EXPECT_GT((p - tip.center).norm(), 0.03);

  const Sphere all{Vec3::Zero(), 1.0};
  EXPECT_TRUE(render_point_cloud(mesh, rest_state(mesh), cam, {&all, 1}, 8).fully_occluded);
}

TEST(Render, NoiseStatistics) {
  const ClothMesh mesh = build_grid_cloth(2, 2, 0.05);
  CameraModel cam;
  cam.dropout_rate = 0.0;
  cam.depth_noise_sigma = 0.001;
  const ClothState s = rest_state(mesh);
  double sum[3] = {0, 0, 0}, sq[3] = {0, 0, 0};
  int count = 0;
  for (std::uint64_t seed = 0; seed < 2500; ++seed) {
    const RenderedCloud r = render_point_cloud(mesh, s, cam, {}, seed);
    ASSERT_EQ(r.cloud.size(), 4u);
    for (std::size_t k = 0; k < 4; ++k) {
      const Vec3 d = r.cloud.points[k] - s.positions[k];
      for (int a = 0; a < 3; ++a) {
        sum[a] += d[a];
        sq[a] += d[a] * d[a];
      }
      ++count;
    }
  }
  for (int a = 0; a < 3; ++a) {
    const double mean = sum[a] / count;
    const double sd = std::sqrt(sq[a] / count - mean * mean);
    EXPECT_GE(sd, 0.0009);
    EXPECT_LE(sd, 0.0011);
  }
}

TEST(Render, Reproducible) {
  const ClothMesh mesh = build_grid_cloth(10, 10, 0.01);
  const ClothState s = rest_state(mesh);
  const CameraModel cam;
  const auto a = render_point_cloud(mesh, s, cam, {}, 42).cloud.points;
  const auto b = render_point_cloud(mesh, s, cam, {}, 42).cloud.points;
  const auto c = render_point_cloud(mesh, s, cam, {}, 43).cloud.points;
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(Chamfer, HandExamples) {
  const std::vector<Vec3> src{Vec3(0, 0, 0)};
  const std::vector<Vec3> dst{Vec3(1, 0, 0), Vec3(0, 2, 0)};
  EXPECT_EQ(chamfer_one_way(src, dst), 1.0);
  // Asymmetric witness: the reverse direction averages 1 and 4.
  EXPECT_EQ(chamfer_one_way(dst, src), 2.5);
  EXPECT_EQ(chamfer_one_way(dst, src, ChamferMetric::kUnsquared), 1.5);
  const std::vector<Vec3> one{Vec3(1, 0, 0)};
  EXPECT_EQ(chamfer_bidirectional(src, one), 1.0);
  EXPECT_EQ(chamfer_one_way(dst, dst), 0.0);
  EXPECT_THROW(chamfer_one_way(std::vector<Vec3>{}, dst), Error);
}

TEST(Chamfer, MatchesBruteForce) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  std::vector<Vec3> a(200), b(300);
  for (Vec3& p : a) p = Vec3(u(rng), u(rng), u(rng));
  for (Vec3& p : b) p = Vec3(u(rng), u(rng), u(rng));
  double oracle = 0.0;
  for (const Vec3& p : a) {
    double best = INFINITY;
    for (const Vec3& q : b) best = std::min(best, (p - q).squaredNorm());
    oracle += best;
  }
  oracle /= a.size();
  EXPECT_LE(std::abs(chamfer_one_way(a, b) - oracle), 1e-12 * oracle);
}

TEST(Chamfer, SupersetAndSymmetry) {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  std::vector<Vec3> p(50), r(70);
  for (Vec3& x : p) x = Vec3(u(rng), u(rng), u(rng));
  for (Vec3& x : r) x = Vec3(u(rng), u(rng), u(rng));
  std::vector<Vec3> both = r;
  both.insert(both.end(), p.begin(), p.end());
  EXPECT_EQ(chamfer_one_way(p, both), 0.0);
  EXPECT_EQ(chamfer_bidirectional(p, r), chamfer_bidirectional(r, p));
}

TEST(Depth, SplatsNearestSurface) {
  CameraModel cam;
  PointCloud cloud;
  const double x = cam.pixel_center_x(100), y = cam.pixel_center_y(60);
  cloud.points = {Vec3(x, y, 0.01), Vec3(x, y, 0.05), Vec3(5.0, 5.0, 0.0)};
  const DepthImage img = depth_from_point_cloud(cloud, cam);
  ASSERT_EQ(img.depth.size(), 200u * 200u);
  EXPECT_FLOAT_EQ(img.depth[60 * 200 + 100], float(cam.camera_height - 0.05));
  EXPECT_EQ(img.depth[0], 0.0f);
}

TEST(Camera, Validation) {
  CameraModel cam;
  cam.width = 8;
  EXPECT_THROW(cam.validate(), Error);
  cam = CameraModel{};
  cam.dropout_rate = 1.0;
  EXPECT_THROW(cam.validate(), Error);
  cam = CameraModel{};
  cam.x_max = cam.x_min;
  EXPECT_THROW(cam.validate(), Error);
}
