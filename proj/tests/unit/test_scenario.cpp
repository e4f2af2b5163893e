#include <gtest/gtest.h>

#include "clothtrack/io.hpp"
#include "clothtrack/scenario.hpp"

using namespace clothtrack;

namespace {

ScenarioConfig small(std::uint64_t seed) {
  ScenarioConfig sc;
  sc.rng_seed = seed;
  sc.num_x = sc.num_y = 10;
  sc.spacing = 0.012;
  sc.substeps_per_action = 16;
  sc.min_place_distance = 0.03;
  sc.max_place_distance = 0.08;
  return sc;
}

}  // namespace

TEST(Decompose, PhasesAndTotals) {
  PickPlaceAction a;
  a.pick_point = Vec3(0.01, 0.02, 0.0);
  a.place_point = Vec3(0.09, -0.03, 0.0);
  a.lift_height = 0.08;
  a.num_substeps = 40;
  const auto steps = decompose_pick_place(a, 17, a.pick_point);
  ASSERT_EQ(steps.size(), 40u);
  Vec3 total = Vec3::Zero();
  int grasped = 0;
  for (const LowLevelAction& s : steps) {
    EXPECT_EQ(s.picked_vertex, 17u);
    total += s.picker_delta;
    grasped += s.grasp_active;
    if (!s.grasp_active) EXPECT_EQ(s.picker_delta, Vec3::Zero());
  }
  EXPECT_TRUE(steps.front().grasp_active);
  EXPECT_FALSE(steps.back().grasp_active);
  EXPECT_EQ(grasped, 34);
  EXPECT_NEAR(total.x(), 0.08, 1e-12);
  EXPECT_NEAR(total.y(), -0.05, 1e-12);
  EXPECT_NEAR(total.z(), 0.2 * 0.08, 1e-12);
  EXPECT_GT(steps.front().picker_delta.z(), 0.0);
}

TEST(Scenario, CountsAndGroundTruth) {
  ScenarioConfig sc = small(1);
  sc.num_trajectories = 4;
  sc.segments_per_trajectory = 3;
  const auto trajs = generate_synthetic_trajectories(sc);
  ASSERT_EQ(trajs.size(), 4u);
  std::size_t records = 0;
  for (const Trajectory& t : trajs) {
    EXPECT_NO_THROW(t.validate());
    EXPECT_TRUE(t.has_ground_truth());
    ASSERT_EQ(t.segments.size(), 3u);
    for (const Segment& s : t.segments) {
      EXPECT_EQ(s.actions.size(), 16u);
      EXPECT_EQ(s.observations.size(), 16u);
      EXPECT_EQ(s.ground_truth.size(), 16u);
    }
    records += t.segments.size() + 1;
  }
  EXPECT_EQ(records, 16u);
}

TEST(Scenario, SameSeedSameBytes) {
  ScenarioConfig sc = small(5);
  sc.num_trajectories = 2;
  sc.segments_per_trajectory = 2;
  const auto a = generate_synthetic_trajectories(sc);
  const auto b = generate_synthetic_trajectories(sc);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    EXPECT_EQ(io::encode_trajectory(a[i]), io::encode_trajectory(b[i]));
  sc.rng_seed = 6;
  EXPECT_NE(io::encode_trajectory(generate_synthetic_trajectories(sc)[0]),
            io::encode_trajectory(a[0]));
}

TEST(Scenario, TrajectoriesIndependentOfCount) {
  ScenarioConfig sc = small(9);
  sc.segments_per_trajectory = 1;
  sc.num_trajectories = 1;
  const auto one = generate_synthetic_trajectories(sc);
  sc.num_trajectories = 3;
  const auto three = generate_synthetic_trajectories(sc);
  EXPECT_EQ(io::encode_trajectory(one[0]), io::encode_trajectory(three[0]));
}

TEST(Scenario, FoldInHalfHidesHalf) {
  ScenarioConfig sc;
  sc.rng_seed = 2;
  sc.policy = PickPolicy::kFoldInHalf;
  sc.segments_per_trajectory = 1;
  const Trajectory t = generate_synthetic_trajectories(sc).front();
  const ClothMesh mesh = t.mesh();
  const auto vis = visible_vertices(mesh, t.segments.back().ground_truth.back(), sc.camera);
  const double fraction = double(vis.size()) / mesh.num_vertices();
  EXPECT_GE(fraction, 0.45);
  EXPECT_LE(fraction, 0.65);
}

TEST(Scenario, GraspFollowsPickerAndOccluderHidesTip) {
  ScenarioConfig sc = small(3);
  sc.segments_per_trajectory = 1;
  sc.camera.dropout_rate = 0.0;
  const Trajectory t = generate_synthetic_trajectories(sc).front();
  const Segment& seg = t.segments.front();
  ClothState prev = t.initial_state;
  for (std::size_t k = 0; k < seg.actions.size(); ++k) {
    const LowLevelAction& a = seg.actions[k];
    const ClothState& gt = seg.ground_truth[k];
    if (a.grasp_active) {
      EXPECT_LE((gt.positions[a.picked_vertex] - prev.positions[a.picked_vertex] - a.picker_delta)
                    .norm(),
                1e-12);
      for (const Vec3& p : seg.observations[k].points)
        EXPECT_GT((p - gt.positions[a.picked_vertex]).norm(), sc.occluder_radius - 1e-12);
    }
    prev = gt;
  }
}

TEST(Scenario, DragStaysLow) {
  ScenarioConfig sc = small(4);
  sc.policy = PickPolicy::kDrag;
  sc.segments_per_trajectory = 1;
  const Trajectory t = generate_synthetic_trajectories(sc).front();
  double top = 0.0;
  for (const ClothState& s : t.segments.front().ground_truth)
    for (const Vec3& p : s.positions) top = std::max(top, p.z());
  EXPECT_LE(top, sc.drag_lift_height + 1e-9);
  EXPECT_GT(top, 0.0);
}

TEST(Scenario, ScriptedPicks) {
  ScenarioConfig sc = small(5);
  sc.policy = PickPolicy::kScripted;
  sc.segments_per_trajectory = 1;
  const ClothMesh mesh = build_grid_cloth(sc.num_x, sc.num_y, sc.spacing);
  const Vec3 corner = mesh.rest_positions()[0];
  sc.script = {ScriptedPick{corner, Vec3(0.05, 0.05, 0.0)}};
  const Trajectory t = generate_synthetic_trajectories(sc).front();
  EXPECT_EQ(t.segments.front().actions.front().picked_vertex, 0u);
  sc.script = {ScriptedPick{Vec3(0.25, 0.25, 0.0), Vec3::Zero()}};
  EXPECT_THROW(generate_synthetic_trajectories(sc), Error);
  sc.script.clear();
  EXPECT_THROW(sc.validate(), Error);
}

TEST(Scenario, PolicyNames) {
  for (PickPolicy p : {PickPolicy::kRandomEdgePick, PickPolicy::kFoldInHalf, PickPolicy::kDrag,
                       PickPolicy::kScripted})
    EXPECT_EQ(pick_policy_from_string(to_string(p)), p);
  EXPECT_THROW(pick_policy_from_string("juggle"), Error);
}

TEST(Scenario, Validation) {
  ScenarioConfig sc;
  sc.segments_per_trajectory = -1;
  EXPECT_THROW(sc.validate(), Error);
  sc = ScenarioConfig{};
  sc.hidden_params.dt = 0.0;
  EXPECT_THROW(sc.validate(), Error);
}
