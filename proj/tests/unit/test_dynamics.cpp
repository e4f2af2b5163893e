#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "clothtrack/dynamics.hpp"

using namespace clothtrack;

namespace {

ClothState lifted(const ClothMesh& mesh, double z) {
  ClothState s = rest_state(mesh);
  for (Vec3& p : s.positions) p.z() = z;
  return s;
}

Vec3 center_of_mass(const ClothState& s) {
  Vec3 c = Vec3::Zero();
  for (const Vec3& p : s.positions) c += p;
  return c / static_cast<double>(s.size());
}

}  // namespace

TEST(Dynamics, RestIsFixedPointWithoutGravity) {
  const ClothMesh mesh = build_grid_cloth(2, 2, 0.01);
  SimParams p;
  p.gravity = 0.0;
  const ClothState s = lifted(mesh, 0.2);
  const ClothState next = dyn_step(mesh, s, p, LowLevelAction::none());
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_NEAR((next.positions[i] - s.positions[i]).norm(), 0.0, 1e-17);
    EXPECT_NEAR(next.velocities[i].norm(), 0.0, 1e-15);
  }
  EXPECT_EQ(next.time_index, s.time_index + 1);
}

TEST(Dynamics, FreeFallOneSubstep) {
  const ClothMesh mesh = build_grid_cloth(2, 2, 0.01);
  SimParams p;
  p.substeps = 1;
  const double h = 0.5;
  const ClothState next = dyn_step(mesh, lifted(mesh, h), p, LowLevelAction::none());
  for (const Vec3& x : next.positions)
    EXPECT_NEAR(x.z(), h - p.gravity * p.dt * p.dt, 1e-15);
}

TEST(Dynamics, EqualMassProjectionKeepsCenterOfMass) {
  const ClothMesh mesh = build_grid_cloth(2, 2, 0.01);
  SimParams p;
  p.gravity = 0.0;
  p.stiffness = SimParams::kStiffnessScale;
  ClothState s = lifted(mesh, 0.3);
  s.positions[3] += Vec3(0.003, 0.002, 0.0);
  const Vec3 before = center_of_mass(s);
  const ClothState next = dyn_step(mesh, s, p, LowLevelAction::none());
  EXPECT_LT((center_of_mass(next) - before).norm(), 1e-15);
  // Both endpoints of the stretched edge moved, toward each other.
  EXPECT_GT((next.positions[0] - s.positions[0]).norm(), 1e-6);
  EXPECT_LT((next.positions[3] - next.positions[0]).norm(),
            (s.positions[3] - s.positions[0]).norm());
}

TEST(Dynamics, CenterOfMassUnderInternalConstraints) {
  const ClothMesh mesh = build_grid_cloth(12, 10, 0.01);
  SimParams p;
  p.gravity = 0.0;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-0.003, 0.003);
  ClothState s = lifted(mesh, 0.4);
  for (Vec3& x : s.positions) x += Vec3(u(rng), u(rng), u(rng));
  const Vec3 c0 = center_of_mass(s);
  for (int k = 0; k < 20; ++k) {
    s = dyn_step(mesh, s, p, LowLevelAction::none());
    EXPECT_LT((center_of_mass(s) - c0).norm(), 1e-9);
  }
}

TEST(Dynamics, GraspFidelityAndGround) {
  const ClothMesh mesh = build_grid_cloth(10, 10, 0.01);
  const SimParams p;
  ClothState s = rest_state(mesh);
  LowLevelAction a;
  a.grasp_active = true;
  a.picked_vertex = mesh.index(0, 0);
  for (int k = 0; k < 30; ++k) {
    a.picker_delta = k < 15 ? Vec3(0.002, 0.001, 0.004) : Vec3(0.003, 0.0, -0.004);
    const ClothState next = dyn_step(mesh, s, p, a);
    EXPECT_LE((next.positions[a.picked_vertex] - (s.positions[a.picked_vertex] + a.picker_delta))
                  .norm(),
              1e-12);
    for (const Vec3& x : next.positions) EXPECT_GE(x.z(), -1e-6);
    s = next;
  }
}

TEST(Dynamics, Deterministic) {
  const ClothMesh mesh = build_grid_cloth(8, 8, 0.01);
  const SimParams p;
  LowLevelAction a;
  a.grasp_active = true;
  a.picked_vertex = 5;
  a.picker_delta = Vec3(0.001, 0.002, 0.003);
  ClothState s = rest_state(mesh);
  for (int k = 0; k < 5; ++k) s = dyn_step(mesh, s, p, a);
  const ClothState x = dyn_step(mesh, s, p, a);
  const ClothState y = dyn_step(mesh, s, p, a);
  EXPECT_EQ(x.positions, y.positions);
  EXPECT_EQ(x.velocities, y.velocities);
}

TEST(Dynamics, SimulateSegmentComposes) {
  const ClothMesh mesh = build_grid_cloth(6, 6, 0.01);
  const SimParams p;
  std::vector<LowLevelAction> actions(8);
  for (auto& a : actions) {
    a.grasp_active = true;
    a.picked_vertex = 7;
    a.picker_delta = Vec3(0.0, 0.001, 0.005);
  }
  actions.back() = LowLevelAction::none();
  const auto states = simulate_segment(mesh, rest_state(mesh), p, actions);
  ClothState s = rest_state(mesh);
  for (const auto& a : actions) s = dyn_step(mesh, s, p, a);
  ASSERT_EQ(states.size(), actions.size());
  EXPECT_EQ(states.back().positions, s.positions);
  EXPECT_EQ(states.back().velocities, s.velocities);
}

TEST(Dynamics, LiftAccumulatesExactly) {
  const ClothMesh mesh = build_grid_cloth(5, 5, 0.01);
  const SimParams p;
  const int T = 12;
  const double delta = 0.004;
  std::vector<LowLevelAction> actions(T);
  for (auto& a : actions) {
    a.grasp_active = true;
    a.picked_vertex = 12;
    a.picker_delta = Vec3(0, 0, delta);
  }
  const auto states = simulate_segment(mesh, rest_state(mesh), p, actions);
  EXPECT_NEAR(states.back().positions[12].z(), T * delta, 1e-15);
}

TEST(Dynamics, StillWithoutGravityOrActions) {
  const ClothMesh mesh = build_grid_cloth(4, 4, 0.01);
  SimParams p;
  p.gravity = 0.0;
  const std::vector<LowLevelAction> actions(5);
  const ClothState s0 = rest_state(mesh);
  for (const ClothState& s : simulate_segment(mesh, s0, p, actions))
    for (std::size_t i = 0; i < s.size(); ++i)
      EXPECT_NEAR((s.positions[i] - s0.positions[i]).norm(), 0.0, 1e-17);
}

TEST(Dynamics, StretchBoundAfterSettle) {
  const ClothMesh mesh = build_grid_cloth(10, 10, 0.01);
  SimParams p;
  p.stiffness = 1.0;
  p.solver_iterations = 20;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-0.001, 0.001);
  ClothState s = rest_state(mesh);
  for (Vec3& x : s.positions) x += Vec3(u(rng), u(rng), 0.002 + u(rng));
  for (int k = 0; k < 100; ++k) s = dyn_step(mesh, s, p, LowLevelAction::none());
  for (std::size_t e = 0; e < mesh.edges().size(); ++e) {
    if (mesh.edge_kinds()[e] != EdgeKind::kStructural) continue;
    const Edge& ed = mesh.edges()[e];
    EXPECT_LE((s.positions[ed.a] - s.positions[ed.b]).norm(), 1.05 * mesh.rest_lengths()[e]);
  }
}

TEST(Dynamics, PathOffsetsReproducePlainStep) {
  const ClothMesh mesh = build_grid_cloth(8, 8, 0.01);
  const SimParams p;
  LowLevelAction a;
  a.grasp_active = true;
  a.picked_vertex = 0;
  a.picker_delta = Vec3(0.003, 0.0, 0.004);
  ClothState s = rest_state(mesh);
  for (int k = 0; k < 4; ++k) s = dyn_step(mesh, s, p, a);

  std::vector<std::vector<Vec3>> predictions;
  const ClothState plain = dyn_step(mesh, s, p, a, nullptr, &predictions);
  ASSERT_EQ(predictions.size(), static_cast<std::size_t>(p.substeps));

  PseudoAction pa = PseudoAction::zeros(mesh.num_vertices());
  for (std::size_t i = 0; i < mesh.num_vertices(); i += 2) {
    pa.affected[i] = 1;
    pa.displacement[i] = plain.positions[i] - s.positions[i];
  }
  pa.path_offsets = substep_path_offsets(s.positions, plain.positions, predictions);
  const ClothState guided = dyn_step(mesh, s, p, a, &pa);
  for (std::size_t i = 0; i < mesh.num_vertices(); ++i)
    EXPECT_LT((guided.positions[i] - plain.positions[i]).norm(), 1e-15);

  // A straight-line path without offsets does not.
  pa.path_offsets.clear();
  const ClothState straight = dyn_step(mesh, s, p, a, &pa);
  double dev = 0.0;
  for (std::size_t i = 0; i < mesh.num_vertices(); ++i)
    dev = std::max(dev, (straight.positions[i] - plain.positions[i]).norm());
  EXPECT_GT(dev, 1e-9);
}

TEST(Dynamics, PseudoActionMovesAffectedVertices) {
  const ClothMesh mesh = build_grid_cloth(5, 5, 0.01);
  SimParams p;
  p.gravity = 0.0;
  const ClothState s = lifted(mesh, 0.1);
  PseudoAction pa = PseudoAction::zeros(mesh.num_vertices());
  for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
    pa.affected[i] = 1;
    pa.displacement[i] = Vec3(0.002, -0.001, 0.003);
  }
  const ClothState next = dyn_step(mesh, s, p, LowLevelAction::none(), &pa);
  for (std::size_t i = 0; i < mesh.num_vertices(); ++i)
    EXPECT_LT((next.positions[i] - (s.positions[i] + pa.displacement[i])).norm(), 1e-12);

  pa.displacement.pop_back();
  EXPECT_THROW(dyn_step(mesh, s, p, LowLevelAction::none(), &pa), Error);
}

TEST(Dynamics, ExplosionCheck) {
  const ClothMesh mesh = build_grid_cloth(3, 3, 0.01);
  const ClothState s = rest_state(mesh);
  EXPECT_FALSE(explosion_check(s, s, 0.01, 10.0));
  ClothState moved = s;
  moved.positions[4].x() += 1.0;
  EXPECT_TRUE(explosion_check(s, moved, 0.01, 10.0));
  ClothState slow = s;
  slow.positions[4].x() += 0.05;
  EXPECT_FALSE(explosion_check(s, slow, 0.01, 10.0));
  ClothState nan = s;
  nan.positions[0].y() = std::nan("");
  EXPECT_TRUE(explosion_check(s, nan, 0.01, 10.0));
}

TEST(Dynamics, ProjectionFactor) {
  SimParams p;
  p.stiffness = 0.8;
  EXPECT_DOUBLE_EQ(p.projection_factor(), 0.5);
  p.stiffness = 3.0;
  EXPECT_EQ(p.projection_factor(), 1.0);
  p.stiffness = -1.0;
  EXPECT_THROW(p.validate(), Error);
}
