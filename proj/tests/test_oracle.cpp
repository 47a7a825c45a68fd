#include <gtest/gtest.h>

#include <random>

#include "invstat/invstat.hpp"
#include "support.hpp"

namespace invstat {
namespace {

TEST(Oracle, AgreesWithAssemblyOnRandomScenes) {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    auto sc = testing::random_scene(rng, trial % 2 ? 3 : 2);
    const Structure& st = sc.structure;
    ASSERT_TRUE(validate_structure(st).empty());
    LoadVector p = gravity_load(st);
    p.values += testing::random_vector(rng, p.values.size(), -1.0, 1.0);
    const Vec q = testing::random_vector(rng, st.cable_count(), -5.0, 5.0);
    std::optional<NodeMask> anchors;
    if (trial % 3 == 0 && st.node_count() > 1) anchors = NodeMask::of(st.node_count(), {0});
    EXPECT_LE(testing::oracle_assembly_gap(st, sc.coords, p, q, anchors), 1e-10) << "trial " << trial;
  }
}

TEST(Oracle, NodalResidualMatchesMatrix) {
  std::mt19937 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    auto sc = testing::random_scene(rng, trial % 2 ? 3 : 2);
    const Structure& st = sc.structure;
    const Mat C = connectivity_matrix(st);
    const Vec q = testing::random_vector(rng, st.member_count(), -5.0, 5.0);
    const LoadVector p = gravity_load(st);
    const Mat loops = nodal_residual(C, sc.coords, q, p);
    const Vec matrix = equilibrium_matrix(C, sc.coords) * q - p.values;
    const int n = st.node_count();
    for (int a = 0; a < st.dimension; ++a) {
      EXPECT_LE((loops.col(a) - matrix.segment(a * n, n)).lpNorm<Eigen::Infinity>(), 1e-12);
    }
  }
}

TEST(Oracle, HandComputedTwoNodeWrench) {
  // One cable between two single-node bodies, q = 2, no load: each body
  // feels 2 * (other - this).
  Structure st;
  st.dimension = 3;
  st.body_of_node = {0, 1};
  st.members = {make_member(MemberKind::Cable, 0, 1)};
  st.spring_constants = {1.0};
  st.node_masses = {0.0, 0.0};
  Coordinates x{Mat(2, 3)};
  x.positions << 0, 1, 0, 1, 1, 0;
  const auto w = body_wrench_residuals(st, x, LoadVector::zero(2, 3), Vec::Constant(1, 2.0));
  ASSERT_EQ(w.bodies.size(), 2u);
  EXPECT_DOUBLE_EQ(w.bodies[0].force[0], 2.0);
  EXPECT_DOUBLE_EQ(w.bodies[1].force[0], -2.0);
  // r x f about the origin for node 0 at (0,1,0) with f = (2,0,0).
  EXPECT_DOUBLE_EQ(w.bodies[0].moment[2], -2.0);
  EXPECT_DOUBLE_EQ(w.max_force, 2.0);
}

TEST(Oracle, SkippedBodiesAreNotReported) {
  const Model m = spine2d({.vertebrae = 3});
  const Coordinates x = nodes_from_poses(m.structure, m.local, chained_planar_frame(3, 0.1, 0.1));
  const auto w = body_wrench_residuals(m.structure, x, gravity_load(m.structure),
                                       Vec::Ones(m.structure.cable_count()), m.anchors);
  ASSERT_EQ(w.bodies.size(), 2u);
  EXPECT_EQ(w.bodies[0].body, 1);
}

TEST(Oracle, MomentResidualIsReferenceFreeAtEquilibrium) {
  // At a balanced solution the body wrench vanishes, so moving the origin
  // (translating every node) keeps it at zero.
  const Model m = spine2d({.vertebrae = 4});
  const Frame f = chained_planar_frame(4, 0.1, 0.08);
  StaticsSetup setup;
  setup.anchors = m.anchors;
  setup.bounds = TensionBounds::uniform(0.5, m.structure.cable_count(), 0.01);
  Coordinates x = nodes_from_poses(m.structure, m.local, f);
  const PoseSolution ps = solve_pose(m.structure, x, setup);
  ASSERT_TRUE(ps.optimal());
  const Eigen::Vector2d shift(3.7, -12.5);
  x.positions.rowwise() += shift.transpose();
  const auto w = body_wrench_residuals(m.structure, x, gravity_load(m.structure), ps.qp.q, m.anchors);
  EXPECT_LE(w.worst(), 1e-9);
}

}  // namespace
}  // namespace invstat
