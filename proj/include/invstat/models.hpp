#pragma once

// Structure generators: the planar tensegrity spine and a simplified spatial
// quadruped built on the same spine with hip and shoulder bodies.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Geometry>

#include "invstat/core.hpp"
#include "invstat/equilibrium.hpp"
#include "invstat/poses.hpp"
#include "invstat/topology.hpp"

namespace invstat {

inline constexpr double kNewtonsPerPoundForce = 4.448222;
inline constexpr double kMetersPerInch = 0.0254;

/// 4.8 lbf/in, the elastic cable stiffness of the spine study.
inline constexpr double kSpineStiffness = 4.8 * kNewtonsPerPoundForce / kMetersPerInch;

/// A generated structure with everything needed to pose, load and label it.
struct Model {
  Structure structure;
  LocalCoordinates local;
  std::vector<std::string> cable_labels;  // e.g. "HB-2": group, then joint number
  std::vector<std::string> cable_groups;  // e.g. "HB"
  std::vector<int> cable_joint;           // 0-based joint (cable set) index
  std::optional<NodeMask> anchors;
  std::optional<NodeMask> pinned;
  std::vector<ReactionConstraint> reaction_constraints;
  std::optional<double> min_density;      // suggested bounds; command-line flags override
  std::optional<double> min_rest_length;
};

inline const std::vector<std::string>& spine_groups() {
  static const std::vector<std::string> g{"HT", "HB", "SB", "ST"};
  return g;
}

inline const std::vector<std::string>& quadruped_groups() {
  static const std::vector<std::string> g{"HT", "HB", "HL", "HR", "ST", "SB", "SL", "SR"};
  return g;
}

namespace detail {

inline void add_cable(Model& m, int a, int b, const std::string& group, int joint) {
  m.structure.members.push_back(make_member(MemberKind::Cable, a, b));
  m.cable_groups.push_back(group);
  m.cable_joint.push_back(joint);
  m.cable_labels.push_back(group + "-" + std::to_string(joint + 1));
}

inline void spread_mass(Structure& st, double total) {
  st.node_masses.assign(static_cast<std::size_t>(st.node_count()), total / st.node_count());
}

}  // namespace detail

struct SpineParams {
  int vertebrae = 5;
  double half_width = 0.1;   // w: tips sit at x = -w and x = +w
  double half_height = 0.1;  // h: upper and lower tips at y = +h and -h
  double mass_total = 0.495;
  double stiffness = kSpineStiffness;
  bool anchor_first = true;
};

/// Each vertebra: center, upper-rear tip, lower-rear tip, front tip, with
/// three bars from the center. Between vertebrae k and k+1 four cables, in
/// order: upper-upper (HT), lower-lower (HB), front-upper (SB), front-lower (ST).
inline Model spine2d(const SpineParams& prm = {}) {
  require(prm.vertebrae >= 2, ErrorCode::InvalidStructure, "spine needs at least two vertebrae");
  const int N = prm.vertebrae;
  Model m;
  Structure& st = m.structure;
  st.dimension = 2;
  const std::vector<int> eta(static_cast<std::size_t>(N), 4);
  st.body_of_node = partition_from_sizes(eta);

  for (int k = 0; k + 1 < N; ++k) {
    const int a = 4 * k;
    const int b = 4 * (k + 1);
    detail::add_cable(m, a + 1, b + 1, "HT", k);
    detail::add_cable(m, a + 2, b + 2, "HB", k);
    detail::add_cable(m, a + 3, b + 1, "SB", k);
    detail::add_cable(m, a + 3, b + 2, "ST", k);
  }
  for (int k = 0; k < N; ++k) {
    const int c = 4 * k;
    for (int tip = 1; tip <= 3; ++tip) st.members.push_back(make_member(MemberKind::Bar, c, c + tip));
  }
  st.spring_constants.assign(static_cast<std::size_t>(st.cable_count()), prm.stiffness);
  detail::spread_mass(st, prm.mass_total);

  Mat vertebra(4, 2);
  vertebra << 0.0, 0.0, -prm.half_width, prm.half_height, -prm.half_width, -prm.half_height, prm.half_width, 0.0;
  m.local.assign(static_cast<std::size_t>(N), vertebra);
  if (prm.anchor_first) m.anchors = NodeMask::of(st.node_count(), {0, 1, 2, 3});
  m.min_density = 0.5;
  m.min_rest_length = 0.01;
  return m;
}

struct QuadrupedParams {
  int vertebrae = 7;  // spine bodies between hips and shoulders
  double length = 0.95;
  double mass_total = 7.3;
  double half_width = 0.1;
  double half_height = 0.1;
  double leg_length = 0.3;
  double stiffness = kSpineStiffness;
};

/// Body count, hips first and shoulders last.
inline int quadruped_bodies(const QuadrupedParams& prm) { return prm.vertebrae + 2; }

/// Center-to-center spacing that gives the straight pose its overall length.
inline double quadruped_spacing(const QuadrupedParams& prm) {
  return (prm.length - 2.0 * prm.half_width) / (quadruped_bodies(prm) - 1);
}

/// Spatial spine along x. Every body carries a vertebra cross: center,
/// top (-w, 0, h), bottom (-w, 0, -h), left (w, h, 0), right (w, -h, 0).
/// Hips and shoulders add two feet below the body center, one under each side
/// node, with a leg bar from that side node.
/// Eight cables per joint: HT, HB, HL, HR join like nodes; the saddle cables
/// run from the front side nodes of body k to the rear nodes of body k+1:
/// ST left-top, SB right-bottom, SL left-bottom, SR right-top.
inline Model quadruped3d(const QuadrupedParams& prm = {}) {
  require(prm.vertebrae >= 1, ErrorCode::InvalidStructure, "quadruped needs at least one spine vertebra");
  require(prm.length > 2.0 * prm.half_width, ErrorCode::InvalidStructure, "length too short for the vertebra size");
  const int b = quadruped_bodies(prm);
  Model m;
  Structure& st = m.structure;
  st.dimension = 3;

  std::vector<int> eta(static_cast<std::size_t>(b), 5);
  eta.front() = 7;
  eta.back() = 7;
  st.body_of_node = partition_from_sizes(eta);
  std::vector<int> first(static_cast<std::size_t>(b), 0);
  for (int k = 1; k < b; ++k) first[static_cast<std::size_t>(k)] = first[static_cast<std::size_t>(k - 1)] + eta[static_cast<std::size_t>(k - 1)];

  enum { kCenter = 0, kTop = 1, kBottom = 2, kLeft = 3, kRight = 4, kFootLeft = 5, kFootRight = 6 };
  for (int k = 0; k + 1 < b; ++k) {
    const int a = first[static_cast<std::size_t>(k)];
    const int c = first[static_cast<std::size_t>(k + 1)];
    detail::add_cable(m, a + kTop, c + kTop, "HT", k);
    detail::add_cable(m, a + kBottom, c + kBottom, "HB", k);
    detail::add_cable(m, a + kLeft, c + kLeft, "HL", k);
    detail::add_cable(m, a + kRight, c + kRight, "HR", k);
    detail::add_cable(m, a + kLeft, c + kTop, "ST", k);
    detail::add_cable(m, a + kRight, c + kBottom, "SB", k);
    detail::add_cable(m, a + kLeft, c + kBottom, "SL", k);
    detail::add_cable(m, a + kRight, c + kTop, "SR", k);
  }
  for (int k = 0; k < b; ++k) {
    const int a = first[static_cast<std::size_t>(k)];
    for (int tip = kTop; tip <= kRight; ++tip) st.members.push_back(make_member(MemberKind::Bar, a + kCenter, a + tip));
    if (eta[static_cast<std::size_t>(k)] == 7) {
      st.members.push_back(make_member(MemberKind::Bar, a + kLeft, a + kFootLeft));
      st.members.push_back(make_member(MemberKind::Bar, a + kRight, a + kFootRight));
    }
  }
  st.spring_constants.assign(static_cast<std::size_t>(st.cable_count()), prm.stiffness);
  detail::spread_mass(st, prm.mass_total);

  const double w = prm.half_width;
  const double h = prm.half_height;
  Mat vertebra(5, 3);
  vertebra << 0, 0, 0, -w, 0, h, -w, 0, -h, w, h, 0, w, -h, 0;
  Mat girdle(7, 3);
  girdle.topRows(5) = vertebra;
  girdle.row(5) << 0.0, h, -prm.leg_length;
  girdle.row(6) << 0.0, -h, -prm.leg_length;
  m.local.assign(static_cast<std::size_t>(b), vertebra);
  m.local.front() = girdle;
  m.local.back() = girdle;

  const std::vector<int> feet{first.front() + kFootLeft, first.front() + kFootRight, first.back() + kFootLeft,
                              first.back() + kFootRight};
  m.pinned = NodeMask::of(st.node_count(), feet);
  for (int foot : feet) {
    m.reaction_constraints.push_back({0, foot, 0.0});
    m.reaction_constraints.push_back({1, foot, 0.0});
  }
  m.min_density = 25.0;
  return m;
}

/// Sagittal arch of the quadruped. `arch` is the total pitch change from hips
/// to shoulders in radians: positive arches the back upward (flexion),
/// negative sags it (extension), zero is straight. The pose is symmetric about
/// the middle body, and the feet are lifted or lowered onto z = 0.
inline Frame quadruped_frame(const QuadrupedParams& prm, double arch) {
  const int b = quadruped_bodies(prm);
  const double d = quadruped_spacing(prm);
  const double step = arch / (b - 1);
  const double mid = 0.5 * (b - 1);

  std::vector<Eigen::Vector3d> centers(static_cast<std::size_t>(b), Eigen::Vector3d::Zero());
  std::vector<double> pitch(static_cast<std::size_t>(b));
  for (int k = 0; k < b; ++k) pitch[static_cast<std::size_t>(k)] = (k - mid) * step;
  // Each link leaves body k along the bisector of its own and the next pitch.
  for (int k = 1; k < b; ++k) {
    const double heading = 0.5 * (pitch[static_cast<std::size_t>(k - 1)] + pitch[static_cast<std::size_t>(k)]);
    centers[static_cast<std::size_t>(k)] = centers[static_cast<std::size_t>(k - 1)] +
                                           Eigen::AngleAxisd(heading, Eigen::Vector3d::UnitY()) *
                                               Eigen::Vector3d(d, 0.0, 0.0);
  }
  const Eigen::Vector3d middle = 0.5 * (centers.front() + centers.back());

  Frame frame;
  for (int k = 0; k < b; ++k) {
    const Eigen::Quaterniond q(Eigen::AngleAxisd(pitch[static_cast<std::size_t>(k)], Eigen::Vector3d::UnitY()));
    frame.push_back(BodyPose::spatial(centers[static_cast<std::size_t>(k)] - middle, q));
  }
  // Feet of the hips (and by symmetry the shoulders) go to the ground plane.
  const Eigen::Vector3d foot_local(0.0, prm.half_height, -prm.leg_length);
  const double foot_z = (frame.front().rotation * foot_local + frame.front().translation).z();
  for (auto& pose : frame) pose.translation(2) -= foot_z;
  return frame;
}

struct QuadrupedSweep {
  double extension = -0.4;  // arch at t = 0
  double flexion = 0.4;     // arch at t = T-1
};

/// Arch varies linearly with t; every frame is rebuilt so the feet stay on
/// the ground.
inline Trajectory quadruped_trajectory(const QuadrupedParams& prm, const QuadrupedSweep& sweep, int T) {
  require(T >= 1, ErrorCode::DimensionMismatch, "trajectory needs at least one pose");
  Trajectory traj;
  for (int t = 0; t < T; ++t) {
    const double s = T == 1 ? 0.0 : static_cast<double>(t) / (T - 1);
    traj.frames.push_back(quadruped_frame(prm, (1.0 - s) * sweep.extension + s * sweep.flexion));
  }
  return traj;
}

}  // namespace invstat
