#pragma once

// Statics recomputed by direct summation over nodes and cables. Nothing here
// goes through the matrix assembly, so agreement with it is a real check.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "invstat/core.hpp"
#include "invstat/equilibrium.hpp"
#include "invstat/topology.hpp"

namespace invstat {

struct BodyWrench {
  int body = 0;
  std::array<double, 3> force{0.0, 0.0, 0.0};   // unused axes stay zero
  std::array<double, 3> moment{0.0, 0.0, 0.0};  // planar: only moment[2]

  double force_norm() const { return std::sqrt(force[0] * force[0] + force[1] * force[1] + force[2] * force[2]); }
  double moment_norm() const {
    return std::sqrt(moment[0] * moment[0] + moment[1] * moment[1] + moment[2] * moment[2]);
  }
};

struct WrenchReport {
  std::vector<BodyWrench> bodies;
  double max_force = 0.0;
  double max_moment = 0.0;

  double worst() const { return std::max(max_force, max_moment); }
};

/// Net force and net moment (about the origin) on each body from the external
/// loads and the cable forces q_i (other - this). Bars are internal to bodies
/// and cancel. Nodes flagged in `skip` are left out, as anchors are; bodies
/// left with no nodes are not reported.
inline WrenchReport body_wrench_residuals(const Structure& st, const Coordinates& coords, const LoadVector& p,
                                          const Vec& q_s, const std::optional<NodeMask>& skip = std::nullopt) {
  const int n = st.node_count();
  const int d = st.dimension;
  const int s = st.cable_count();
  require(coords.node_count() == n && coords.dimension() == d, ErrorCode::DimensionMismatch, "coordinates shape");
  require(p.values.size() == d * n, ErrorCode::DimensionMismatch, "load vector size");
  require(q_s.size() == s, ErrorCode::DimensionMismatch, "force density vector size");

  std::vector<std::array<double, 3>> nodal(static_cast<std::size_t>(n), {0.0, 0.0, 0.0});
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < d; ++a) nodal[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)] = p.values(a * n + i);
  }
  int cable = 0;
  for (const Member& mem : st.members) {
    if (mem.kind != MemberKind::Cable) continue;
    const double qi = q_s(cable++);
    for (int a = 0; a < d; ++a) {
      const double delta = coords.positions(mem.to, a) - coords.positions(mem.from, a);
      nodal[static_cast<std::size_t>(mem.from)][static_cast<std::size_t>(a)] += qi * delta;
      nodal[static_cast<std::size_t>(mem.to)][static_cast<std::size_t>(a)] -= qi * delta;
    }
  }

  const int b = st.body_count();
  std::vector<BodyWrench> sums(static_cast<std::size_t>(b));
  std::vector<int> members_left(static_cast<std::size_t>(b), 0);
  for (int i = 0; i < n; ++i) {
    if (skip && (*skip)[i]) continue;
    const int k = st.body_of_node[static_cast<std::size_t>(i)];
    ++members_left[static_cast<std::size_t>(k)];
    auto& w = sums[static_cast<std::size_t>(k)];
    const auto& f = nodal[static_cast<std::size_t>(i)];
    const double x = coords.positions(i, 0);
    const double y = coords.positions(i, 1);
    const double z = d == 3 ? coords.positions(i, 2) : 0.0;
    for (int a = 0; a < 3; ++a) w.force[static_cast<std::size_t>(a)] += f[static_cast<std::size_t>(a)];
    w.moment[0] += y * f[2] - z * f[1];
    w.moment[1] += z * f[0] - x * f[2];
    w.moment[2] += x * f[1] - y * f[0];
  }

  WrenchReport out;
  for (int k = 0; k < b; ++k) {
    if (members_left[static_cast<std::size_t>(k)] == 0) continue;
    BodyWrench w = sums[static_cast<std::size_t>(k)];
    w.body = k;
    out.max_force = std::max(out.max_force, w.force_norm());
    out.max_moment = std::max(out.max_moment, w.moment_norm());
    out.bodies.push_back(w);
  }
  return out;
}

/// Nodal balance A q - p, one row per node, columns per axis. q holds every
/// member, bars included.
inline Mat nodal_residual(const Mat& C, const Coordinates& coords, const Vec& q_full, const LoadVector& p) {
  const int n = coords.node_count();
  const int d = coords.dimension();
  require(C.cols() == n && q_full.size() == C.rows(), ErrorCode::DimensionMismatch, "connectivity / density sizes");
  require(p.values.size() == d * n, ErrorCode::DimensionMismatch, "load vector size");
  Mat r(n, d);
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < d; ++a) r(i, a) = -p.values(a * n + i);
  }
  for (Eigen::Index e = 0; e < C.rows(); ++e) {
    int j = -1;
    int k = -1;
    for (Eigen::Index col = 0; col < C.cols(); ++col) {
      if (C(e, col) > 0.5) j = static_cast<int>(col);
      if (C(e, col) < -0.5) k = static_cast<int>(col);
    }
    if (j < 0 || k < 0) continue;
    for (int a = 0; a < d; ++a) {
      const double delta = coords.positions(j, a) - coords.positions(k, a);
      r(j, a) += q_full(e) * delta;
      r(k, a) -= q_full(e) * delta;
    }
  }
  return r;
}

}  // namespace invstat
