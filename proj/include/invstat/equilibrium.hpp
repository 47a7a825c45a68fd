#pragma once

// Compound static equilibrium: per-body force and moment balance of the cable
// network, A_b q_s = p_b, with optional anchor-node removal and a pre-solve
// for reactions at pinned nodes.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "invstat/core.hpp"
#include "invstat/topology.hpp"

namespace invstat {

inline constexpr double kStandardGravity = 9.81;

/// Nodal positions for one pose, one row per node, one column per axis.
struct Coordinates {
  Mat positions;

  int node_count() const { return static_cast<int>(positions.rows()); }
  int dimension() const { return static_cast<int>(positions.cols()); }
  Vec axis(int a) const { return positions.col(a); }
};

/// External nodal forces stacked by axis: [p_x; p_y; (p_z)].
struct LoadVector {
  Vec values;
  int dimension = 3;

  static LoadVector zero(int node_count, int dimension) {
    return {Vec::Zero(node_count * dimension), dimension};
  }
  int node_count() const { return static_cast<int>(values.size()) / dimension; }
  double& at(int node, int axis) { return values(axis * node_count() + node); }
  double at(int node, int axis) const { return values(axis * node_count() + node); }
};

/// Boolean marker over nodes. Used for anchors (marked = removed from the
/// balance) and for pinned supports (marked = reaction may act there).
struct NodeMask {
  std::vector<bool> marked;

  static NodeMask none(int node_count) { return {std::vector<bool>(static_cast<std::size_t>(node_count), false)}; }
  static NodeMask of(int node_count, const std::vector<int>& nodes) {
    NodeMask mask = none(node_count);
    for (int i : nodes) {
      require(i >= 0 && i < node_count, ErrorCode::DimensionMismatch,
              "node " + std::to_string(i + 1) + " out of range", i);
      mask.marked[static_cast<std::size_t>(i)] = true;
    }
    return mask;
  }
  bool operator[](int i) const { return marked[static_cast<std::size_t>(i)]; }
  int size() const { return static_cast<int>(marked.size()); }
  int count() const {
    int c = 0;
    for (bool b : marked) c += b ? 1 : 0;
    return c;
  }
  std::vector<int> indices() const {
    std::vector<int> out;
    for (int i = 0; i < size(); ++i) {
      if (marked[static_cast<std::size_t>(i)]) out.push_back(i);
    }
    return out;
  }
};

using AnchorSpec = NodeMask;

/// A_b q_s = p_b. Rows: force rows (axis-major, one per included body), then
/// moment rows (3 per body in 3D, 1 in 2D).
struct CompoundConstraint {
  Mat A;
  Vec p;
  int force_rows = 0;
  int moment_rows = 0;
  std::vector<int> bodies;  // bodies that contribute rows, in row order
};

/// Number of moment components per body: 3 in space, 1 in the plane.
inline int moment_components(int dimension) { return dimension == 3 ? 3 : 1; }

/// A = [C^T diag(C x); C^T diag(C y); (C^T diag(C z))], so that A q = p is the
/// nodal force balance.
inline Mat equilibrium_matrix(const Mat& C, const Coordinates& coords) {
  require(C.cols() == coords.node_count(), ErrorCode::DimensionMismatch,
          "connectivity columns do not match node count");
  const int n = coords.node_count();
  const int d = coords.dimension();
  const Mat diffs = C * coords.positions;  // m x d, member vectors
  for (Eigen::Index i = 0; i < diffs.rows(); ++i) {
    require(diffs.row(i).norm() > 0.0, ErrorCode::ZeroLengthMember,
            "member " + std::to_string(i + 1) + " has zero length", static_cast<int>(i));
  }
  Mat A(d * n, C.rows());
  for (int a = 0; a < d; ++a) {
    A.middleRows(a * n, n) = C.transpose() * diffs.col(a).asDiagonal();
  }
  return A;
}

/// Moment-arm operator about the origin. 3D: [[0,-Z,Y],[Z,0,-X],[-Y,X,0]];
/// 2D: [-Y, X] (one moment row per node).
inline Mat moment_arm_matrix(const Coordinates& coords) {
  const int n = coords.node_count();
  const int d = coords.dimension();
  const auto X = coords.positions.col(0).asDiagonal();
  const auto Y = coords.positions.col(1).asDiagonal();
  if (d == 2) {
    Mat B = Mat::Zero(n, 2 * n);
    B.leftCols(n) = -Mat(Y);
    B.rightCols(n) = Mat(X);
    return B;
  }
  const auto Z = coords.positions.col(2).asDiagonal();
  Mat B = Mat::Zero(3 * n, 3 * n);
  B.block(0, n, n, n) = -Mat(Z);
  B.block(0, 2 * n, n, n) = Mat(Y);
  B.block(n, 0, n, n) = Mat(Z);
  B.block(n, 2 * n, n, n) = -Mat(X);
  B.block(2 * n, 0, n, n) = -Mat(Y);
  B.block(2 * n, n, n, n) = Mat(X);
  return B;
}

namespace detail {

/// W: rows of the identity for the nodes kept (mask false), axis-patterned
/// `copies` times, i.e. I_copies (x) W.
inline Mat keep_selector(const NodeMask& removed, int copies) {
  const int n = removed.size();
  std::vector<int> kept;
  for (int i = 0; i < n; ++i) {
    if (!removed[i]) kept.push_back(i);
  }
  const int v = static_cast<int>(kept.size());
  Mat W = Mat::Zero(copies * v, copies * n);
  for (int a = 0; a < copies; ++a) {
    for (int r = 0; r < v; ++r) W(a * v + r, a * n + kept[static_cast<std::size_t>(r)]) = 1.0;
  }
  return W;
}

/// Body sizes after dropping removed nodes, plus the bodies still present.
inline std::pair<std::vector<int>, std::vector<int>> reduced_partition(const Structure& st,
                                                                       const NodeMask& removed) {
  std::vector<int> eta(static_cast<std::size_t>(st.body_count()), 0);
  for (int i = 0; i < st.node_count(); ++i) {
    if (!removed[i]) ++eta[static_cast<std::size_t>(st.body_of_node[static_cast<std::size_t>(i)])];
  }
  std::vector<int> sizes;
  std::vector<int> bodies;
  for (std::size_t k = 0; k < eta.size(); ++k) {
    if (eta[k] > 0) {
      sizes.push_back(eta[k]);
      bodies.push_back(static_cast<int>(k));
    }
  }
  return {sizes, bodies};
}

inline void check_shapes(const Structure& st, const Coordinates& coords, const LoadVector& p) {
  require(coords.node_count() == st.node_count(), ErrorCode::DimensionMismatch,
          "coordinates have " + std::to_string(coords.node_count()) + " nodes, structure has " +
              std::to_string(st.node_count()));
  require(coords.dimension() == st.dimension, ErrorCode::DimensionMismatch,
          "coordinate dimension differs from structure dimension");
  require(p.dimension == st.dimension && p.values.size() == st.dimension * st.node_count(),
          ErrorCode::DimensionMismatch, "load vector size mismatch");
  require(p.values.allFinite(), ErrorCode::DimensionMismatch, "load vector has non-finite entries");
}

}  // namespace detail

/// Assembles A_f = K W_f A H, p_f = K W_f p, A_m = K W_m B A H, p_m = K W_m B p.
/// Without anchors W is the identity and K spans all bodies.
inline CompoundConstraint assemble_compound(const Structure& st, const Coordinates& coords,
                                            const LoadVector& p,
                                            const std::optional<AnchorSpec>& anchors = std::nullopt) {
  detail::check_shapes(st, coords, p);
  const int n = st.node_count();
  const int d = st.dimension;
  const int dm = moment_components(d);
  const AnchorSpec removed = anchors.value_or(AnchorSpec::none(n));
  require(removed.size() == n, ErrorCode::DimensionMismatch, "anchor mask size mismatch");

  const auto [sizes, bodies] = detail::reduced_partition(st, removed);
  require(!bodies.empty(), ErrorCode::AllNodesAnchored, "every node is anchored; no balance remains");

  const Mat C = connectivity_matrix(st);
  const Mat A = equilibrium_matrix(C, coords);
  const Mat B = moment_arm_matrix(coords);
  const Mat H = cable_selector(st.cable_count(), st.bar_count());

  const Mat Kf = compounding_matrix(sizes, d);
  const Mat Km = compounding_matrix(sizes, dm);
  const Mat Wf = detail::keep_selector(removed, d);
  const Mat Wm = detail::keep_selector(removed, dm);

  const Mat AH = A * H;
  CompoundConstraint out;
  out.bodies = bodies;
  out.force_rows = static_cast<int>(Kf.rows());
  out.moment_rows = static_cast<int>(Km.rows());
  out.A.resize(out.force_rows + out.moment_rows, st.cable_count());
  out.p.resize(out.force_rows + out.moment_rows);
  out.A.topRows(out.force_rows) = Kf * Wf * AH;
  out.A.bottomRows(out.moment_rows) = Km * Wm * B * AH;
  out.p.head(out.force_rows) = Kf * Wf * p.values;
  out.p.tail(out.moment_rows) = Km * Wm * B * p.values;
  return out;
}

/// Linear equality on one reaction component: r_axis(node) = value.
struct ReactionConstraint {
  int axis = 0;
  int node = 0;  // global 0-based node index, must be pinned
  double value = 0.0;
};

struct ReactionSolution {
  Vec reactions;                  // axis-stacked over pinned nodes, d*v
  std::vector<int> pinned_nodes;  // global indices, order of the stacking
  double residual = 0.0;          // ||G r - rhs|| / max(1, ||rhs||)

  double at(int pinned_slot, int axis) const {
    return reactions(axis * static_cast<int>(pinned_nodes.size()) + pinned_slot);
  }
};

inline constexpr double kPresolveTolerance = 1e-8;

/// Whole-structure wrench balance for support reactions at pinned nodes:
/// G = [K_v; K_v B_v], b = [K_n p_ext; K_n B_n p_ext], where K_v and K_n sum
/// over the pinned and all nodes respectively. Reactions act on the structure,
/// so they solve G r = -b together with any extra component equalities.
/// Among the solutions the minimum-norm one is returned.
inline ReactionSolution presolve_pinned_reactions(const Structure& st, const Coordinates& coords,
                                                  const LoadVector& p_ext, const NodeMask& pinned,
                                                  const std::vector<ReactionConstraint>& extra = {}) {
  detail::check_shapes(st, coords, p_ext);
  const int n = st.node_count();
  const int d = st.dimension;
  const int dm = moment_components(d);
  require(pinned.size() == n, ErrorCode::DimensionMismatch, "pinned mask size mismatch");
  const std::vector<int> nodes = pinned.indices();
  const int v = static_cast<int>(nodes.size());
  require(v >= 1, ErrorCode::DimensionMismatch, "pre-solve needs at least one pinned node");

  Coordinates pinned_coords{Mat(v, d)};
  for (int r = 0; r < v; ++r) pinned_coords.positions.row(r) = coords.positions.row(nodes[static_cast<std::size_t>(r)]);

  const std::vector<int> all{n};
  const std::vector<int> only{v};
  const Mat Kn_f = compounding_matrix(all, d);
  const Mat Kn_m = compounding_matrix(all, dm);
  const Mat Kv_f = compounding_matrix(only, d);
  const Mat Kv_m = compounding_matrix(only, dm);
  const Mat Bn = moment_arm_matrix(coords);
  const Mat Bv = moment_arm_matrix(pinned_coords);

  const int balance_rows = d + dm;
  const int rows = balance_rows + static_cast<int>(extra.size());
  Mat G = Mat::Zero(rows, d * v);
  Vec rhs = Vec::Zero(rows);
  G.topRows(d) = Kv_f;
  G.middleRows(d, dm) = Kv_m * Bv;
  rhs.head(d) = -(Kn_f * p_ext.values);
  rhs.segment(d, dm) = -(Kn_m * Bn * p_ext.values);

  for (std::size_t e = 0; e < extra.size(); ++e) {
    const ReactionConstraint& c = extra[e];
    require(c.axis >= 0 && c.axis < d, ErrorCode::DimensionMismatch, "reaction constraint axis out of range");
    const auto it = std::find(nodes.begin(), nodes.end(), c.node);
    require(it != nodes.end(), ErrorCode::DimensionMismatch,
            "reaction constraint on node " + std::to_string(c.node + 1) + " which is not pinned", c.node);
    const int slot = static_cast<int>(it - nodes.begin());
    G(balance_rows + static_cast<int>(e), c.axis * v + slot) = 1.0;
    rhs(balance_rows + static_cast<int>(e)) = c.value;
  }

  Eigen::CompleteOrthogonalDecomposition<Mat> cod(G);
  cod.setThreshold(1e-12);
  ReactionSolution out;
  out.reactions = cod.solve(rhs);
  out.pinned_nodes = nodes;
  out.residual = (G * out.reactions - rhs).norm() / std::max(1.0, rhs.norm());
  if (out.residual > kPresolveTolerance) {
    throw Error(ErrorCode::InconsistentSystem,
                "pinned reactions cannot balance the load (relative residual " +
                    std::to_string(out.residual) + ")");
  }
  return out;
}

/// Adds reactions into the load vector at their pinned nodes.
inline LoadVector insert_reactions(const LoadVector& p_ext, const Vec& r, const NodeMask& pinned) {
  const std::vector<int> nodes = pinned.indices();
  const int v = static_cast<int>(nodes.size());
  require(pinned.size() == p_ext.node_count() && r.size() == p_ext.dimension * v,
          ErrorCode::DimensionMismatch, "reaction vector does not match pinned set");
  LoadVector p = p_ext;
  for (int a = 0; a < p.dimension; ++a) {
    for (int k = 0; k < v; ++k) p.at(nodes[static_cast<std::size_t>(k)], a) += r(a * v + k);
  }
  return p;
}

/// Nodal weights on the vertical axis (y in 2D, z in 3D).
inline LoadVector gravity_load(const Structure& st, double g = kStandardGravity) {
  require(g >= 0.0, ErrorCode::DimensionMismatch, "gravity must be non-negative");
  LoadVector p = LoadVector::zero(st.node_count(), st.dimension);
  const int vertical = st.dimension - 1;
  for (int i = 0; i < st.node_count(); ++i) p.at(i, vertical) = -st.node_masses[static_cast<std::size_t>(i)] * g;
  return p;
}

}  // namespace invstat
