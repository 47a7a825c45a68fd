#pragma once

// Test-only helpers: random generators and a brute-force QP reference that
// shares no code with the active-set solver.

#include <algorithm>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "invstat/invstat.hpp"

namespace invstat::testing {

/// Exhaustive reference for min q^T R q s.t. A q = b, S q <= v: solve the
/// KKT system for every subset of inequalities held tight and keep the best
/// feasible point. Exponential, fine for a handful of rows.
struct EnumerationResult {
  bool feasible = false;
  Vec q;
  double objective = std::numeric_limits<double>::infinity();
};

inline EnumerationResult enumerate_active_sets(const Mat& R, const Mat& A, const Vec& b, const Mat& S,
                                               const Vec& v, double feas = 1e-9) {
  const Eigen::Index s = R.rows();
  const Eigen::Index me = A.rows();
  const Eigen::Index mi = S.rows();
  EnumerationResult best;
  for (unsigned mask = 0; mask < (1u << mi); ++mask) {
    std::vector<Eigen::Index> tight;
    for (Eigen::Index i = 0; i < mi; ++i) {
      if (mask & (1u << i)) tight.push_back(i);
    }
    const Eigen::Index k = me + static_cast<Eigen::Index>(tight.size());
    Mat M(k, s);
    Vec rhs(k);
    M.topRows(me) = A;
    rhs.head(me) = b;
    for (std::size_t j = 0; j < tight.size(); ++j) {
      M.row(me + static_cast<Eigen::Index>(j)) = S.row(tight[j]);
      rhs(me + static_cast<Eigen::Index>(j)) = v(tight[j]);
    }
    Mat K = Mat::Zero(s + k, s + k);
    K.topLeftCorner(s, s) = 2.0 * R;
    K.topRightCorner(s, k) = M.transpose();
    K.bottomLeftCorner(k, s) = M;
    Vec f = Vec::Zero(s + k);
    f.tail(k) = rhs;
    const Vec sol = K.completeOrthogonalDecomposition().solve(f);
    const Vec q = sol.head(s);
    if ((K * sol - f).norm() > 1e-9 * (1.0 + f.norm())) continue;
    if (me > 0 && (A * q - b).lpNorm<Eigen::Infinity>() > feas) continue;
    if (mi > 0 && (S * q - v).maxCoeff() > feas) continue;
    const double obj = q.dot(R * q);
    if (obj < best.objective) {
      best.feasible = true;
      best.q = q;
      best.objective = obj;
    }
  }
  return best;
}

/// Small feasible QP: box bounds lo <= q <= hi as S q <= v, one equality
/// through a random interior point, and a diagonal or dense PD weight.
inline QpProblem random_box_qp(std::mt19937& rng, bool dense_weight = false) {
  std::uniform_int_distribution<int> size(1, 4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> pos(0.2, 3.0);
  const int s = size(rng);
  QpProblem pb;
  if (dense_weight) {
    Mat G(s, s);
    for (auto& x : G.reshaped()) x = u(rng);
    pb.R = G * G.transpose() + 0.5 * Mat::Identity(s, s);
  } else {
    pb.R = Mat::Zero(s, s);
    for (int i = 0; i < s; ++i) pb.R(i, i) = pos(rng);
  }
  Vec lo(s), hi(s), x0(s);
  for (int i = 0; i < s; ++i) {
    lo(i) = u(rng) + 0.3;  // often excludes 0 so bounds bind
    hi(i) = lo(i) + pos(rng);
    x0(i) = lo(i) + (hi(i) - lo(i)) * (0.5 + 0.4 * u(rng));
  }
  pb.S.resize(2 * s, s);
  pb.S << Mat::Identity(s, s), -Mat::Identity(s, s);
  pb.v.resize(2 * s);
  pb.v << hi, -lo;
  Vec a(s);
  for (int i = 0; i < s; ++i) a(i) = u(rng);
  pb.A_eq = a.transpose();
  pb.b_eq = Vec::Constant(1, a.dot(x0));
  return pb;
}

struct RandomScene {
  Structure structure;
  Coordinates coords;
};

/// Random valid structure with up to 12 nodes in up to 3 bodies. Each body is
/// a star of bars from its first node; cables join random node pairs of
/// different bodies.
inline RandomScene random_scene(std::mt19937& rng, int dimension, int min_bodies = 1) {
  std::uniform_int_distribution<int> bodies_d(min_bodies, 3);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  std::uniform_real_distribution<double> mass(0.0, 0.5);
  const int b = bodies_d(rng);
  std::uniform_int_distribution<int> eta_d(1, 12 / b);
  std::vector<int> eta;
  for (int k = 0; k < b; ++k) eta.push_back(eta_d(rng));

  RandomScene sc;
  Structure& st = sc.structure;
  st.dimension = dimension;
  st.body_of_node = partition_from_sizes(eta);
  const int n = st.node_count();

  if (b > 1) {
    std::uniform_int_distribution<int> cables_d(1, 3 * n);
    std::uniform_int_distribution<int> node_d(0, n - 1);
    const int want = cables_d(rng);
    for (int c = 0, tries = 0; c < want && tries < 1000; ++tries) {
      const int i = node_d(rng);
      const int j = node_d(rng);
      if (st.body_of_node[static_cast<std::size_t>(i)] == st.body_of_node[static_cast<std::size_t>(j)]) continue;
      st.members.push_back(make_member(MemberKind::Cable, i, j));
      ++c;
    }
  }
  int first = 0;
  for (int k = 0; k < b; ++k) {
    for (int i = 1; i < eta[static_cast<std::size_t>(k)]; ++i) {
      st.members.push_back(make_member(MemberKind::Bar, first, first + i));
    }
    first += eta[static_cast<std::size_t>(k)];
  }
  std::uniform_real_distribution<double> kappa(100.0, 1000.0);
  for (int c = 0; c < st.cable_count(); ++c) st.spring_constants.push_back(kappa(rng));
  for (int i = 0; i < n; ++i) st.node_masses.push_back(mass(rng));

  sc.coords.positions.resize(n, dimension);
  for (auto& x : sc.coords.positions.reshaped()) x = coord(rng);
  return sc;
}

/// Largest difference between the loop oracle's per-body wrench and the
/// assembled residual p_b - A_b q, row by row.
inline double oracle_assembly_gap(const Structure& st, const Coordinates& x, const LoadVector& p, const Vec& q,
                                  const std::optional<NodeMask>& anchors = std::nullopt) {
  const CompoundConstraint cc = assemble_compound(st, x, p, anchors);
  const Vec assembled = cc.p - cc.A * q;
  const WrenchReport w = body_wrench_residuals(st, x, p, q, anchors);
  const Eigen::Index nb = static_cast<Eigen::Index>(cc.bodies.size());
  if (static_cast<Eigen::Index>(w.bodies.size()) != nb) return std::numeric_limits<double>::infinity();
  const int d = st.dimension;
  double gap = 0.0;
  for (Eigen::Index k = 0; k < nb; ++k) {
    const BodyWrench& bw = w.bodies[static_cast<std::size_t>(k)];
    if (bw.body != cc.bodies[static_cast<std::size_t>(k)]) return std::numeric_limits<double>::infinity();
    for (int a = 0; a < d; ++a) gap = std::max(gap, std::abs(assembled(a * nb + k) - bw.force[static_cast<std::size_t>(a)]));
    if (d == 2) {
      gap = std::max(gap, std::abs(assembled(cc.force_rows + k) - bw.moment[2]));
    } else {
      for (int a = 0; a < 3; ++a) {
        gap = std::max(gap, std::abs(assembled(cc.force_rows + a * nb + k) - bw.moment[static_cast<std::size_t>(a)]));
      }
    }
  }
  return gap;
}

/// Compound QP of one pose under gravity with lower bounds only.
inline QpProblem pose_qp(const Structure& st, const Coordinates& x, const std::optional<NodeMask>& anchors,
                         double min_density) {
  const CompoundConstraint cc = assemble_compound(st, x, gravity_load(st), anchors);
  const Vec kappa = stiffness_vector(st);
  const Vec lengths = cable_lengths(st, x);
  const InequalitySet ineq =
      build_inequality(kappa, lengths, TensionBounds::uniform(min_density, st.cable_count(), std::nullopt));
  return {build_objective(kappa, lengths), cc.A, cc.p, ineq.S, ineq.v, {}};
}

/// Largest change of the optimum when every lower bound that is slack at the
/// optimum is moved to another value it still does not reach (lower, or up to
/// halfway towards the optimal density). Infinity if a solve fails.
inline double inactive_bound_shift(const QpProblem& pb, const Vec& q_opt, double slack_tol = 1e-6) {
  const Vec slack = pb.v - pb.S * q_opt;
  std::vector<Eigen::Index> inactive;
  for (Eigen::Index i = 0; i < slack.size(); ++i) {
    if (slack(i) > slack_tol) inactive.push_back(i);
  }
  double worst = 0.0;
  for (double where : {0.0, 0.2, 0.5}) {
    QpProblem moved = pb;
    for (Eigen::Index i : inactive) {
      // Row i reads -q_i <= -c: place the new c between 0 and q_i.
      const double c_old = -pb.v(i);
      const double q_i = -pb.S.row(i).dot(q_opt);
      moved.v(i) = -(where == 0.0 ? 0.02 * c_old : c_old + where * (q_i - c_old));
    }
    const QpSolution sol = solve_qp(moved);
    if (sol.status != QpStatus::Optimal) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, (sol.q - q_opt).lpNorm<Eigen::Infinity>());
  }
  return worst;
}

inline Vec random_vector(std::mt19937& rng, Eigen::Index size, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vec x(size);
  for (auto& e : x) e = u(rng);
  return x;
}

}  // namespace invstat::testing
