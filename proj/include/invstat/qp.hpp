#pragma once

// Dense strictly convex QP
//
//   minimize  q^T R q   subject to  A_eq q = b_eq,  S q <= v
//
// solved with a primal active-set method. Equalities are eliminated through a
// nullspace basis of the working set; a feasible start comes from a phase-1
// problem on the same machinery with one shared slack on the inequalities.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "invstat/core.hpp"

namespace invstat {

struct QpConfig {
  double feas_tol = 1e-8;
  double opt_tol = 1e-8;
  int max_iter = 200;
};

struct QpProblem {
  Mat R;
  Mat A_eq;
  Vec b_eq;
  Mat S;
  Vec v;
  QpConfig config;
};

enum class QpStatus { Optimal, Infeasible, IterLimit };

inline std::string_view to_string(QpStatus s) {
  switch (s) {
    case QpStatus::Optimal: return "Optimal";
    case QpStatus::Infeasible: return "Infeasible";
    case QpStatus::IterLimit: return "IterLimit";
  }
  return "Unknown";
}

/// First-order optimality certificate. Raw residuals; `scale` is
/// max(1, ||b_eq||_inf, ||v||_inf) and `within` compares against tol * scale.
struct KktResiduals {
  double stationarity = 0.0;
  double primal_eq = 0.0;
  double primal_ineq = 0.0;
  double complementarity = 0.0;
  double scale = 1.0;

  double worst() const { return std::max({stationarity, primal_eq, primal_ineq, complementarity}); }
  bool within(double tol) const { return worst() <= tol * scale; }
};

struct QpSolution {
  Vec q;
  QpStatus status = QpStatus::Infeasible;
  double objective = 0.0;
  KktResiduals kkt;
  std::vector<int> active_set;  // rows of S that are tight
  int iterations = 0;
};

namespace detail {

inline double problem_scale(const QpProblem& pb) {
  double s = 1.0;
  if (pb.b_eq.size() > 0) s = std::max(s, pb.b_eq.lpNorm<Eigen::Infinity>());
  if (pb.v.size() > 0) s = std::max(s, pb.v.lpNorm<Eigen::Infinity>());
  return s;
}

inline Mat stack_rows(const Mat& E, const Mat& C, const std::vector<int>& rows) {
  Mat M(E.rows() + static_cast<Eigen::Index>(rows.size()), E.cols());
  M.topRows(E.rows()) = E;
  for (std::size_t i = 0; i < rows.size(); ++i) M.row(E.rows() + static_cast<Eigen::Index>(i)) = C.row(rows[i]);
  return M;
}

/// Orthonormal basis of {p : M p = 0}; M must have full row rank.
inline Mat nullspace_basis(const Mat& M, Eigen::Index n) {
  if (M.rows() == 0) return Mat::Identity(n, n);
  Eigen::HouseholderQR<Mat> qr(M.transpose());
  const Mat Q = qr.householderQ();
  return Q.rightCols(n - M.rows());
}

/// Rows of M (by index) forming a maximal linearly independent subset.
inline std::vector<int> independent_rows(const Mat& M, double threshold = 1e-10) {
  std::vector<int> rows;
  if (M.rows() == 0) return rows;
  Eigen::ColPivHouseholderQR<Mat> qr(M.transpose());
  qr.setThreshold(threshold);
  const auto rank = qr.rank();
  for (Eigen::Index i = 0; i < rank; ++i) rows.push_back(qr.colsPermutation().indices()(i));
  std::sort(rows.begin(), rows.end());
  return rows;
}

inline bool has_full_row_rank(const Mat& M) {
  if (M.rows() == 0) return true;
  if (M.rows() > M.cols()) return false;
  Eigen::ColPivHouseholderQR<Mat> qr(M.transpose());
  qr.setThreshold(1e-10);
  return qr.rank() == M.rows();
}

struct ActiveSetRun {
  Vec z;
  std::vector<int> working;
  int iterations = 0;
  bool converged = false;
  bool unbounded = false;
};

/// Primal active-set iterations for min 1/2 z^T G z + g^T z with E z = e kept
/// active and C z <= d. `z` must be feasible and `working` a subset of its
/// active constraints, independent together with E. G may be singular as long
/// as the objective is bounded below; zero-curvature directions are followed
/// to the nearest blocking constraint. `stop` ends the run early.
inline ActiveSetRun primal_active_set(const Mat& G, const Vec& g, const Mat& E, const Mat& C, const Vec& d,
                                      Vec z, std::vector<int> working, int max_iter,
                                      const std::function<bool(const Vec&)>& stop = {}) {
  ActiveSetRun run;
  const Eigen::Index n = z.size();
  std::vector<bool> in_working(static_cast<std::size_t>(C.rows()), false);
  for (int i : working) in_working[static_cast<std::size_t>(i)] = true;

  for (run.iterations = 0; run.iterations < max_iter; ++run.iterations) {
    if (stop && stop(z)) {
      run.converged = true;
      break;
    }
    const Mat M = stack_rows(E, C, working);
    const Vec grad = G * z + g;
    const Mat Z = nullspace_basis(M, n);

    Vec p = Vec::Zero(n);
    bool ray = false;
    if (Z.cols() > 0) {
      const Mat Hr = Z.transpose() * G * Z;
      const Vec rhs = -(Z.transpose() * grad);
      Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (Hr + Hr.transpose()));
      const Vec& lam = eig.eigenvalues();
      const Mat& V = eig.eigenvectors();
      const double flat = 1e-12 * std::max(1.0, lam.cwiseAbs().maxCoeff());
      Vec y = Vec::Zero(Z.cols());
      Vec downhill = Vec::Zero(Z.cols());
      for (Eigen::Index j = 0; j < lam.size(); ++j) {
        const double c = V.col(j).dot(rhs);
        if (lam(j) > flat) {
          y += (c / lam(j)) * V.col(j);
        } else {
          downhill += c * V.col(j);
        }
      }
      if (downhill.norm() > 1e-10 * (1.0 + rhs.norm())) {
        p = Z * downhill;
        ray = true;
      } else {
        p = Z * y;
      }
    }

    const double pnorm = p.lpNorm<Eigen::Infinity>();
    if (!ray && pnorm <= 1e-11 * (1.0 + z.lpNorm<Eigen::Infinity>())) {
      if (working.empty()) {
        run.converged = true;
        break;
      }
      Eigen::CompleteOrthogonalDecomposition<Mat> cod(M.transpose());
      const Vec lambda = cod.solve(-grad);
      const double mult_tol = 1e-10 * std::max(1.0, grad.lpNorm<Eigen::Infinity>());
      int drop = -1;
      double most_negative = -mult_tol;
      for (std::size_t w = 0; w < working.size(); ++w) {
        const double mu = lambda(E.rows() + static_cast<Eigen::Index>(w));
        if (mu < most_negative) {
          most_negative = mu;
          drop = static_cast<int>(w);
        }
      }
      if (drop < 0) {
        run.converged = true;
        break;
      }
      in_working[static_cast<std::size_t>(working[static_cast<std::size_t>(drop)])] = false;
      working.erase(working.begin() + drop);
      continue;
    }

    double alpha = ray ? std::numeric_limits<double>::infinity() : 1.0;
    int block = -1;
    for (Eigen::Index i = 0; i < C.rows(); ++i) {
      if (in_working[static_cast<std::size_t>(i)]) continue;
      const double cp = C.row(i).dot(p);
      if (cp <= 1e-12 * C.row(i).norm() * pnorm) continue;
      const double step = std::max(0.0, d(i) - C.row(i).dot(z)) / cp;
      if (step < alpha) {
        alpha = step;
        block = static_cast<int>(i);
      }
    }
    if (block < 0 && ray) {
      run.unbounded = true;
      break;
    }
    z += alpha * p;
    if (block >= 0) {
      working.push_back(block);
      in_working[static_cast<std::size_t>(block)] = true;
    }
  }
  run.z = std::move(z);
  run.working = std::move(working);
  return run;
}

/// Minimizer of 1/2 z^T G z subject to M z = rhs, G positive definite and M of
/// full row rank.
inline Vec solve_equality_qp(const Mat& G, const Mat& M, const Vec& rhs) {
  const Eigen::Index n = G.rows();
  Vec z0 = Vec::Zero(n);
  if (M.rows() > 0) {
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(M);
    z0 = cod.solve(rhs);
  }
  const Mat Z = nullspace_basis(M, n);
  if (Z.cols() == 0) return z0;
  const Mat Hr = Z.transpose() * G * Z;
  const Vec y = Hr.ldlt().solve(-(Z.transpose() * (G * z0)));
  return z0 + Z * y;
}

}  // namespace detail

/// Optimality residuals of a candidate point. Multipliers come from a
/// least-squares fit of 2 R q + A^T lambda + S_act^T mu = 0 over the
/// constraints within feas_tol of being tight, with mu clipped at zero.
inline KktResiduals kkt_residuals(const QpProblem& pb, const Vec& q) {
  KktResiduals out;
  out.scale = detail::problem_scale(pb);
  const double feas = pb.config.feas_tol * out.scale;
  const Vec grad = 2.0 * pb.R * q;

  Vec slack = Vec::Zero(pb.S.rows());
  if (pb.S.rows() > 0) slack = pb.S * q - pb.v;
  std::vector<int> near;
  for (Eigen::Index i = 0; i < slack.size(); ++i) {
    if (slack(i) >= -feas) near.push_back(static_cast<int>(i));
  }

  const Mat M = detail::stack_rows(pb.A_eq, pb.S, near);
  Vec mult = Vec::Zero(M.rows());
  if (M.rows() > 0) {
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(M.transpose());
    mult = cod.solve(-grad);
  }
  Vec mu = mult.tail(static_cast<Eigen::Index>(near.size())).cwiseMax(0.0);
  mult.tail(static_cast<Eigen::Index>(near.size())) = mu;

  out.stationarity = (grad + M.transpose() * mult).lpNorm<Eigen::Infinity>();
  if (pb.A_eq.rows() > 0) out.primal_eq = (pb.A_eq * q - pb.b_eq).lpNorm<Eigen::Infinity>();
  if (slack.size() > 0) out.primal_ineq = std::max(0.0, slack.maxCoeff());
  for (std::size_t k = 0; k < near.size(); ++k) {
    out.complementarity = std::max(out.complementarity, std::abs(mu(static_cast<Eigen::Index>(k)) * slack(near[k])));
  }
  return out;
}

/// Solves the QP. `warm_active` lists rows of S expected to be tight (for
/// example from the previous pose of a trajectory); a wrong guess only costs
/// a cold start.
inline QpSolution solve_qp(const QpProblem& pb, std::span<const int> warm_active = {}) {
  const Eigen::Index s = pb.R.rows();
  require(pb.R.cols() == s, ErrorCode::DimensionMismatch, "objective matrix must be square");
  require(pb.A_eq.cols() == s && pb.A_eq.rows() == pb.b_eq.size(), ErrorCode::DimensionMismatch,
          "equality constraint dimensions");
  require(pb.S.cols() == s && pb.S.rows() == pb.v.size(), ErrorCode::DimensionMismatch,
          "inequality constraint dimensions");
  if (s > 0) {
    require(pb.R.llt().info() == Eigen::Success, ErrorCode::DimensionMismatch,
            "objective matrix must be positive definite");
  }

  const QpConfig& cfg = pb.config;
  const double scale = detail::problem_scale(pb);
  const double feas = cfg.feas_tol * scale;
  const Mat G = 2.0 * pb.R;

  QpSolution out;
  auto finish = [&](const Vec& q, QpStatus status, int iterations) {
    out.q = q;
    out.status = status;
    out.iterations = iterations;
    out.objective = q.dot(pb.R * q);
    out.kkt = kkt_residuals(pb, q);
    out.active_set.clear();
    for (Eigen::Index i = 0; i < pb.S.rows(); ++i) {
      if (pb.S.row(i).dot(q) - pb.v(i) >= -feas) out.active_set.push_back(static_cast<int>(i));
    }
    return out;
  };

  // Redundant equality rows are dropped; inconsistent ones make the problem
  // infeasible.
  const std::vector<int> eq_rows = detail::independent_rows(pb.A_eq);
  Mat E(static_cast<Eigen::Index>(eq_rows.size()), s);
  Vec e(static_cast<Eigen::Index>(eq_rows.size()));
  for (std::size_t i = 0; i < eq_rows.size(); ++i) {
    E.row(static_cast<Eigen::Index>(i)) = pb.A_eq.row(eq_rows[i]);
    e(static_cast<Eigen::Index>(i)) = pb.b_eq(eq_rows[i]);
  }
  Vec q0 = Vec::Zero(s);
  if (E.rows() > 0) q0 = Eigen::CompleteOrthogonalDecomposition<Mat>(E).solve(e);
  if (pb.A_eq.rows() > 0 && (pb.A_eq * q0 - pb.b_eq).lpNorm<Eigen::Infinity>() > feas) {
    return finish(q0, QpStatus::Infeasible, 0);
  }

  const Vec zero_g = Vec::Zero(s);
  auto max_violation = [&](const Vec& q) {
    return pb.S.rows() == 0 ? 0.0 : (pb.S * q - pb.v).maxCoeff();
  };

  Vec start;
  std::vector<int> working;
  int iterations = 0;

  if (!warm_active.empty()) {
    std::vector<int> guess;
    for (int i : warm_active) {
      if (i < 0 || i >= pb.S.rows()) continue;
      guess.push_back(i);
      if (!detail::has_full_row_rank(detail::stack_rows(E, pb.S, guess))) guess.pop_back();
    }
    const Mat M = detail::stack_rows(E, pb.S, guess);
    Vec rhs(M.rows());
    rhs.head(E.rows()) = e;
    for (std::size_t k = 0; k < guess.size(); ++k) rhs(E.rows() + static_cast<Eigen::Index>(k)) = pb.v(guess[k]);
    const Vec q = detail::solve_equality_qp(G, M, rhs);
    if (max_violation(q) <= feas && (E.rows() == 0 || (E * q - e).lpNorm<Eigen::Infinity>() <= feas)) {
      start = q;
      working = guess;
    }
  }

  if (start.size() == 0) {
    if (max_violation(q0) <= feas) {
      start = q0;
    } else {
      // Phase 1: minimize 1/2 sigma^2 over (q, sigma) with S q - sigma <= v,
      // sigma >= 0 and the equalities.
      const Eigen::Index m = pb.S.rows();
      Mat G1 = Mat::Zero(s + 1, s + 1);
      G1(s, s) = 1.0;
      const Vec g1 = Vec::Zero(s + 1);
      Mat E1 = Mat::Zero(E.rows(), s + 1);
      E1.leftCols(s) = E;
      Mat C1 = Mat::Zero(m + 1, s + 1);
      C1.topLeftCorner(m, s) = pb.S;
      C1.col(s).setConstant(-1.0);
      Vec d1 = Vec::Zero(m + 1);
      d1.head(m) = pb.v;
      Vec z0(s + 1);
      z0.head(s) = q0;
      z0(s) = std::max(0.0, max_violation(q0));
      const auto run = detail::primal_active_set(
          G1, g1, E1, C1, d1, z0, {}, cfg.max_iter,
          [&](const Vec& z) { return max_violation(z.head(s)) <= feas; });
      iterations += run.iterations;
      const Vec qf = run.z.head(s);
      if (max_violation(qf) > feas) {
        return finish(qf, run.converged ? QpStatus::Infeasible : QpStatus::IterLimit, iterations);
      }
      start = qf;
    }
  }

  const auto run = detail::primal_active_set(G, zero_g, E, pb.S, pb.v, start, working, cfg.max_iter);
  iterations += run.iterations;
  if (!run.converged) return finish(run.z, QpStatus::IterLimit, iterations);

  // Recompute the point from the final working set in one solve; keeps the
  // accumulated step round-off out of the answer.
  Vec q = run.z;
  {
    const Mat M = detail::stack_rows(E, pb.S, run.working);
    Vec rhs(M.rows());
    rhs.head(E.rows()) = e;
    for (std::size_t k = 0; k < run.working.size(); ++k) {
      rhs(E.rows() + static_cast<Eigen::Index>(k)) = pb.v(run.working[k]);
    }
    const Vec polished = detail::solve_equality_qp(G, M, rhs);
    if (max_violation(polished) <= feas) q = polished;
  }
  return finish(q, QpStatus::Optimal, iterations);
}

}  // namespace invstat
