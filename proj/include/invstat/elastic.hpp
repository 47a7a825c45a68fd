#pragma once

// Linear-elastic cable model F = kappa (l - u): energy weights, tension
// bounds, and conversion of force densities to tensions and rest lengths.

#include <optional>
#include <string>

#include "invstat/core.hpp"
#include "invstat/equilibrium.hpp"

namespace invstat {

/// Euclidean length of every member.
inline Vec member_lengths(const Mat& C, const Coordinates& coords) {
  return (C * coords.positions).rowwise().norm();
}

/// Per-cable lengths are the first s entries of the member lengths.
inline Vec cable_lengths(const Structure& st, const Coordinates& coords) {
  return member_lengths(connectivity_matrix(st), coords).head(st.cable_count());
}

inline Vec stiffness_vector(const Structure& st) {
  return Eigen::Map<const Vec>(st.spring_constants.data(), static_cast<Eigen::Index>(st.spring_constants.size()));
}

namespace detail {

inline void check_cable_data(const Vec& kappa, const Vec& lengths) {
  require(kappa.size() == lengths.size(), ErrorCode::DimensionMismatch,
          "stiffness and length vectors differ in size");
  for (Eigen::Index i = 0; i < kappa.size(); ++i) {
    require(kappa(i) > 0.0, ErrorCode::NonPositiveStiffness,
            "cable " + std::to_string(i + 1) + " stiffness must be positive", static_cast<int>(i));
    require(lengths(i) > 0.0, ErrorCode::NonPositiveLength,
            "cable " + std::to_string(i + 1) + " length must be positive", static_cast<int>(i));
  }
}

}  // namespace detail

/// R = Kappa^{-1} L^2, so q^T R q is twice the stored elastic energy.
inline Mat build_objective(const Vec& kappa, const Vec& lengths) {
  detail::check_cable_data(kappa, lengths);
  return (lengths.array().square() / kappa.array()).matrix().asDiagonal();
}

struct TensionBounds {
  double min_density = 0.5;             // c, N/m
  std::optional<Vec> min_rest_length;  // u_min per cable; absent drops the saturation block

  static TensionBounds uniform(double c, int cables, std::optional<double> u_min) {
    TensionBounds b;
    b.min_density = c;
    if (u_min) b.min_rest_length = Vec::Constant(cables, *u_min);
    return b;
  }
};

/// S q <= v.
struct InequalitySet {
  Mat S;
  Vec v;
  bool has_saturation = false;  // first s rows are L q <= Kappa (l - u_min)
};

/// Stacks L q <= Kappa (l - u_min) over -q <= -c. Rejects bounds whose box is
/// already empty per cable.
inline InequalitySet build_inequality(const Vec& kappa, const Vec& lengths, const TensionBounds& bounds) {
  detail::check_cable_data(kappa, lengths);
  const Eigen::Index s = kappa.size();
  require(bounds.min_density > 0.0, ErrorCode::EmptyFeasibleBox, "minimum force density must be positive");
  InequalitySet out;
  if (!bounds.min_rest_length) {
    out.S = -Mat::Identity(s, s);
    out.v = Vec::Constant(s, -bounds.min_density);
    return out;
  }
  const Vec& u_min = *bounds.min_rest_length;
  require(u_min.size() == s, ErrorCode::DimensionMismatch, "minimum rest length vector size mismatch");
  for (Eigen::Index i = 0; i < s; ++i) {
    const double upper = kappa(i) * (lengths(i) - u_min(i));
    if (bounds.min_density * lengths(i) > upper) {
      throw Error(ErrorCode::EmptyFeasibleBox,
                  "cable " + std::to_string(i + 1) + ": minimum tension " +
                      std::to_string(bounds.min_density * lengths(i)) + " N exceeds saturation tension " +
                      std::to_string(upper) + " N",
                  static_cast<int>(i));
    }
  }
  out.has_saturation = true;
  out.S.resize(2 * s, s);
  out.S.topRows(s) = lengths.asDiagonal();
  out.S.bottomRows(s) = -Mat::Identity(s, s);
  out.v.resize(2 * s);
  out.v.head(s) = (kappa.array() * (lengths - u_min).array()).matrix();
  out.v.tail(s).setConstant(-bounds.min_density);
  return out;
}

/// u = l - q l / kappa. Negative entries mean the requested tension exceeds
/// what a fully contracted cable provides.
inline Vec rest_inputs_from_solution(const Vec& q, const Vec& lengths, const Vec& kappa) {
  return (lengths.array() - q.array() * lengths.array() / kappa.array()).matrix();
}

/// 1/2 sum q^2 l^2 / kappa.
inline double potential_energy(const Vec& q, const Vec& kappa, const Vec& lengths) {
  return 0.5 * (q.array().square() * lengths.array().square() / kappa.array()).sum();
}

/// 1/2 sum kappa (l - u)^2, the same energy written in the control inputs.
inline double potential_energy_from_rest(const Vec& kappa, const Vec& lengths, const Vec& u) {
  return 0.5 * (kappa.array() * (lengths - u).array().square()).sum();
}

struct CableState {
  Vec lengths;
  Vec densities;
  Vec tensions;
  Vec rest_inputs;
  Vec stiffness;
};

inline CableState cable_state(const Vec& q, const Vec& lengths, const Vec& kappa) {
  return {lengths, q, (q.array() * lengths.array()).matrix(), rest_inputs_from_solution(q, lengths, kappa),
          kappa};
}

}  // namespace invstat
