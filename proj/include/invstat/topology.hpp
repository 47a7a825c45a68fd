#pragma once

// Structure graph of a compound tensegrity and the combinatorial matrices
// built from it: connectivity C, compounding K and cable selector H.

#include <algorithm>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "invstat/core.hpp"

namespace invstat {

enum class MemberKind { Cable, Bar };

struct Member {
  MemberKind kind = MemberKind::Cable;
  int from = 0;  // 0-based, from < to
  int to = 0;

  bool operator==(const Member&) const = default;
};

/// Builds a member with its endpoints in canonical (ascending) order.
inline Member make_member(MemberKind kind, int a, int b) {
  return Member{kind, std::min(a, b), std::max(a, b)};
}

/// Nodes are grouped into rigid bodies; body k owns a contiguous index range.
/// Members are stored cables first, then bars.
struct Structure {
  int dimension = 3;
  std::vector<int> body_of_node;
  std::vector<Member> members;
  std::vector<double> spring_constants;  // one per cable, N/m
  std::vector<double> node_masses;       // one per node, kg

  int node_count() const { return static_cast<int>(body_of_node.size()); }
  int member_count() const { return static_cast<int>(members.size()); }

  int cable_count() const {
    return static_cast<int>(std::count_if(members.begin(), members.end(), [](const Member& m) {
      return m.kind == MemberKind::Cable;
    }));
  }
  int bar_count() const { return member_count() - cable_count(); }

  int body_count() const {
    if (body_of_node.empty()) return 0;
    return *std::max_element(body_of_node.begin(), body_of_node.end()) + 1;
  }

  std::vector<int> nodes_per_body() const {
    std::vector<int> eta(static_cast<std::size_t>(body_count()), 0);
    for (int b : body_of_node) {
      if (b >= 0) ++eta[static_cast<std::size_t>(b)];
    }
    return eta;
  }

  double total_mass() const {
    double total = 0.0;
    for (double m : node_masses) total += m;
    return total;
  }
};

/// Assigns consecutive node ranges to bodies from a list of body sizes.
inline std::vector<int> partition_from_sizes(std::span<const int> nodes_per_body) {
  std::vector<int> body_of_node;
  for (std::size_t k = 0; k < nodes_per_body.size(); ++k) {
    for (int i = 0; i < nodes_per_body[k]; ++i) body_of_node.push_back(static_cast<int>(k));
  }
  return body_of_node;
}

struct Violation {
  std::string rule;
  std::string detail;
};

using ValidationReport = std::vector<Violation>;

inline ValidationReport validate_structure(const Structure& st) {
  ValidationReport report;
  auto add = [&report](std::string rule, std::string detail) {
    report.push_back({std::move(rule), std::move(detail)});
  };

  const int n = st.node_count();
  if (st.dimension != 2 && st.dimension != 3) {
    add("dimension", "dimension must be 2 or 3, got " + std::to_string(st.dimension));
  }
  if (n == 0) add("empty", "structure has no nodes");

  // Bodies: labels start at 0, never decrease and never skip.
  for (int i = 0; i < n; ++i) {
    const int b = st.body_of_node[static_cast<std::size_t>(i)];
    const int prev = i == 0 ? 0 : st.body_of_node[static_cast<std::size_t>(i - 1)];
    const bool ok = i == 0 ? b == 0 : (b == prev || b == prev + 1);
    if (!ok) {
      add("non-contiguous bodies", "node " + std::to_string(i + 1) + " assigned to body " +
                                       std::to_string(b + 1) + " breaks the contiguous ordering");
    }
  }

  bool seen_bar = false;
  for (int a = 0; a < st.member_count(); ++a) {
    const Member& m = st.members[static_cast<std::size_t>(a)];
    const std::string tag = "member " + std::to_string(a + 1);
    if (m.kind == MemberKind::Bar) seen_bar = true;
    if (m.kind == MemberKind::Cable && seen_bar) {
      add("member ordering", tag + " is a cable listed after a bar");
    }
    if (m.from < 0 || m.to < 0 || m.from >= n || m.to >= n) {
      add("index", tag + " references a node outside 1.." + std::to_string(n));
      continue;
    }
    if (m.from == m.to) {
      add("index", tag + " connects a node to itself");
      continue;
    }
    if (m.from > m.to) add("index", tag + " endpoints are not in ascending order");
    const int bj = st.body_of_node[static_cast<std::size_t>(m.from)];
    const int bk = st.body_of_node[static_cast<std::size_t>(m.to)];
    if (m.kind == MemberKind::Bar && bj != bk) add("bar spans bodies", tag);
    if (m.kind == MemberKind::Cable && bj == bk) add("cable within body", tag);
  }

  const int s = st.cable_count();
  if (static_cast<int>(st.spring_constants.size()) != s) {
    add("stiffness count", "expected " + std::to_string(s) + " spring constants, got " +
                               std::to_string(st.spring_constants.size()));
  }
  for (std::size_t i = 0; i < st.spring_constants.size(); ++i) {
    if (!(st.spring_constants[i] > 0.0)) {
      add("non-positive stiffness", "cable " + std::to_string(i + 1));
    }
  }
  if (static_cast<int>(st.node_masses.size()) != n) {
    add("mass count", "expected " + std::to_string(n) + " node masses, got " +
                          std::to_string(st.node_masses.size()));
  }
  for (std::size_t i = 0; i < st.node_masses.size(); ++i) {
    if (!(st.node_masses[i] >= 0.0)) add("negative mass", "node " + std::to_string(i + 1));
  }
  return report;
}

inline void require_valid(const Structure& st) {
  const auto report = validate_structure(st);
  if (!report.empty()) {
    throw Error(ErrorCode::InvalidStructure, report.front().rule + " (" + report.front().detail + ")");
  }
}

/// C (m x n): +1 at the lower endpoint, -1 at the higher one.
inline Mat connectivity_matrix(const Structure& st) {
  Mat C = Mat::Zero(st.member_count(), st.node_count());
  for (int a = 0; a < st.member_count(); ++a) {
    const Member& m = st.members[static_cast<std::size_t>(a)];
    C(a, m.from) = 1.0;
    C(a, m.to) = -1.0;
  }
  return C;
}

/// Block-diagonal row of ones per body: K~ (b x n).
inline Mat body_summation_matrix(std::span<const int> nodes_per_body) {
  int n = 0;
  for (int eta : nodes_per_body) n += eta;
  Mat Kt = Mat::Zero(static_cast<Eigen::Index>(nodes_per_body.size()), n);
  int col = 0;
  for (std::size_t k = 0; k < nodes_per_body.size(); ++k) {
    for (int i = 0; i < nodes_per_body[k]; ++i) Kt(static_cast<Eigen::Index>(k), col++) = 1.0;
  }
  return Kt;
}

/// K = I_d (x) K~, acting on axis-stacked nodal vectors [v_x; v_y; (v_z)].
inline Mat compounding_matrix(std::span<const int> nodes_per_body, int dimension) {
  const Mat Kt = body_summation_matrix(nodes_per_body);
  Mat K = Mat::Zero(dimension * Kt.rows(), dimension * Kt.cols());
  for (int a = 0; a < dimension; ++a) K.block(a * Kt.rows(), a * Kt.cols(), Kt.rows(), Kt.cols()) = Kt;
  return K;
}

inline Mat compounding_matrix(const Structure& st) {
  const auto eta = st.nodes_per_body();
  return compounding_matrix(eta, st.dimension);
}

/// H = [I_s; 0_{r x s}].
inline Mat cable_selector(int s, int r) {
  Mat H = Mat::Zero(s + r, s);
  H.topRows(s).setIdentity();
  return H;
}

}  // namespace invstat
