#pragma once

// One-call inverse statics for a pose or a pose sequence: load assembly,
// optional reaction pre-solve, compound constraint, QP, and an oracle check
// of the answer.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "invstat/core.hpp"
#include "invstat/elastic.hpp"
#include "invstat/equilibrium.hpp"
#include "invstat/oracle.hpp"
#include "invstat/poses.hpp"
#include "invstat/qp.hpp"
#include "invstat/topology.hpp"

namespace invstat {

struct StaticsSetup {
  std::optional<NodeMask> anchors;
  std::optional<NodeMask> pinned;
  std::vector<ReactionConstraint> reaction_constraints;
  TensionBounds bounds;
  double gravity = kStandardGravity;
  QpConfig qp;
};

struct PoseSolution {
  QpSolution qp;
  CableState cables;
  double potential_energy = 0.0;
  double equality_residual = 0.0;  // ||A_b q - p_b||_inf
  WrenchReport oracle;
  std::optional<ReactionSolution> reactions;
  std::string note;  // why the pose has no solution, when it has none

  bool optimal() const { return qp.status == QpStatus::Optimal; }
};

/// External loads for a pose: gravity plus pre-solved reactions when a pinned
/// set is given.
inline LoadVector pose_loads(const Structure& st, const Coordinates& coords, const StaticsSetup& setup,
                             std::optional<ReactionSolution>* reactions = nullptr) {
  LoadVector p = gravity_load(st, setup.gravity);
  if (setup.pinned && setup.pinned->count() > 0) {
    ReactionSolution r = presolve_pinned_reactions(st, coords, p, *setup.pinned, setup.reaction_constraints);
    p = insert_reactions(p, r.reactions, *setup.pinned);
    if (reactions) *reactions = std::move(r);
  }
  return p;
}

inline PoseSolution solve_pose(const Structure& st, const Coordinates& coords, const StaticsSetup& setup,
                               std::span<const int> warm_active = {}) {
  require_valid(st);
  PoseSolution out;
  const LoadVector p = pose_loads(st, coords, setup, &out.reactions);
  const CompoundConstraint cc = assemble_compound(st, coords, p, setup.anchors);

  const Vec kappa = stiffness_vector(st);
  const Vec lengths = cable_lengths(st, coords);
  QpProblem pb;
  pb.R = build_objective(kappa, lengths);
  pb.A_eq = cc.A;
  pb.b_eq = cc.p;
  pb.config = setup.qp;
  try {
    const InequalitySet ineq = build_inequality(kappa, lengths, setup.bounds);
    pb.S = ineq.S;
    pb.v = ineq.v;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EmptyFeasibleBox) throw;
    out.note = e.what();
    out.qp.q = Vec::Zero(st.cable_count());
    out.qp.status = QpStatus::Infeasible;
    out.cables = cable_state(out.qp.q, lengths, kappa);
    return out;
  }

  out.qp = solve_qp(pb, warm_active);
  if (out.qp.status == QpStatus::Infeasible && out.note.empty()) out.note = "no cable tensions satisfy the balance and bounds";
  if (out.qp.status == QpStatus::IterLimit) out.note = "iteration limit reached";
  out.cables = cable_state(out.qp.q, lengths, kappa);
  out.potential_energy = potential_energy(out.qp.q, kappa, lengths);
  if (cc.A.rows() > 0) out.equality_residual = (cc.A * out.qp.q - cc.p).lpNorm<Eigen::Infinity>();
  out.oracle = body_wrench_residuals(st, coords, p, out.qp.q, setup.anchors);
  return out;
}

/// Solves the poses in order, seeding each with the active set of the last
/// optimal one.
inline std::vector<PoseSolution> solve_trajectory(const Structure& st, const LocalCoordinates& local,
                                                  const Trajectory& traj, const StaticsSetup& setup) {
  std::vector<PoseSolution> out;
  out.reserve(traj.frames.size());
  std::vector<int> warm;
  for (const Frame& frame : traj.frames) {
    const Coordinates coords = nodes_from_poses(st, local, frame);
    out.push_back(solve_pose(st, coords, setup, warm));
    if (out.back().optimal()) warm = out.back().qp.active_set;
  }
  return out;
}

}  // namespace invstat
