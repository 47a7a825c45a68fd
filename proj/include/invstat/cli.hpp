#pragma once

// Command implementations behind the invstat executable. Each returns the
// process exit code: 0 ok, 1 input error, 2 infeasible or failed check.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <regex>
#include <string>
#include <vector>

#include "invstat/io.hpp"
#include "invstat/models.hpp"
#include "invstat/oracle.hpp"
#include "invstat/statics.hpp"

namespace invstat::cli {

inline constexpr int kOk = 0;
inline constexpr int kInputError = 1;
inline constexpr int kInfeasible = 2;

struct Options {
  std::optional<double> min_density;
  std::optional<double> min_rest_length;
  bool no_saturation = false;
  std::optional<double> tol;
  std::string out_dir = ".";
  double gravity = kStandardGravity;
  unsigned seed = 0;  // only randomized generators read it; no solve does
};

inline StaticsSetup make_setup(const Model& m, const Options& opt) {
  StaticsSetup setup;
  setup.anchors = m.anchors;
  setup.pinned = m.pinned;
  setup.reaction_constraints = m.reaction_constraints;
  setup.gravity = opt.gravity;
  setup.bounds.min_density = opt.min_density.value_or(m.min_density.value_or(0.5));
  std::optional<double> u_min = opt.min_rest_length ? opt.min_rest_length : m.min_rest_length;
  if (opt.no_saturation) u_min.reset();
  if (u_min) setup.bounds.min_rest_length = Vec::Constant(m.structure.cable_count(), *u_min);
  if (opt.tol) {
    setup.qp.feas_tol = *opt.tol;
    setup.qp.opt_tol = *opt.tol;
  }
  return setup;
}

inline int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InconsistentSystem:
    case ErrorCode::EmptyFeasibleBox:
      return kInfeasible;
    default:
      return kInputError;
  }
}

/// Runs a command body, turning library errors into messages and exit codes.
template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
}

namespace detail {

inline Model load_valid_structure(const std::string& path) {
  Model m = io::read_structure(path);
  const auto report = validate_structure(m.structure);
  if (!report.empty()) {
    std::string msg = path + ": invalid structure";
    for (const auto& v : report) msg += "\n  " + v.rule + ": " + v.detail;
    throw Error(ErrorCode::InvalidStructure, msg);
  }
  return m;
}

inline std::filesystem::path prepare_out_dir(const std::string& dir) {
  std::filesystem::path p(dir);
  std::error_code ec;
  std::filesystem::create_directories(p, ec);
  if (ec) throw Error(ErrorCode::Parse, dir + ": cannot create output directory");
  return p;
}

inline io::ordered_json run_header(const std::string& command, const Model& m, const StaticsSetup& setup,
                                   const Options& opt) {
  io::ordered_json h;
  h["command"] = command;
  h["dimension"] = m.structure.dimension;
  h["nodes"] = m.structure.node_count();
  h["bodies"] = m.structure.body_count();
  h["cables"] = m.structure.cable_count();
  h["bars"] = m.structure.bar_count();
  h["min_density_N_per_m"] = setup.bounds.min_density;
  if (setup.bounds.min_rest_length) {
    h["min_rest_length_m"] = (*setup.bounds.min_rest_length)(0);
  } else {
    h["min_rest_length_m"] = nullptr;
  }
  h["gravity_m_per_s2"] = setup.gravity;
  h["tolerance"] = setup.qp.opt_tol;
  h["seed"] = opt.seed;
  return h;
}

/// Writes solution.csv and summary.json; prints one line per pose.
inline int report(const std::string& command, const Model& m, const StaticsSetup& setup, const Options& opt,
                  const std::vector<PoseSolution>& sols, std::ostream& out) {
  const auto dir = prepare_out_dir(opt.out_dir);
  io::write_text((dir / "solution.csv").string(), io::solution_csv(sols, m.cable_labels));
  io::ordered_json summary = run_header(command, m, setup, opt);
  io::ordered_json poses = io::ordered_json::array();
  bool all_optimal = true;
  for (std::size_t t = 0; t < sols.size(); ++t) {
    const auto& ps = sols[t];
    poses.push_back(io::pose_summary(ps, static_cast<int>(t) + 1));
    all_optimal = all_optimal && ps.optimal();
    char line[256];
    std::snprintf(line, sizeof line, "t=%zu %s PE=%.6g J kkt=%.2e oracle=%.2e\n", t + 1,
                  std::string(to_string(ps.qp.status)).c_str(), ps.potential_energy, ps.qp.kkt.worst(),
                  ps.oracle.worst());
    out << line;
    if (!ps.note.empty()) out << "  " << ps.note << '\n';
  }
  summary["poses"] = poses;
  io::write_text((dir / "summary.json").string(), summary.dump(2) + "\n");
  out << "wrote " << (dir / "solution.csv").string() << " and " << (dir / "summary.json").string() << '\n';
  return all_optimal ? kOk : kInfeasible;
}

}  // namespace detail

inline int cmd_solve(const std::string& structure_path, const std::string& pose_path, const Options& opt,
                     std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Model m = detail::load_valid_structure(structure_path);
    const Trajectory traj = io::read_trajectory(pose_path, m.structure.dimension);
    if (traj.size() != 1) {
      throw Error(ErrorCode::Parse, pose_path + ": holds " + std::to_string(traj.size()) +
                                        " poses; use the trajectory command");
    }
    const StaticsSetup setup = make_setup(m, opt);
    const Coordinates x = nodes_from_poses(m.structure, m.local, traj.frames.front());
    return detail::report("solve", m, setup, opt, {solve_pose(m.structure, x, setup)}, out);
  });
}

inline int cmd_trajectory(const std::string& structure_path, const std::string& trajectory_path, const Options& opt,
                          std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Model m = detail::load_valid_structure(structure_path);
    const Trajectory traj = io::read_trajectory(trajectory_path, m.structure.dimension);
    const StaticsSetup setup = make_setup(m, opt);
    return detail::report("trajectory", m, setup, opt, solve_trajectory(m.structure, m.local, traj, setup), out);
  });
}

/// "axis:node=value", node 1-based, e.g. "x:17=0".
inline ReactionConstraint parse_fix(const std::string& spec, int dimension) {
  static const std::regex re(R"(^\s*([xyz])\s*:\s*(\d+)\s*=\s*([-+0-9.eE]+)\s*$)");
  std::smatch mt;
  if (!std::regex_match(spec, mt, re)) {
    throw Error(ErrorCode::Parse, "reaction constraint '" + spec + "': expected axis:node=value, e.g. x:17=0");
  }
  ReactionConstraint c;
  c.axis = mt[1].str()[0] - 'x';
  if (c.axis >= dimension) throw Error(ErrorCode::Parse, "reaction constraint '" + spec + "': axis not in this dimension");
  c.node = std::stoi(mt[2].str()) - 1;
  try {
    c.value = std::stod(mt[3].str());
  } catch (const std::exception&) {
    throw Error(ErrorCode::Parse, "reaction constraint '" + spec + "': malformed value");
  }
  return c;
}

struct PresolveOptions {
  std::vector<int> pinned;  // 1-based; empty uses the structure file's list
  std::vector<std::string> fixes;
  bool zero_tangential = false;  // every non-vertical reaction component = 0
};

inline int cmd_presolve(const std::string& structure_path, const std::string& pose_path, const PresolveOptions& po,
                        const Options& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Model m = detail::load_valid_structure(structure_path);
    const Structure& st = m.structure;
    const int n = st.node_count();
    const int d = st.dimension;
    const Trajectory traj = io::read_trajectory(pose_path, d);
    if (traj.size() != 1) throw Error(ErrorCode::Parse, pose_path + ": expected a single pose");

    NodeMask pinned = m.pinned.value_or(NodeMask::none(n));
    std::vector<ReactionConstraint> extra = m.reaction_constraints;
    if (!po.pinned.empty()) {
      std::vector<int> nodes;
      for (int i : po.pinned) {
        if (i < 1 || i > n) throw Error(ErrorCode::Parse, "pinned node " + std::to_string(i) + " outside 1.." + std::to_string(n));
        nodes.push_back(i - 1);
      }
      pinned = NodeMask::of(n, nodes);
      extra.clear();
    }
    if (pinned.count() == 0) throw Error(ErrorCode::Parse, "no pinned nodes given (structure file or --pinned)");
    for (const auto& f : po.fixes) extra.push_back(parse_fix(f, d));
    if (po.zero_tangential) {
      for (int node : pinned.indices()) {
        for (int a = 0; a + 1 < d; ++a) extra.push_back({a, node, 0.0});
      }
    }

    const Coordinates x = nodes_from_poses(st, m.local, traj.frames.front());
    const LoadVector p = gravity_load(st, opt.gravity);
    const ReactionSolution r = presolve_pinned_reactions(st, x, p, pinned, extra);

    const auto dir = detail::prepare_out_dir(opt.out_dir);
    std::string csv = d == 3 ? "node,r_x_N,r_y_N,r_z_N\n" : "node,r_x_N,r_y_N\n";
    double vertical = 0.0;
    for (std::size_t k = 0; k < r.pinned_nodes.size(); ++k) {
      csv += std::to_string(r.pinned_nodes[k] + 1);
      for (int a = 0; a < d; ++a) csv += "," + io::format_number(r.at(static_cast<int>(k), a));
      csv += "\n";
      vertical += r.at(static_cast<int>(k), d - 1);
    }
    io::write_text((dir / "reactions.csv").string(), csv);
    char line[160];
    std::snprintf(line, sizeof line, "pinned=%zu vertical_sum=%.9f N residual=%.3e\n", r.pinned_nodes.size(), vertical,
                  r.residual);
    out << line << "wrote " << (dir / "reactions.csv").string() << '\n';
    return kOk;
  });
}

struct DemoOptions {
  std::optional<int> vertebrae;
  int poses = 20;
  std::string pose = "sweep";  // quadruped: sweep, extension, flexion
};

/// Share of total cable tension carried by each group, in group order.
inline std::vector<std::pair<std::string, double>> group_shares(const Model& m, const PoseSolution& ps) {
  std::vector<std::pair<std::string, double>> out;
  const double total = ps.cables.tensions.sum();
  for (std::size_t i = 0; i < m.cable_groups.size(); ++i) {
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& e) { return e.first == m.cable_groups[i]; });
    if (it == out.end()) {
      out.emplace_back(m.cable_groups[i], 0.0);
      it = out.end() - 1;
    }
    it->second += ps.cables.tensions(static_cast<Eigen::Index>(i)) / total;
  }
  return out;
}

inline int cmd_demo(const std::string& name, const DemoOptions& dopt, const Options& opt, std::ostream& out,
                    std::ostream& err) {
  return guarded(err, [&] {
    if (dopt.poses < 1) throw Error(ErrorCode::Parse, "--poses must be at least 1");
    Model m;
    Trajectory traj;
    if (name == "spine2d") {
      SpineParams prm;
      if (dopt.vertebrae) prm.vertebrae = *dopt.vertebrae;
      if (dopt.pose != "sweep") throw Error(ErrorCode::Parse, "spine2d only has the sweep pose");
      m = spine2d(prm);
      traj = spine_bend_trajectory(m.structure, SpineSweep{}, dopt.poses);
    } else if (name == "quadruped") {
      QuadrupedParams prm;
      if (dopt.vertebrae) prm.vertebrae = *dopt.vertebrae;
      m = quadruped3d(prm);
      const QuadrupedSweep sweep;
      if (dopt.pose == "sweep") {
        traj = quadruped_trajectory(prm, sweep, dopt.poses);
      } else if (dopt.pose == "extension") {
        traj.frames.push_back(quadruped_frame(prm, sweep.extension));
      } else if (dopt.pose == "flexion") {
        traj.frames.push_back(quadruped_frame(prm, sweep.flexion));
      } else {
        throw Error(ErrorCode::Parse, "unknown quadruped pose '" + dopt.pose + "' (sweep, extension, flexion)");
      }
    } else {
      throw Error(ErrorCode::Parse, "unknown demo '" + name + "' (spine2d, quadruped)");
    }

    const auto dir = detail::prepare_out_dir(opt.out_dir);
    io::write_text((dir / "structure.json").string(), io::structure_to_json(m).dump(2) + "\n");
    io::write_text((dir / "trajectory.json").string(), io::trajectory_to_json(traj).dump(2) + "\n");
    const StaticsSetup setup = make_setup(m, opt);
    const auto sols = solve_trajectory(m.structure, m.local, traj, setup);
    const int code = detail::report("demo " + name, m, setup, opt, sols, out);
    for (std::size_t t : {std::size_t{0}, sols.size() - 1}) {
      out << "t=" << t + 1 << " tension share:";
      for (const auto& [g, share] : group_shares(m, sols[t])) {
        char cell[48];
        std::snprintf(cell, sizeof cell, " %s %.3f", g.c_str(), share);
        out << cell;
      }
      out << '\n';
      if (sols.size() == 1) break;
    }
    return code;
  });
}

inline int cmd_validate(const std::string& structure_path, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Model m = io::read_structure(structure_path);
    const auto report = validate_structure(m.structure);
    for (const auto& v : report) out << v.rule << ": " << v.detail << '\n';
    if (!report.empty()) return kInputError;
    out << "valid: " << m.structure.node_count() << " nodes, " << m.structure.body_count() << " bodies, "
        << m.structure.cable_count() << " cables, " << m.structure.bar_count() << " bars\n";
    return kOk;
  });
}

/// Re-checks a saved solution against the loop oracle, pose by pose.
inline int cmd_verify(const std::string& structure_path, const std::string& trajectory_path,
                      const std::string& solution_path, const Options& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Model m = detail::load_valid_structure(structure_path);
    const Structure& st = m.structure;
    const Trajectory traj = io::read_trajectory(trajectory_path, st.dimension);
    const auto rows = io::parse_solution_csv(io::read_text(solution_path), solution_path);
    const double tol = opt.tol.value_or(1e-6);
    const StaticsSetup setup = make_setup(m, opt);

    std::map<int, Vec> q_by_pose;
    std::map<int, bool> optimal;
    for (const auto& r : rows) {
      if (r.t < 1 || r.t > traj.size()) throw Error(ErrorCode::Parse, solution_path + ": pose " + std::to_string(r.t) + " not in trajectory");
      if (r.cable < 1 || r.cable > st.cable_count()) throw Error(ErrorCode::Parse, solution_path + ": cable " + std::to_string(r.cable) + " out of range");
      auto& q = q_by_pose[r.t];
      if (q.size() == 0) q = Vec::Constant(st.cable_count(), std::numeric_limits<double>::quiet_NaN());
      q(r.cable - 1) = r.q;
      optimal[r.t] = r.status == "Optimal";
    }

    bool ok = true;
    for (const auto& [t, q] : q_by_pose) {
      if (!q.allFinite()) throw Error(ErrorCode::Parse, solution_path + ": pose " + std::to_string(t) + " is missing cables");
      const Coordinates x = nodes_from_poses(st, m.local, traj.frames[static_cast<std::size_t>(t - 1)]);
      const LoadVector p = pose_loads(st, x, setup);
      const WrenchReport w = body_wrench_residuals(st, x, p, q, setup.anchors);
      const bool pass = !optimal[t] || w.worst() <= tol;
      ok = ok && pass;
      char line[160];
      std::snprintf(line, sizeof line, "t=%d force=%.3e N moment=%.3e N m %s\n", t, w.max_force, w.max_moment,
                    !optimal[t] ? "skipped (not optimal)" : (pass ? "ok" : "FAIL"));
      out << line;
    }
    return ok ? kOk : kInfeasible;
  });
}

}  // namespace invstat::cli
