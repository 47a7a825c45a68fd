#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "invstat/cli.hpp"

namespace {

void add_common(CLI::App* cmd, invstat::cli::Options& opt) {
  cmd->add_option("--min-density", opt.min_density, "minimum cable force density c (N/m)");
  cmd->add_option("--min-rest-length", opt.min_rest_length, "minimum rest length u_min (m); enables saturation bounds");
  cmd->add_flag("--no-saturation", opt.no_saturation, "drop the rest-length (saturation) bounds");
  cmd->add_option("--tol", opt.tol, "solver feasibility/optimality tolerance (verify: residual threshold)");
  cmd->add_option("--out", opt.out_dir, "output directory")->capture_default_str();
  cmd->add_option("--gravity", opt.gravity, "gravitational acceleration (m/s^2)")->capture_default_str();
  cmd->add_option("--seed", opt.seed, "seed for randomized generators; never affects solves");
}

}  // namespace

int main(int argc, char** argv) {
  namespace cli = invstat::cli;
  CLI::App app{"Inverse statics for compound tensegrity robots"};
  app.require_subcommand(1);

  cli::Options opt;
  std::string structure, pose, trajectory, solution, demo_name;
  cli::PresolveOptions popt;
  cli::DemoOptions dopt;

  auto* solve = app.add_subcommand("solve", "optimal cable tensions for one pose");
  solve->add_option("--structure", structure, "structure JSON")->required();
  solve->add_option("--pose", pose, "pose JSON (one frame)")->required();
  add_common(solve, opt);

  auto* traj = app.add_subcommand("trajectory", "tensions along a pose sequence, warm-started");
  traj->add_option("--structure", structure, "structure JSON")->required();
  traj->add_option("--trajectory", trajectory, "trajectory JSON")->required();
  add_common(traj, opt);

  auto* pre = app.add_subcommand("presolve", "support reactions at pinned nodes");
  pre->add_option("--structure", structure, "structure JSON")->required();
  pre->add_option("--pose", pose, "pose JSON (one frame)")->required();
  pre->add_option("--pinned", popt.pinned, "pinned nodes, 1-based (default: from the structure file)");
  pre->add_option("--fix-reaction", popt.fixes, "reaction component constraint axis:node=value, e.g. x:17=0");
  pre->add_flag("--zero-tangential", popt.zero_tangential, "no horizontal reaction at any pinned node");
  add_common(pre, opt);

  auto* demo = app.add_subcommand("demo", "built-in studies: spine2d, quadruped");
  demo->add_option("name", demo_name, "spine2d or quadruped")->required();
  demo->add_option("--vertebrae", dopt.vertebrae, "number of vertebrae");
  demo->add_option("--poses", dopt.poses, "number of poses T")->capture_default_str();
  demo->add_option("--pose", dopt.pose, "quadruped: sweep, extension or flexion")->capture_default_str();
  add_common(demo, opt);

  auto* val = app.add_subcommand("validate", "check a structure file");
  val->add_option("--structure", structure, "structure JSON")->required();

  auto* ver = app.add_subcommand("verify", "re-check a saved solution with the loop oracle");
  ver->add_option("--structure", structure, "structure JSON")->required();
  ver->add_option("--trajectory", trajectory, "trajectory or pose JSON used for the solution")->required();
  ver->add_option("--solution", solution, "solution CSV")->required();
  add_common(ver, opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kInputError;
  }

  if (*solve) return cli::cmd_solve(structure, pose, opt, std::cout, std::cerr);
  if (*traj) return cli::cmd_trajectory(structure, trajectory, opt, std::cout, std::cerr);
  if (*pre) return cli::cmd_presolve(structure, pose, popt, opt, std::cout, std::cerr);
  if (*demo) return cli::cmd_demo(demo_name, dopt, opt, std::cout, std::cerr);
  if (*val) return cli::cmd_validate(structure, std::cout, std::cerr);
  if (*ver) return cli::cmd_verify(structure, trajectory, solution, opt, std::cout, std::cerr);
  return cli::kInputError;
}
