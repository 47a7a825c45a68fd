#pragma once

// File formats. Structures and trajectories are JSON with 1-based node
// numbering; solutions are CSV, one row per (pose, cable).

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "invstat/core.hpp"
#include "invstat/models.hpp"
#include "invstat/poses.hpp"
#include "invstat/statics.hpp"

namespace invstat::io {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Parse, path + ": cannot open file");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Parse, path + ": cannot write file");
  out << text;
}

/// Parses JSON, reporting syntax errors by line and column.
inline json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(ErrorCode::Parse, origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + e.what());
  }
}

namespace detail {

[[noreturn]] inline void field_error(const std::string& origin, const std::string& field, const std::string& what) {
  throw Error(ErrorCode::Parse, origin + ": field '" + field + "': " + what);
}

inline const json& field(const json& obj, const char* key, const std::string& origin, const std::string& where = "") {
  const std::string name = where.empty() ? key : where + "." + key;
  if (!obj.is_object()) field_error(origin, where.empty() ? "<root>" : where, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) field_error(origin, name, "missing");
  return *it;
}

inline double number(const json& v, const std::string& origin, const std::string& name) {
  if (!v.is_number()) field_error(origin, name, "expected a number");
  return v.get<double>();
}

inline int integer(const json& v, const std::string& origin, const std::string& name) {
  if (!v.is_number_integer()) field_error(origin, name, "expected an integer");
  return v.get<int>();
}

inline const json& array(const json& v, const std::string& origin, const std::string& name) {
  if (!v.is_array()) field_error(origin, name, "expected an array");
  return v;
}

inline std::vector<double> numbers(const json& v, const std::string& origin, const std::string& name) {
  std::vector<double> out;
  for (std::size_t i = 0; i < array(v, origin, name).size(); ++i) {
    out.push_back(number(v[i], origin, name + "[" + std::to_string(i) + "]"));
  }
  return out;
}

inline std::vector<int> node_list(const json& v, int n, const std::string& origin, const std::string& name) {
  std::vector<int> out;
  for (std::size_t i = 0; i < array(v, origin, name).size(); ++i) {
    const std::string at = name + "[" + std::to_string(i) + "]";
    const int node = integer(v[i], origin, at);
    if (node < 1 || node > n) field_error(origin, at, "node " + std::to_string(node) + " outside 1.." + std::to_string(n));
    out.push_back(node - 1);
  }
  return out;
}

inline int axis_index(const json& v, int d, const std::string& origin, const std::string& name) {
  int axis = -1;
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "x") axis = 0;
    if (s == "y") axis = 1;
    if (s == "z") axis = 2;
  } else if (v.is_number_integer()) {
    axis = v.get<int>() - 1;
  }
  if (axis < 0 || axis >= d) field_error(origin, name, "expected an axis name (x, y, z) or 1-based axis number");
  return axis;
}

inline std::string group_of(const std::string& label) { return label.substr(0, label.find('-')); }

}  // namespace detail

/// Reads a structure file into a model. Members may list their endpoints in
/// either order; they are stored ascending. The structure is not validated here.
inline Model parse_structure(const json& doc, const std::string& origin = "structure") {
  using namespace detail;
  Model m;
  Structure& st = m.structure;
  st.dimension = integer(field(doc, "dimension", origin), origin, "dimension");
  if (st.dimension != 2 && st.dimension != 3) field_error(origin, "dimension", "must be 2 or 3");
  const int d = st.dimension;

  std::vector<int> eta;
  const json& npb = array(field(doc, "nodes_per_body", origin), origin, "nodes_per_body");
  for (std::size_t k = 0; k < npb.size(); ++k) {
    const std::string at = "nodes_per_body[" + std::to_string(k) + "]";
    const int count = integer(npb[k], origin, at);
    if (count < 1) field_error(origin, at, "every body needs at least one node");
    eta.push_back(count);
  }
  st.body_of_node = partition_from_sizes(eta);
  const int n = st.node_count();

  const json& members = array(field(doc, "members", origin), origin, "members");
  for (std::size_t a = 0; a < members.size(); ++a) {
    const std::string at = "members[" + std::to_string(a) + "]";
    const json& kind = field(members[a], "kind", origin, at);
    if (!kind.is_string() || (kind != "cable" && kind != "bar")) field_error(origin, at + ".kind", "expected \"cable\" or \"bar\"");
    const int from = integer(field(members[a], "from", origin, at), origin, at + ".from");
    const int to = integer(field(members[a], "to", origin, at), origin, at + ".to");
    const MemberKind mk = kind == "cable" ? MemberKind::Cable : MemberKind::Bar;
    // Out-of-range and self-loop members are kept so validation can name them.
    st.members.push_back(make_member(mk, from - 1, to - 1));
  }
  st.spring_constants = numbers(field(doc, "spring_constants", origin), origin, "spring_constants");
  st.node_masses = numbers(field(doc, "node_masses", origin), origin, "node_masses");

  const json& local = array(field(doc, "local_coordinates", origin), origin, "local_coordinates");
  if (local.size() != eta.size()) {
    field_error(origin, "local_coordinates", "expected " + std::to_string(eta.size()) + " bodies, got " + std::to_string(local.size()));
  }
  for (std::size_t k = 0; k < local.size(); ++k) {
    const std::string at = "local_coordinates[" + std::to_string(k) + "]";
    const json& body = array(local[k], origin, at);
    if (static_cast<int>(body.size()) != eta[k]) field_error(origin, at, "expected " + std::to_string(eta[k]) + " nodes");
    Mat block(eta[k], d);
    for (std::size_t i = 0; i < body.size(); ++i) {
      const std::string pt = at + "[" + std::to_string(i) + "]";
      const auto xyz = numbers(body[i], origin, pt);
      if (static_cast<int>(xyz.size()) != d) field_error(origin, pt, "expected " + std::to_string(d) + " coordinates");
      for (int a = 0; a < d; ++a) block(static_cast<Eigen::Index>(i), a) = xyz[static_cast<std::size_t>(a)];
    }
    m.local.push_back(block);
  }

  if (doc.contains("anchors")) m.anchors = NodeMask::of(n, node_list(doc["anchors"], n, origin, "anchors"));
  if (doc.contains("pinned")) m.pinned = NodeMask::of(n, node_list(doc["pinned"], n, origin, "pinned"));
  if (doc.contains("reaction_constraints")) {
    const json& rc = array(doc["reaction_constraints"], origin, "reaction_constraints");
    for (std::size_t e = 0; e < rc.size(); ++e) {
      const std::string at = "reaction_constraints[" + std::to_string(e) + "]";
      ReactionConstraint c;
      c.axis = axis_index(field(rc[e], "axis", origin, at), d, origin, at + ".axis");
      c.node = node_list(json::array({field(rc[e], "node", origin, at)}), n, origin, at + ".node").front();
      c.value = number(field(rc[e], "value", origin, at), origin, at + ".value");
      m.reaction_constraints.push_back(c);
    }
  }

  if (doc.contains("min_density")) m.min_density = number(doc["min_density"], origin, "min_density");
  if (doc.contains("min_rest_length")) m.min_rest_length = number(doc["min_rest_length"], origin, "min_rest_length");

  const int s = st.cable_count();
  if (doc.contains("cable_labels")) {
    const json& labels = array(doc["cable_labels"], origin, "cable_labels");
    if (static_cast<int>(labels.size()) != s) field_error(origin, "cable_labels", "expected one label per cable");
    for (const auto& l : labels) {
      if (!l.is_string()) field_error(origin, "cable_labels", "labels must be strings");
      m.cable_labels.push_back(l.get<std::string>());
    }
  } else {
    for (int i = 0; i < s; ++i) m.cable_labels.push_back("C" + std::to_string(i + 1));
  }
  for (const auto& l : m.cable_labels) m.cable_groups.push_back(group_of(l));
  return m;
}

inline Model read_structure(const std::string& path) { return parse_structure(parse_json(read_text(path), path), path); }

inline ordered_json structure_to_json(const Model& m) {
  const Structure& st = m.structure;
  ordered_json doc;
  doc["dimension"] = st.dimension;
  doc["nodes_per_body"] = st.nodes_per_body();
  ordered_json members = ordered_json::array();
  for (const Member& mem : st.members) {
    ordered_json e;
    e["kind"] = mem.kind == MemberKind::Cable ? "cable" : "bar";
    e["from"] = mem.from + 1;
    e["to"] = mem.to + 1;
    members.push_back(e);
  }
  doc["members"] = members;
  doc["spring_constants"] = st.spring_constants;
  doc["node_masses"] = st.node_masses;
  ordered_json local = ordered_json::array();
  for (const Mat& block : m.local) {
    ordered_json body = ordered_json::array();
    for (Eigen::Index i = 0; i < block.rows(); ++i) {
      std::vector<double> pt;
      for (Eigen::Index a = 0; a < block.cols(); ++a) pt.push_back(block(i, a));
      body.push_back(pt);
    }
    local.push_back(body);
  }
  doc["local_coordinates"] = local;
  auto one_based = [](const NodeMask& mask) {
    std::vector<int> out;
    for (int i : mask.indices()) out.push_back(i + 1);
    return out;
  };
  if (m.anchors) doc["anchors"] = one_based(*m.anchors);
  if (m.pinned) doc["pinned"] = one_based(*m.pinned);
  if (!m.reaction_constraints.empty()) {
    ordered_json rc = ordered_json::array();
    const char* names[] = {"x", "y", "z"};
    for (const auto& c : m.reaction_constraints) {
      ordered_json e;
      e["axis"] = names[c.axis];
      e["node"] = c.node + 1;
      e["value"] = c.value;
      rc.push_back(e);
    }
    doc["reaction_constraints"] = rc;
  }
  if (m.min_density) doc["min_density"] = *m.min_density;
  if (m.min_rest_length) doc["min_rest_length"] = *m.min_rest_length;
  doc["cable_labels"] = m.cable_labels;
  return doc;
}

namespace detail {

inline BodyPose parse_pose(const json& v, int d, const std::string& origin, const std::string& at) {
  const auto t = numbers(field(v, "translation", origin, at), origin, at + ".translation");
  if (static_cast<int>(t.size()) != d) field_error(origin, at + ".translation", "expected " + std::to_string(d) + " entries");
  BodyPose p = BodyPose::identity(d);
  for (int a = 0; a < d; ++a) p.translation(a) = t[static_cast<std::size_t>(a)];
  const json& r = field(v, "rotation", origin, at);
  if (d == 2) {
    p.angle = number(r, origin, at + ".rotation");
    return p;
  }
  const auto q = numbers(r, origin, at + ".rotation");
  if (q.size() != 4) field_error(origin, at + ".rotation", "expected a quaternion [w, x, y, z]");
  p.rotation = Eigen::Quaterniond(q[0], q[1], q[2], q[3]);
  if (std::abs(p.rotation.norm() - 1.0) > 1e-6) field_error(origin, at + ".rotation", "quaternion is not unit length");
  return p;
}

inline Frame parse_frame(const json& v, int d, const std::string& origin, const std::string& at) {
  Frame f;
  for (std::size_t k = 0; k < array(v, origin, at).size(); ++k) {
    f.push_back(parse_pose(v[k], d, origin, at + "[" + std::to_string(k) + "]"));
  }
  return f;
}

}  // namespace detail

/// A trajectory file is a list of frames. A single frame (a list of pose
/// objects) is accepted as a one-pose trajectory.
inline Trajectory parse_trajectory(const json& doc, int dimension, const std::string& origin = "trajectory") {
  using namespace detail;
  Trajectory traj;
  const json& frames = array(doc, origin, "<root>");
  if (!frames.empty() && frames[0].is_object()) {
    traj.frames.push_back(parse_frame(frames, dimension, origin, "<root>"));
    return traj;
  }
  for (std::size_t t = 0; t < frames.size(); ++t) {
    traj.frames.push_back(parse_frame(frames[t], dimension, origin, "[" + std::to_string(t) + "]"));
  }
  if (traj.frames.empty()) field_error(origin, "<root>", "no frames");
  return traj;
}

inline Trajectory read_trajectory(const std::string& path, int dimension) {
  return parse_trajectory(parse_json(read_text(path), path), dimension, path);
}

inline ordered_json trajectory_to_json(const Trajectory& traj) {
  ordered_json frames = ordered_json::array();
  for (const Frame& f : traj.frames) {
    ordered_json frame = ordered_json::array();
    for (const BodyPose& p : f) {
      ordered_json e;
      std::vector<double> t(p.translation.data(), p.translation.data() + p.translation.size());
      e["translation"] = t;
      if (p.dimension() == 2) {
        e["rotation"] = p.angle;
      } else {
        e["rotation"] = std::vector<double>{p.rotation.w(), p.rotation.x(), p.rotation.y(), p.rotation.z()};
      }
      frame.push_back(e);
    }
    frames.push_back(frame);
  }
  return frames;
}

inline const char* kSolutionHeader = "t,cable_index,group_label,length_m,q_N_per_m,tension_N,rest_length_m,status";

inline std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10f", x);
  return buf;
}

/// Solution table. Pose numbers start at `first_t`.
inline std::string solution_csv(const std::vector<PoseSolution>& poses, const std::vector<std::string>& labels,
                                int first_t = 1) {
  std::ostringstream out;
  out << kSolutionHeader << '\n';
  for (std::size_t t = 0; t < poses.size(); ++t) {
    const PoseSolution& ps = poses[t];
    const std::string status(to_string(ps.qp.status));
    for (Eigen::Index i = 0; i < ps.cables.lengths.size(); ++i) {
      out << (first_t + static_cast<int>(t)) << ',' << (i + 1) << ','
          << (static_cast<std::size_t>(i) < labels.size() ? labels[static_cast<std::size_t>(i)] : "C" + std::to_string(i + 1))
          << ',' << format_number(ps.cables.lengths(i)) << ',' << format_number(ps.cables.densities(i)) << ','
          << format_number(ps.cables.tensions(i)) << ',' << format_number(ps.cables.rest_inputs(i)) << ',' << status
          << '\n';
    }
  }
  return out.str();
}

struct SolutionRow {
  int t = 0;
  int cable = 0;
  std::string label;
  double length = 0.0;
  double q = 0.0;
  double tension = 0.0;
  double rest_length = 0.0;
  std::string status;
};

inline std::vector<SolutionRow> parse_solution_csv(const std::string& text, const std::string& origin = "solution") {
  std::vector<SolutionRow> rows;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1) {
      if (line != kSolutionHeader) throw Error(ErrorCode::Parse, origin + ":1: unexpected header");
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 8) {
      throw Error(ErrorCode::Parse, origin + ":" + std::to_string(lineno) + ": expected 8 columns, got " + std::to_string(cells.size()));
    }
    try {
      rows.push_back({std::stoi(cells[0]), std::stoi(cells[1]), cells[2], std::stod(cells[3]), std::stod(cells[4]),
                      std::stod(cells[5]), std::stod(cells[6]), cells[7]});
    } catch (const std::exception&) {
      throw Error(ErrorCode::Parse, origin + ":" + std::to_string(lineno) + ": malformed number");
    }
  }
  return rows;
}

inline ordered_json pose_summary(const PoseSolution& ps, int t) {
  ordered_json e;
  e["t"] = t;
  e["status"] = std::string(to_string(ps.qp.status));
  if (!ps.note.empty()) e["note"] = ps.note;
  e["objective"] = ps.qp.objective;
  e["potential_energy_J"] = ps.potential_energy;
  e["iterations"] = ps.qp.iterations;
  e["kkt"] = {{"stationarity", ps.qp.kkt.stationarity},
              {"primal_eq", ps.qp.kkt.primal_eq},
              {"primal_ineq", ps.qp.kkt.primal_ineq},
              {"complementarity", ps.qp.kkt.complementarity},
              {"scale", ps.qp.kkt.scale}};
  e["equality_residual"] = ps.equality_residual;
  e["oracle"] = {{"max_force_N", ps.oracle.max_force}, {"max_moment_Nm", ps.oracle.max_moment}};
  std::vector<int> active;
  for (int i : ps.qp.active_set) active.push_back(i + 1);
  e["active_set"] = active;
  if (ps.reactions) {
    ordered_json r = ordered_json::array();
    const int v = static_cast<int>(ps.reactions->pinned_nodes.size());
    const int d = static_cast<int>(ps.reactions->reactions.size()) / std::max(1, v);
    for (int k = 0; k < v; ++k) {
      std::vector<double> f;
      for (int a = 0; a < d; ++a) f.push_back(ps.reactions->at(k, a));
      r.push_back({{"node", ps.reactions->pinned_nodes[static_cast<std::size_t>(k)] + 1}, {"force_N", f}});
    }
    e["reactions"] = r;
    e["presolve_residual"] = ps.reactions->residual;
  }
  return e;
}

}  // namespace invstat::io
