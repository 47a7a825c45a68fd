#pragma once

// Rigid-body poses and pose sequences. A frame holds one pose per body; the
// global node positions follow from the body-local coordinates.

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Geometry>

#include "invstat/core.hpp"
#include "invstat/equilibrium.hpp"
#include "invstat/topology.hpp"

namespace invstat {

struct BodyPose {
  Vec translation;                                         // d entries, meters
  double angle = 0.0;                                      // d = 2, radians
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();  // d = 3

  static BodyPose planar(double x, double y, double theta) {
    BodyPose p;
    p.translation = Eigen::Vector2d(x, y);
    p.angle = theta;
    return p;
  }

  static BodyPose spatial(const Eigen::Vector3d& t, const Eigen::Quaterniond& q) {
    BodyPose p;
    p.translation = t;
    p.rotation = q.normalized();
    return p;
  }

  static BodyPose identity(int dimension) {
    BodyPose p;
    p.translation = Vec::Zero(dimension);
    return p;
  }

  int dimension() const { return static_cast<int>(translation.size()); }

  Mat rotation_matrix() const {
    if (dimension() == 2) return Eigen::Rotation2Dd(angle).toRotationMatrix();
    return rotation.normalized().toRotationMatrix();
  }
};

using Frame = std::vector<BodyPose>;

struct Trajectory {
  std::vector<Frame> frames;

  int size() const { return static_cast<int>(frames.size()); }
};

/// Body-local node positions, one (eta_k x d) block per body.
using LocalCoordinates = std::vector<Mat>;

inline Coordinates nodes_from_poses(const Structure& st, const LocalCoordinates& local, const Frame& frame) {
  const auto eta = st.nodes_per_body();
  const int d = st.dimension;
  require(local.size() == eta.size(), ErrorCode::DimensionMismatch,
          "local coordinates given for " + std::to_string(local.size()) + " bodies, structure has " +
              std::to_string(eta.size()));
  require(frame.size() == eta.size(), ErrorCode::DimensionMismatch,
          "frame has " + std::to_string(frame.size()) + " body poses, structure has " + std::to_string(eta.size()));
  Coordinates out{Mat(st.node_count(), d)};
  int row = 0;
  for (std::size_t k = 0; k < eta.size(); ++k) {
    const Mat& block = local[k];
    require(block.rows() == eta[k] && block.cols() == d, ErrorCode::DimensionMismatch,
            "local coordinates of body " + std::to_string(k + 1) + " have the wrong shape", static_cast<int>(k));
    require(frame[k].dimension() == d, ErrorCode::DimensionMismatch,
            "pose of body " + std::to_string(k + 1) + " has the wrong dimension", static_cast<int>(k));
    const Mat Rm = frame[k].rotation_matrix();
    for (int i = 0; i < eta[k]; ++i) {
      out.positions.row(row++) = (Rm * block.row(i).transpose() + frame[k].translation).transpose();
    }
  }
  return out;
}

/// Pose between a and b at fraction s in [0, 1]: translation and planar angle
/// linearly, spatial orientation by slerp (constant angular velocity).
inline BodyPose interpolate(const BodyPose& a, const BodyPose& b, double s) {
  require(a.dimension() == b.dimension(), ErrorCode::DimensionMismatch, "poses differ in dimension");
  BodyPose p;
  p.translation = (1.0 - s) * a.translation + s * b.translation;
  p.angle = (1.0 - s) * a.angle + s * b.angle;
  p.rotation = a.rotation.slerp(s, b.rotation).normalized();
  return p;
}

inline Frame interpolate(const Frame& a, const Frame& b, double s) {
  require(a.size() == b.size(), ErrorCode::DimensionMismatch, "frames differ in body count");
  Frame out;
  out.reserve(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) out.push_back(interpolate(a[k], b[k], s));
  return out;
}

/// T frames from `initial` (t = 0) to `final` (t = T-1). T = 1 gives just the
/// initial frame.
inline Trajectory interpolate_trajectory(const Frame& initial, const Frame& final, int T) {
  require(T >= 1, ErrorCode::DimensionMismatch, "trajectory needs at least one pose");
  Trajectory traj;
  for (int t = 0; t < T; ++t) {
    const double s = T == 1 ? 0.0 : static_cast<double>(t) / (T - 1);
    traj.frames.push_back(interpolate(initial, final, s));
  }
  return traj;
}

/// Planar bend of a chain of bodies. Body k sits a fixed `spacing` along the
/// local x axis of body k-1 and is turned by `bend_per_joint` relative to it,
/// so the final angle of body k is k * bend_per_joint. Body 0 stays put.
struct SpineSweep {
  double spacing = 0.1;
  double bend_per_joint = 0.1;
};

inline Frame chained_planar_frame(int bodies, double spacing, double bend_per_joint) {
  Frame frame;
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  double angle = 0.0;
  for (int k = 0; k < bodies; ++k) {
    if (k > 0) {
      position += Eigen::Rotation2Dd(angle) * Eigen::Vector2d(spacing, 0.0);
      angle += bend_per_joint;
    }
    frame.push_back(BodyPose::planar(position.x(), position.y(), angle));
  }
  return frame;
}

inline Trajectory spine_bend_trajectory(const Structure& st, const SpineSweep& sweep, int T) {
  require(st.dimension == 2, ErrorCode::DimensionMismatch, "spine bend is a planar trajectory");
  const int b = st.body_count();
  return interpolate_trajectory(chained_planar_frame(b, sweep.spacing, 0.0),
                                chained_planar_frame(b, sweep.spacing, sweep.bend_per_joint), T);
}

}  // namespace invstat
