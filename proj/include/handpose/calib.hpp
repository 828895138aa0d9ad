#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "handpose/grid.hpp"

namespace handpose {

// Pinhole intrinsics, zero skew.
struct Intrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
};

// Rigid sensor-frame -> camera-frame transform.
struct Extrinsics {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
};

struct Correspondence {
  Eigen::Vector3d p3d;
  Keypoint p2d;
};

struct TimedSample {
  double timestamp_ms = 0.0;
  std::int64_t payload_id = 0;
};

// (u, v) = (fx X/Z + cx, fy Y/Z + cy) with (X,Y,Z) = R p + t. Throws when
// the transformed point does not lie in front of the camera.
Keypoint project_point(const Eigen::Vector3d& p3d, const Intrinsics& intr, const Extrinsics& extr);

// Elementwise projection preserving joint order; errors name the joint index.
JointSet project_joint_set(const std::vector<Eigen::Vector3d>& joints3d, const Intrinsics& intr,
                           const Extrinsics& extr);

// Pose from >= 6 correspondences: a DLT solve on normalized image
// coordinates seeds a Gauss-Newton refinement of the pixel reprojection
// error, with axis-angle rotation increments and a step-halving line search.
Extrinsics solve_pnp(const std::vector<Correspondence>& correspondences, const Intrinsics& intr);

double rms_reprojection_error(const std::vector<Correspondence>& correspondences,
                              const Intrinsics& intr, const Extrinsics& extr);

// Greedy nearest-neighbor pairing in timestamp order; every sample is used
// at most once and pairs further apart than the tolerance are dropped. Both
// streams must be sorted by timestamp. Returned pairs index into a and b.
std::vector<std::pair<std::size_t, std::size_t>> synchronize_streams(
    const std::vector<TimedSample>& a, const std::vector<TimedSample>& b, double tolerance_ms);

// Text formats: correspondences are `X Y Z u v` lines, intrinsics a single
// `fx fy cx cy` line, extrinsics 12 numbers (row-major R, then t). Blank
// lines and #-comments are ignored.
std::vector<Correspondence> load_correspondences(const std::string& path);
Intrinsics load_intrinsics(const std::string& path);
Extrinsics load_extrinsics(const std::string& path);
void save_extrinsics(const Extrinsics& extr, const std::string& path);

}  // namespace handpose
