#pragma once

#include <vector>

#include "vlio/manifold.hpp"

namespace vlio {

struct RawPoint {
  Vec3 position = Vec3::Zero();  // LiDAR frame at firing time
  double dt = 0.0;               // seconds since scan start
};

struct RawScan {
  double t0 = 0.0;
  std::vector<RawPoint> points;  // firing order
};

/// A point re-expressed in the scan-start LiDAR frame.
struct UndistortedPoint {
  Vec3 position = Vec3::Zero();
  Vec3 raw = Vec3::Zero();
  double dt = 0.0;
  Mat3 rotation = Mat3::Identity();  // undistortion rotation R_j^{t0}
  Mat3 cov = Mat3::Zero();           // post-undistortion covariance, LiDAR frame
};

struct UndistortedScan {
  double t0 = 0.0;
  std::vector<UndistortedPoint> points;
};

/// Keeps every `stride`-th point in firing order.
RawScan downsample_stride(const RawScan& scan, std::size_t stride);

}  // namespace vlio
