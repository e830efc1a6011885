#pragma once

#include <span>
#include <vector>

#include "vlio/nav_state.hpp"
#include "vlio/scan.hpp"

namespace vlio {

struct ImuSample {
  double t = 0.0;
  Vec3 gyro = Vec3::Zero();   // rad/s, body frame
  Vec3 accel = Vec3::Zero();  // m/s^2, specific force, body frame
};

using ImuWindow = std::vector<ImuSample>;

/// Continuous-time noise densities. Discrete variances are sigma^2 * dt.
struct NoiseParams {
  double sigma_gyro = 1e-3;             // rad/s/sqrt(Hz)
  double sigma_accel = 1e-2;            // m/s^2/sqrt(Hz)
  double sigma_bias_gyro_walk = 1e-5;   // rad/s^2/sqrt(Hz)
  double sigma_bias_accel_walk = 1e-4;  // m/s^3/sqrt(Hz)

  void validate() const;
};

struct PoseSample {
  double t = 0.0;
  Rot3 rot;                 // relative to the scan-start IMU frame
  Vec3 pos = Vec3::Zero();  // relative to the scan-start IMU frame
  Vec3 vel = Vec3::Zero();  // expressed in the scan-start IMU frame
};

/// IMU motion over one scan, relative to the IMU frame at the first entry.
class PoseTimeline {
 public:
  PoseTimeline() = default;
  explicit PoseTimeline(std::vector<PoseSample> samples);

  const std::vector<PoseSample>& samples() const { return samples_; }
  double start_time() const { return samples_.front().t; }
  double end_time() const { return samples_.back().t; }
  bool empty() const { return samples_.empty(); }

  /// Rotation interpolated on the geodesic, translation and velocity
  /// linearly. Throws kTimestampOutOfRange outside [start, end].
  PoseSample at(double t) const;

 private:
  std::vector<PoseSample> samples_;
};

/// Integrates the mean state from state.t to t_end with the midpoint rule and
/// propagates the covariance with P <- F P F^T + Q dt. IMU readings are
/// linearly interpolated between samples and held constant beyond the ends.
NavState propagate(const NavState& state, std::span<const ImuSample> window,
                   const NoiseParams& noise, double t_end);

/// Propagates to the last sample of the window.
NavState propagate(const NavState& state, std::span<const ImuSample> window,
                   const NoiseParams& noise);

/// Builds the per-IMU-stamp motion over [state.t, t_end] relative to the
/// state's pose. Throws kWindowTooShort if the window does not span it.
PoseTimeline build_pose_timeline(const NavState& state, std::span<const ImuSample> window,
                                 double t_end);

/// Aligns every point to the scan start: p = R_j p' + T_j, where (R_j, T_j) is
/// the LiDAR motion at the point's timestamp.
UndistortedScan undistort(const RawScan& scan, const PoseTimeline& timeline,
                          const RigidTransform& extrinsics = RigidTransform::identity());

}  // namespace vlio
