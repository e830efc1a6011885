#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "vlio/propagation.hpp"
#include "vlio/scan.hpp"

namespace vlio {

/// Range/bearing noise of a single LiDAR return. Both are standard
/// deviations; the measurement covariance uses their squares.
struct BeamNoiseModel {
  double sigma_range = 0.02;     // m
  double sigma_bearing = 0.001;  // rad
};

enum class DeviationMode { kMad, kStd, kLls };

std::string_view to_string(DeviationMode mode);
DeviationMode deviation_mode_from_string(std::string_view s);

struct UncertaintyConfig {
  double gamma = 0.1;
  DeviationMode deviation_mode = DeviationMode::kMad;

  void validate() const;
};

/// LiDAR angular and linear velocity at one IMU stamp, in the LiDAR frame.
struct LidarVelocity {
  double t = 0.0;
  Vec3 omega = Vec3::Zero();
  Vec3 v = Vec3::Zero();
};

struct VibrationIntensity {
  Vec3 k_omega = Vec3::Zero();  // rad/s
  Vec3 k_v = Vec3::Zero();      // m/s
  Vec3 omega_ave = Vec3::Zero();
  Vec3 v_ave = Vec3::Zero();
};

struct PointSigmas {
  Vec3 rot = Vec3::Zero();    // rad
  Vec3 trans = Vec3::Zero();  // m
};

struct PointCovariance {
  Mat3 sigma_rot = Mat3::Zero();
  Mat3 sigma_trans = Mat3::Zero();
  Mat3 sigma_meas = Mat3::Zero();  // raw LiDAR frame
  Mat3 total = Mat3::Zero();       // scan-start LiDAR frame
};

/// omega_L = R_IL^T omega_I and v_L = R_IL^T R_I^T v_G for each IMU sample
/// inside the timeline span. Velocities come from the timeline.
std::vector<LidarVelocity> lidar_frame_velocities(std::span<const ImuSample> window,
                                                  const PoseTimeline& timeline,
                                                  const RigidTransform& extrinsics);

/// Component-wise spread of the velocities: mean absolute deviation, population
/// standard deviation, or RMS residual of a linear fit over time. Throws
/// kInsufficientSamples for fewer than two samples.
VibrationIntensity vibration_intensity(std::span<const LidarVelocity> velocities,
                                       DeviationMode mode);

/// sigma_r = gamma * dt * k_omega, sigma_T = gamma * dt * k_v.
PointSigmas point_sigmas(const VibrationIntensity& intensity, double dt_j0,
                         const UncertaintyConfig& cfg);

/// [p]x diag(sigma_r^2) [p]x^T.
Mat3 rotational_covariance(const Vec3& p, const Vec3& sigma_r);

/// Deterministic orthonormal basis (3x2) of the plane orthogonal to a unit
/// bearing, from Gram-Schmidt against the least-aligned coordinate axis.
Eigen::Matrix<double, 3, 2> tangent_basis(const Vec3& bearing);

/// A diag(sigma_d^2, sigma_phi^2, sigma_phi^2) A^T with
/// A = [phi, -d [phi]x O(phi)]. Throws kZeroRangePoint for p_raw == 0.
Mat3 measurement_covariance(const Vec3& p_raw, const BeamNoiseModel& beam);

/// Sum of the rotational, translational and rotated measurement terms. The
/// second-order coupling between rotation error and beam noise is dropped.
PointCovariance total_covariance(const UndistortedPoint& p, const Vec3& sigma_r,
                                 const Vec3& sigma_T, const BeamNoiseModel& beam);

/// Fills `cov` of every point. With `include_motion` false only the rotated
/// measurement term is used.
void assign_covariances(UndistortedScan& scan, const VibrationIntensity& intensity,
                        const UncertaintyConfig& cfg, const BeamNoiseModel& beam,
                        bool include_motion);

}  // namespace vlio
