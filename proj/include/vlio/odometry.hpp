#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vlio/ikf.hpp"
#include "vlio/point_map.hpp"
#include "vlio/propagation.hpp"
#include "vlio/uncertainty.hpp"

namespace vlio {

/// Static initialization from the first IMU samples and the prior spread of
/// the initial state.
struct InitConfig {
  double duration = 1.0;       // s
  double rot_std = 1e-3;       // rad
  double pos_std = 1e-3;       // m
  double vel_std = 1e-2;       // m/s
  double bias_gyro_std = 1e-3;   // rad/s
  double bias_accel_std = 5e-2;  // m/s^2
};

struct RunConfig {
  UncertaintyConfig uncertainty;
  bool uncertainty_enabled = true;
  IkfConfig ikf;
  double map_resolution = 0.5;      // m
  std::size_t downsample_stride = 4;
  double min_range = 0.1;           // m, closer returns are dropped
  BeamNoiseModel beam;
  NoiseParams imu_noise;
  RigidTransform extrinsics;        // I <- L
  InitConfig init;

  void validate() const;
};

enum class ScanStatus { kSkipped, kInitialized, kUpdated, kNoValidMatches };

std::string_view to_string(ScanStatus status);

struct ScanTiming {
  double propagate_ms = 0.0;
  double undistort_ms = 0.0;
  double uncertainty_ms = 0.0;
  double update_ms = 0.0;
  double map_ms = 0.0;
  double total_ms = 0.0;
};

struct ScanReport {
  std::size_t index = 0;
  double t0 = 0.0;
  ScanStatus status = ScanStatus::kSkipped;
  std::size_t raw_points = 0;
  std::size_t points = 0;
  int iterations = 0;
  std::size_t valid = 0;
  double mean_weight = 0.0;  // mean R_j, m^2
  bool converged = false;
  Vec3 k_omega = Vec3::Zero();
  Vec3 k_v = Vec3::Zero();
  std::size_t map_size = 0;
  ScanTiming timing;
  NavState state;  // posterior at t0 (meaningful unless kSkipped)
};

/// Streaming LiDAR-inertial odometry. IMU samples must be added before the
/// scans they cover; scans must arrive in time order.
class Odometry {
 public:
  explicit Odometry(RunConfig cfg);

  void add_imu(const ImuSample& sample);
  void add_imu(std::span<const ImuSample> samples);

  /// Runs propagate -> undistort -> intensity -> covariances -> update ->
  /// map insertion. Scans before the initialization period are skipped.
  /// Throws kWindowTooShort if the IMU does not cover the scan yet.
  ScanReport process_scan(const RawScan& scan);

  bool initialized() const { return initialized_; }
  const NavState& state() const { return state_; }
  const PointMap& map() const { return map_; }
  const RunConfig& config() const { return cfg_; }
  /// The most recent undistorted scan, with covariances, in the LiDAR frame.
  const UndistortedScan& last_scan() const { return last_scan_; }

 private:
  std::span<const ImuSample> imu_between(double t_a, double t_b) const;
  void initialize(double t0);

  RunConfig cfg_;
  std::vector<ImuSample> imu_;
  NavState state_;
  PointMap map_;
  bool initialized_ = false;
  std::size_t scan_count_ = 0;
  UndistortedScan last_scan_;
};

}  // namespace vlio
