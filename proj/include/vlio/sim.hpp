#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "vlio/propagation.hpp"
#include "vlio/scan.hpp"
#include "vlio/trajectory.hpp"
#include "vlio/uncertainty.hpp"

namespace vlio::sim {

inline const Vec3 kWorldGravity(0.0, 0.0, -9.81);

/// Finite parallelogram: corner + a * edge_u + b * edge_v, a, b in [0, 1].
struct Patch {
  Vec3 corner = Vec3::Zero();
  Vec3 edge_u = Vec3::UnitX();
  Vec3 edge_v = Vec3::UnitY();
};

struct SimWorld {
  std::vector<Patch> patches;

  /// Closed box room, x/y centered on the origin, floor at z = floor_z.
  static SimWorld room(const Vec3& size, double floor_z);

  /// Adds the six outer faces of an axis-aligned box.
  void add_box(const Vec3& center, const Vec3& size);

  void validate() const;

  /// Distance to the nearest patch along a unit direction, if within range.
  std::optional<double> raycast(const Vec3& origin, const Vec3& dir, double max_range) const;
};

/// Trapezoidal smooth (C2) window: 0 before `start`, 1 on the plateau, 0
/// after `stop`, quintic smoothstep ramps of length `ramp`.
struct Envelope {
  double start = 0.0;
  double stop = 0.0;
  double ramp = 0.0;

  double value(double t) const;
  double rate(double t) const;
  double accel(double t) const;
  /// Integral of value() from -inf to t.
  double integral(double t) const;
};

enum class VibAxis { kX, kY, kZ, kRoll, kPitch, kYaw };

std::string_view to_string(VibAxis axis);
VibAxis vib_axis_from_string(std::string_view s);

/// amplitude * sin(2 pi frequency (t - onset) + phase); translation terms in
/// metres along world axes, rotation terms in radians about body axes.
struct VibrationTerm {
  VibAxis axis = VibAxis::kZ;
  double amplitude = 0.0;
  double frequency = 0.0;  // Hz
  double phase = 0.0;      // rad
};

enum class BaseMotion { kStatic, kLinear, kCircle };

std::string_view to_string(BaseMotion motion);
BaseMotion base_motion_from_string(std::string_view s);

struct VibrationProfile {
  double duration = 10.0;
  BaseMotion motion = BaseMotion::kStatic;
  Vec3 direction = Vec3::UnitX();  // linear motion direction (unit)
  double speed = 0.0;              // m/s
  double radius = 1.0;             // m, circle
  Envelope motion_window;
  std::vector<VibrationTerm> terms;
  Envelope vibration_window;

  void validate() const;
};

struct KinematicState {
  double t = 0.0;
  RigidTransform pose;           // world <- IMU
  Vec3 vel = Vec3::Zero();       // world frame
  Vec3 omega = Vec3::Zero();     // body frame
  Vec3 accel = Vec3::Zero();     // world frame, excludes gravity
};

/// Closed-form pose and analytic derivatives. Throws kOutOfDuration.
KinematicState pose_at(const VibrationProfile& profile, double t);

struct LidarModel {
  int channels = 33;
  int columns = 320;
  double fov_up_deg = 45.0;
  double fov_down_deg = -45.0;
  double scan_period = 0.1;  // s
  double min_range = 0.3;    // m
  double max_range = 60.0;   // m
  BeamNoiseModel beam;
};

struct ImuModel {
  double rate = 100.0;  // Hz
  NoiseParams noise;
  Vec3 bias_gyro = Vec3::Zero();
  Vec3 bias_accel = Vec3::Zero();
  /// Extra noise std at full vibration envelope. White per sample when
  /// vib_noise_tau is 0, otherwise a first-order Gauss-Markov process with
  /// that correlation time.
  double vib_noise_gyro = 0.0;   // rad/s
  double vib_noise_accel = 0.0;  // m/s^2
  double vib_noise_tau = 0.0;    // s
};

struct SensorRig {
  RigidTransform extrinsics;  // I <- L
  LidarModel lidar;
  ImuModel imu;

  void validate() const;
};

struct RenderedScan {
  RawScan raw;
  UndistortedScan truth;  // noiseless, aligned with the true scan-start pose
};

/// Ray casts one sweep. Columns fire uniformly over the scan period in sweep
/// order, all channels of a column at the same instant.
RenderedScan render_scan(const SimWorld& world, const VibrationProfile& profile,
                         const SensorRig& rig, double t0, std::uint64_t seed);

/// IMU samples at k / rate for every stamp in [t0, t1]. Noise for stamp k
/// depends only on (seed, k).
ImuWindow synthesize_imu(const VibrationProfile& profile, const SensorRig& rig, double t0,
                         double t1, std::uint64_t seed);

struct Scenario {
  SimWorld world;
  VibrationProfile profile;
  SensorRig rig;
};

struct Dataset {
  ImuWindow imu;
  std::vector<RawScan> scans;
  Trajectory truth;  // IMU pose at each scan start
};

/// Scans start at n * scan_period for every scan that ends within duration.
Dataset generate_dataset(const Scenario& scenario, std::uint64_t seed);

}  // namespace vlio::sim
