#include "vlio/odometry.hpp"

#include <algorithm>
#include <chrono>

#include "vlio/error.hpp"

namespace vlio {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

void RunConfig::validate() const {
  uncertainty.validate();
  ikf.validate();
  imu_noise.validate();
  if (!(map_resolution > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "map_resolution must be positive");
  }
  if (downsample_stride < 1) {
    throw Error(ErrorCode::kInvalidArgument, "downsample_stride must be >= 1");
  }
  if (!(min_range >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "min_range must be >= 0");
  if (!(beam.sigma_range >= 0.0) || !(beam.sigma_bearing >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "beam noise must be >= 0");
  }
  if (!(init.duration > 0.0) || !(init.rot_std >= 0.0) || !(init.pos_std >= 0.0) ||
      !(init.vel_std >= 0.0) || !(init.bias_gyro_std >= 0.0) || !(init.bias_accel_std >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid initialization parameters");
  }
  if (!extrinsics.rotation.is_valid(1e-6)) {
    throw Error(ErrorCode::kInvalidArgument, "extrinsic rotation is not orthonormal");
  }
}

std::string_view to_string(ScanStatus status) {
  switch (status) {
    case ScanStatus::kSkipped: return "skipped";
    case ScanStatus::kInitialized: return "initialized";
    case ScanStatus::kUpdated: return "updated";
    case ScanStatus::kNoValidMatches: return "no_valid_matches";
  }
  return "?";
}

Odometry::Odometry(RunConfig cfg) : cfg_(std::move(cfg)), map_(cfg_.map_resolution) {
  cfg_.validate();
}

void Odometry::add_imu(const ImuSample& sample) {
  if (!imu_.empty() && !(sample.t > imu_.back().t)) {
    throw Error(ErrorCode::kNonMonotonicTimestamps, "IMU samples must arrive in time order");
  }
  imu_.push_back(sample);
}

void Odometry::add_imu(std::span<const ImuSample> samples) {
  for (const ImuSample& s : samples) add_imu(s);
}

std::span<const ImuSample> Odometry::imu_between(double t_a, double t_b) const {
  // Last sample at or before t_a through the first sample at or after t_b.
  auto lo = std::upper_bound(imu_.begin(), imu_.end(), t_a,
                             [](double v, const ImuSample& s) { return v < s.t; });
  auto hi = std::lower_bound(imu_.begin(), imu_.end(), t_b - 1e-9,
                             [](const ImuSample& s, double v) { return s.t < v; });
  if (lo == imu_.begin() || hi == imu_.end()) {
    throw Error(ErrorCode::kWindowTooShort, "IMU does not cover [" + std::to_string(t_a) + ", " +
                                                std::to_string(t_b) + "]");
  }
  --lo;
  return {&*lo, static_cast<std::size_t>(hi - lo) + 1};
}

void Odometry::initialize(double t0) {
  const double t_first = imu_.front().t;
  Vec3 gyro = Vec3::Zero(), accel = Vec3::Zero();
  std::size_t n = 0;
  for (const ImuSample& s : imu_) {
    if (s.t > t_first + cfg_.init.duration + 1e-9) break;
    gyro += s.gyro;
    accel += s.accel;
    ++n;
  }
  NavState x;
  x.t = t0;
  x.bias_gyro = gyro / static_cast<double>(n);
  x.gravity = -accel / static_cast<double>(n);
  const double g = x.gravity.norm();
  if (!(g >= 9.5 && g <= 10.1)) {
    throw Error(ErrorCode::kInvalidArgument,
                "static initialization found gravity magnitude " + std::to_string(g));
  }
  x.cov.setZero();
  const auto set = [&](int idx, double sd) {
    x.cov.diagonal().segment<3>(idx).setConstant(sd * sd);
  };
  set(kRotIdx, cfg_.init.rot_std);
  set(kPosIdx, cfg_.init.pos_std);
  set(kVelIdx, cfg_.init.vel_std);
  set(kBiasGyroIdx, cfg_.init.bias_gyro_std);
  set(kBiasAccelIdx, cfg_.init.bias_accel_std);
  state_ = x;
  initialized_ = true;
}

ScanReport Odometry::process_scan(const RawScan& scan) {
  const auto t_start = Clock::now();
  ScanReport rep;
  rep.index = scan_count_;
  rep.t0 = scan.t0;
  rep.raw_points = scan.points.size();
  if (!initialized_ &&
      (imu_.empty() || scan.t0 < imu_.front().t + cfg_.init.duration - 1e-9)) {
    ++scan_count_;
    return rep;
  }
  if (initialized_ && !(scan.t0 > state_.t)) {
    throw Error(ErrorCode::kNonMonotonicTimestamps, "scans must arrive in time order");
  }

  RawScan ds = downsample_stride(scan, cfg_.downsample_stride);
  const double min_r2 = std::max(cfg_.min_range * cfg_.min_range, 1e-12);
  std::erase_if(ds.points, [&](const RawPoint& p) {
    return !(p.position.squaredNorm() > min_r2) || !(p.dt >= 0.0);
  });
  double max_dt = 0.0;
  for (const RawPoint& p : ds.points) max_dt = std::max(max_dt, p.dt);
  const double t_end = scan.t0 + std::max(max_dt, 1e-6);

  // Coverage is checked before any state changes.
  const std::span<const ImuSample> scan_window = imu_between(scan.t0, t_end);
  const bool first = !initialized_;
  NavState prior;
  auto t = Clock::now();
  if (first) {
    initialize(scan.t0);
    prior = state_;
  } else {
    prior = propagate(state_, imu_between(state_.t, t_end), cfg_.imu_noise, scan.t0);
  }
  rep.timing.propagate_ms = ms_since(t);

  t = Clock::now();
  const PoseTimeline timeline = build_pose_timeline(prior, scan_window, t_end);
  UndistortedScan und = undistort(ds, timeline, cfg_.extrinsics);
  rep.timing.undistort_ms = ms_since(t);
  rep.points = und.points.size();

  t = Clock::now();
  VibrationIntensity intensity;
  const std::vector<LidarVelocity> vel =
      lidar_frame_velocities(scan_window, timeline, cfg_.extrinsics);
  if (vel.size() >= 2) intensity = vibration_intensity(vel, cfg_.uncertainty.deviation_mode);
  assign_covariances(und, intensity, cfg_.uncertainty, cfg_.beam, cfg_.uncertainty_enabled);
  rep.k_omega = intensity.k_omega;
  rep.k_v = intensity.k_v;
  rep.timing.uncertainty_ms = ms_since(t);

  t = Clock::now();
  bool insert = true;
  if (first) {
    rep.status = ScanStatus::kInitialized;
  } else {
    try {
      const IkfResult res = ikf_update(prior, und, map_, cfg_.ikf, cfg_.extrinsics);
      state_ = res.state;
      rep.status = ScanStatus::kUpdated;
      rep.iterations = res.iterations;
      rep.valid = res.valid;
      rep.mean_weight = res.mean_weight;
      rep.converged = res.converged;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNoValidMatches && e.code() != ErrorCode::kEmptyMap) throw;
      state_ = prior;
      rep.status = ScanStatus::kNoValidMatches;
      insert = false;
    }
  }
  rep.timing.update_ms = ms_since(t);

  t = Clock::now();
  if (insert) map_.insert_scan(und, state_.pose() * cfg_.extrinsics);
  rep.timing.map_ms = ms_since(t);
  rep.map_size = map_.size();

  // Samples older than the state are no longer needed.
  const auto keep = std::upper_bound(imu_.begin(), imu_.end(), state_.t - 1.0,
                                     [](double v, const ImuSample& s) { return v < s.t; });
  if (keep - imu_.begin() > 4096) imu_.erase(imu_.begin(), keep);

  last_scan_ = std::move(und);
  rep.state = state_;
  ++scan_count_;
  rep.timing.total_ms = ms_since(t_start);
  return rep;
}

}  // namespace vlio
