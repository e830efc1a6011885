#include "vlio/propagation.hpp"

#include <algorithm>
#include <string>

#include "vlio/error.hpp"

namespace vlio {

namespace {

constexpr double kTimeTol = 1e-9;

void check_monotonic(std::span<const ImuSample> window) {
  for (std::size_t i = 1; i < window.size(); ++i) {
    if (!(window[i].t > window[i - 1].t)) {
      throw Error(ErrorCode::kNonMonotonicTimestamps,
                  "IMU sample " + std::to_string(i) + " is not after its predecessor");
    }
  }
}

struct Reading {
  Vec3 gyro;
  Vec3 accel;
};

/// Piecewise-linear IMU reading, held constant outside the window.
Reading reading_at(std::span<const ImuSample> window, double t) {
  if (t <= window.front().t) return {window.front().gyro, window.front().accel};
  if (t >= window.back().t) return {window.back().gyro, window.back().accel};
  const auto it = std::upper_bound(window.begin(), window.end(), t,
                                   [](double v, const ImuSample& s) { return v < s.t; });
  const ImuSample& b = *it;
  const ImuSample& a = *(it - 1);
  if (t == a.t) return {a.gyro, a.accel};
  const double s = (t - a.t) / (b.t - a.t);
  return {a.gyro + s * (b.gyro - a.gyro), a.accel + s * (b.accel - a.accel)};
}

/// Calls f(t_a, t_b, mid_gyro, mid_accel) over consecutive knots of
/// [t_begin, t_end]; knots are the end points plus all interior stamps.
template <class F>
void for_each_segment(std::span<const ImuSample> window, double t_begin, double t_end, F&& f) {
  double ta = t_begin;
  Reading ra = reading_at(window, ta);
  auto it = std::upper_bound(window.begin(), window.end(), t_begin,
                             [](double v, const ImuSample& s) { return v < s.t; });
  for (; it != window.end() && it->t < t_end; ++it) {
    const Reading rb{it->gyro, it->accel};
    f(ta, it->t, 0.5 * (ra.gyro + rb.gyro), 0.5 * (ra.accel + rb.accel));
    ta = it->t;
    ra = rb;
  }
  if (t_end > ta) {
    const Reading rb = reading_at(window, t_end);
    f(ta, t_end, 0.5 * (ra.gyro + rb.gyro), 0.5 * (ra.accel + rb.accel));
  }
}

void integrate_mean(NavState& x, double dt, const Vec3& gyro, const Vec3& accel) {
  const Vec3 w = gyro - x.bias_gyro;
  const Vec3 a = accel - x.bias_accel;
  const Rot3 r_mid = x.rot * so3_exp(0.5 * dt * w);
  const Vec3 acc_world = r_mid * a + x.gravity;
  x.pos += x.vel * dt + 0.5 * dt * dt * acc_world;
  x.vel += dt * acc_world;
  x.rot = x.rot * so3_exp(dt * w);
}

StateMat transition_jacobian(const NavState& x, double dt, const Vec3& gyro,
                             const Vec3& accel) {
  const Vec3 w = gyro - x.bias_gyro;
  const Vec3 a = accel - x.bias_accel;
  const Mat3& r = x.rot.matrix();
  const Mat3 ra_skew = r * skew(a);

  StateMat f = StateMat::Identity();
  f.block<3, 3>(kRotIdx, kRotIdx) = so3_exp(-dt * w).matrix();
  f.block<3, 3>(kRotIdx, kBiasGyroIdx) = -so3_right_jacobian(dt * w) * dt;
  f.block<3, 3>(kPosIdx, kRotIdx) = -0.5 * dt * dt * ra_skew;
  f.block<3, 3>(kPosIdx, kVelIdx) = Mat3::Identity() * dt;
  f.block<3, 3>(kPosIdx, kBiasAccelIdx) = -0.5 * dt * dt * r;
  f.block<3, 3>(kVelIdx, kRotIdx) = -dt * ra_skew;
  f.block<3, 3>(kVelIdx, kBiasAccelIdx) = -dt * r;
  return f;
}

}  // namespace

void NoiseParams::validate() const {
  if (sigma_gyro < 0.0 || sigma_accel < 0.0 || sigma_bias_gyro_walk < 0.0 ||
      sigma_bias_accel_walk < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "noise densities must be non-negative");
  }
}

PoseTimeline::PoseTimeline(std::vector<PoseSample> samples) : samples_(std::move(samples)) {
  if (samples_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty pose timeline");
  }
  for (std::size_t i = 1; i < samples_.size(); ++i) {
    if (!(samples_[i].t > samples_[i - 1].t)) {
      throw Error(ErrorCode::kNonMonotonicTimestamps, "pose timeline not increasing");
    }
  }
}

PoseSample PoseTimeline::at(double t) const {
  if (t < start_time() - kTimeTol || t > end_time() + kTimeTol) {
    throw Error(ErrorCode::kTimestampOutOfRange,
                "t=" + std::to_string(t) + " outside timeline [" + std::to_string(start_time()) +
                    ", " + std::to_string(end_time()) + "]");
  }
  if (t <= start_time()) return samples_.front();
  if (t >= end_time()) return samples_.back();
  const auto it = std::upper_bound(samples_.begin(), samples_.end(), t,
                                   [](double v, const PoseSample& s) { return v < s.t; });
  const PoseSample& b = *it;
  const PoseSample& a = *(it - 1);
  const double s = (t - a.t) / (b.t - a.t);
  PoseSample out;
  out.t = t;
  out.rot = a.rot * so3_exp(s * so3_log(a.rot.inverse() * b.rot));
  out.pos = a.pos + s * (b.pos - a.pos);
  out.vel = a.vel + s * (b.vel - a.vel);
  return out;
}

NavState propagate(const NavState& state, std::span<const ImuSample> window,
                   const NoiseParams& noise, double t_end) {
  if (window.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty IMU window");
  }
  check_monotonic(window);
  if (t_end < state.t) {
    throw Error(ErrorCode::kNonMonotonicTimestamps, "propagation target precedes state time");
  }

  NavState x = state;
  const double qg = noise.sigma_gyro * noise.sigma_gyro;
  const double qa = noise.sigma_accel * noise.sigma_accel;
  const double qbg = noise.sigma_bias_gyro_walk * noise.sigma_bias_gyro_walk;
  const double qba = noise.sigma_bias_accel_walk * noise.sigma_bias_accel_walk;

  for_each_segment(window, state.t, t_end,
                   [&](double ta, double tb, const Vec3& gyro, const Vec3& accel) {
                     const double dt = tb - ta;
                     const StateMat f = transition_jacobian(x, dt, gyro, accel);
                     StateMat p = f * x.cov * f.transpose();
                     p.diagonal().segment<3>(kRotIdx).array() += qg * dt;
                     p.diagonal().segment<3>(kVelIdx).array() += qa * dt;
                     p.diagonal().segment<3>(kBiasGyroIdx).array() += qbg * dt;
                     p.diagonal().segment<3>(kBiasAccelIdx).array() += qba * dt;
                     x.cov = 0.5 * (p + p.transpose());
                     integrate_mean(x, dt, gyro, accel);
                   });
  x.t = t_end;
  return x;
}

NavState propagate(const NavState& state, std::span<const ImuSample> window,
                   const NoiseParams& noise) {
  if (window.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty IMU window");
  }
  return propagate(state, window, noise, window.back().t);
}

PoseTimeline build_pose_timeline(const NavState& state, std::span<const ImuSample> window,
                                 double t_end) {
  if (window.empty() || window.front().t > state.t + kTimeTol ||
      window.back().t < t_end - kTimeTol) {
    throw Error(ErrorCode::kWindowTooShort, "IMU window does not cover the scan interval");
  }
  check_monotonic(window);

  const Rot3 r0_inv = state.rot.inverse();
  const Vec3 p0 = state.pos;
  NavState x = state;
  std::vector<PoseSample> samples;
  samples.push_back({state.t, Rot3::identity(), Vec3::Zero(), r0_inv * state.vel});
  for_each_segment(window, state.t, t_end,
                   [&](double ta, double tb, const Vec3& gyro, const Vec3& accel) {
                     integrate_mean(x, tb - ta, gyro, accel);
                     samples.push_back({tb, r0_inv * x.rot, r0_inv * (x.pos - p0), r0_inv * x.vel});
                   });
  return PoseTimeline(std::move(samples));
}

UndistortedScan undistort(const RawScan& scan, const PoseTimeline& timeline,
                          const RigidTransform& extrinsics) {
  const Mat3& r_il = extrinsics.rotation.matrix();
  const Mat3 r_li = r_il.transpose();
  const Vec3& t_il = extrinsics.translation;

  UndistortedScan out;
  out.t0 = scan.t0;
  out.points.reserve(scan.points.size());
  for (const RawPoint& raw : scan.points) {
    if (raw.dt < -kTimeTol) {
      throw Error(ErrorCode::kTimestampOutOfRange, "point precedes scan start");
    }
    const PoseSample m = timeline.at(scan.t0 + raw.dt);
    // LiDAR motion from the IMU motion: T_L = T_IL^-1 * T_I * T_IL.
    const Mat3 r_l = r_li * m.rot.matrix() * r_il;
    const Vec3 t_l = r_li * (m.rot * t_il + m.pos - t_il);

    UndistortedPoint p;
    p.raw = raw.position;
    p.dt = std::max(raw.dt, 0.0);
    p.rotation = r_l;
    p.position = r_l * raw.position + t_l;
    out.points.push_back(p);
  }
  return out;
}

RawScan downsample_stride(const RawScan& scan, std::size_t stride) {
  if (stride == 0) {
    throw Error(ErrorCode::kInvalidArgument, "stride must be positive");
  }
  RawScan out;
  out.t0 = scan.t0;
  out.points.reserve(scan.points.size() / stride + 1);
  for (std::size_t i = 0; i < scan.points.size(); i += stride) {
    out.points.push_back(scan.points[i]);
  }
  return out;
}

}  // namespace vlio
