#include "vlio/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "vlio/error.hpp"

namespace vlio::sim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double smoothstep(double x) { return x * x * x * (10.0 + x * (-15.0 + 6.0 * x)); }
double smoothstep_d1(double x) { return 30.0 * x * x * (1.0 - x) * (1.0 - x); }
double smoothstep_d2(double x) { return 60.0 * x * (1.0 - x) * (1.0 - 2.0 * x); }
// Integral of smoothstep from 0 to x.
double smoothstep_int(double x) { return x * x * x * x * (2.5 + x * (-3.0 + x)); }

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

Mat3 rot_z(double yaw) {
  const double c = std::cos(yaw), s = std::sin(yaw);
  Mat3 r;
  r << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
  return r;
}

int axis_index(VibAxis a) {
  switch (a) {
    case VibAxis::kX: case VibAxis::kRoll: return 0;
    case VibAxis::kY: case VibAxis::kPitch: return 1;
    case VibAxis::kZ: case VibAxis::kYaw: return 2;
  }
  return 0;
}

bool is_rotational(VibAxis a) {
  return a == VibAxis::kRoll || a == VibAxis::kPitch || a == VibAxis::kYaw;
}

}  // namespace

// ---------------------------------------------------------------- world

SimWorld SimWorld::room(const Vec3& size, double floor_z) {
  SimWorld w;
  w.add_box(Vec3(0.0, 0.0, floor_z + 0.5 * size.z()), size);
  return w;
}

void SimWorld::add_box(const Vec3& center, const Vec3& size) {
  const Vec3 lo = center - 0.5 * size;
  const Vec3 ex(size.x(), 0.0, 0.0), ey(0.0, size.y(), 0.0), ez(0.0, 0.0, size.z());
  patches.push_back({lo, ex, ey});
  patches.push_back({lo + ez, ex, ey});
  patches.push_back({lo, ex, ez});
  patches.push_back({lo + ey, ex, ez});
  patches.push_back({lo, ey, ez});
  patches.push_back({lo + ex, ey, ez});
}

void SimWorld::validate() const {
  for (std::size_t i = 0; i < patches.size(); ++i) {
    const Patch& p = patches[i];
    const double area = p.edge_u.cross(p.edge_v).norm();
    if (!(area > 1e-12 * p.edge_u.norm() * p.edge_v.norm()) || !(area > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "patch " + std::to_string(i) + " has parallel or zero edges");
    }
  }
}

std::optional<double> SimWorld::raycast(const Vec3& origin, const Vec3& dir,
                                        double max_range) const {
  std::optional<double> best;
  for (const Patch& p : patches) {
    // Moller-Trumbore on the parallelogram.
    const Vec3 pvec = dir.cross(p.edge_v);
    const double det = p.edge_u.dot(pvec);
    if (std::abs(det) < 1e-14) continue;
    const double inv = 1.0 / det;
    const Vec3 tvec = origin - p.corner;
    const double a = tvec.dot(pvec) * inv;
    if (a < 0.0 || a > 1.0) continue;
    const Vec3 qvec = tvec.cross(p.edge_u);
    const double b = dir.dot(qvec) * inv;
    if (b < 0.0 || b > 1.0) continue;
    const double d = p.edge_v.dot(qvec) * inv;
    if (d <= 1e-9 || d > max_range) continue;
    if (!best || d < *best) best = d;
  }
  return best;
}

// ---------------------------------------------------------------- envelope

double Envelope::value(double t) const {
  if (t < start || t > stop) return 0.0;
  if (ramp <= 0.0) return 1.0;
  if (t < start + ramp) return smoothstep((t - start) / ramp);
  if (t > stop - ramp) return 1.0 - smoothstep((t - (stop - ramp)) / ramp);
  return 1.0;
}

double Envelope::rate(double t) const {
  if (ramp <= 0.0 || t < start || t > stop) return 0.0;
  if (t < start + ramp) return smoothstep_d1((t - start) / ramp) / ramp;
  if (t > stop - ramp) return -smoothstep_d1((t - (stop - ramp)) / ramp) / ramp;
  return 0.0;
}

double Envelope::accel(double t) const {
  if (ramp <= 0.0 || t < start || t > stop) return 0.0;
  if (t < start + ramp) return smoothstep_d2((t - start) / ramp) / (ramp * ramp);
  if (t > stop - ramp) return -smoothstep_d2((t - (stop - ramp)) / ramp) / (ramp * ramp);
  return 0.0;
}

double Envelope::integral(double t) const {
  if (t <= start) return 0.0;
  const double tc = std::min(t, stop);
  if (ramp <= 0.0) return tc - start;
  if (tc < start + ramp) return ramp * smoothstep_int((tc - start) / ramp);
  const double up = 0.5 * ramp;
  if (tc <= stop - ramp) return up + (tc - start - ramp);
  const double x = (tc - (stop - ramp)) / ramp;
  return up + (stop - start - 2.0 * ramp) + ramp * (x - smoothstep_int(x));
}

// ---------------------------------------------------------------- profile

std::string_view to_string(VibAxis axis) {
  switch (axis) {
    case VibAxis::kX: return "x";
    case VibAxis::kY: return "y";
    case VibAxis::kZ: return "z";
    case VibAxis::kRoll: return "roll";
    case VibAxis::kPitch: return "pitch";
    case VibAxis::kYaw: return "yaw";
  }
  return "?";
}

VibAxis vib_axis_from_string(std::string_view s) {
  for (VibAxis a : {VibAxis::kX, VibAxis::kY, VibAxis::kZ, VibAxis::kRoll, VibAxis::kPitch,
                    VibAxis::kYaw}) {
    if (s == to_string(a)) return a;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown vibration axis '" + std::string(s) + "'");
}

std::string_view to_string(BaseMotion motion) {
  switch (motion) {
    case BaseMotion::kStatic: return "static";
    case BaseMotion::kLinear: return "linear";
    case BaseMotion::kCircle: return "circle";
  }
  return "?";
}

BaseMotion base_motion_from_string(std::string_view s) {
  for (BaseMotion m : {BaseMotion::kStatic, BaseMotion::kLinear, BaseMotion::kCircle}) {
    if (s == to_string(m)) return m;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown base motion '" + std::string(s) + "'");
}

namespace {

void validate_envelope(const Envelope& e, const char* name) {
  if (!(e.ramp >= 0.0) || !(e.stop >= e.start) || e.stop - e.start < 2.0 * e.ramp) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(name) + " window needs stop - start >= 2 * ramp >= 0");
  }
}

}  // namespace

void VibrationProfile::validate() const {
  if (!(duration > 0.0)) throw Error(ErrorCode::kInvalidArgument, "duration must be positive");
  if (!(speed >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "speed must be >= 0");
  if (motion == BaseMotion::kLinear && std::abs(direction.norm() - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument, "linear direction must be a unit vector");
  }
  if (motion == BaseMotion::kCircle && !(radius > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "circle radius must be positive");
  }
  validate_envelope(motion_window, "motion");
  validate_envelope(vibration_window, "vibration");
  for (const VibrationTerm& term : terms) {
    if (!(term.frequency >= 0.0) || !std::isfinite(term.amplitude) ||
        !std::isfinite(term.phase)) {
      throw Error(ErrorCode::kInvalidArgument, "vibration frequency must be >= 0");
    }
  }
}

KinematicState pose_at(const VibrationProfile& profile, double t) {
  if (!(t >= -1e-9 && t <= profile.duration + 1e-9)) {
    throw Error(ErrorCode::kOutOfDuration,
                "t = " + std::to_string(t) + " outside [0, " + std::to_string(profile.duration) +
                    "]");
  }
  KinematicState ks;
  ks.t = t;

  // Base trajectory.
  Vec3 p = Vec3::Zero(), v = Vec3::Zero(), a = Vec3::Zero();
  double yaw = 0.0, yaw_rate = 0.0;
  const Envelope& mw = profile.motion_window;
  switch (profile.motion) {
    case BaseMotion::kStatic:
      break;
    case BaseMotion::kLinear: {
      const Vec3 d = profile.direction;
      p = d * profile.speed * mw.integral(t);
      v = d * profile.speed * mw.value(t);
      a = d * profile.speed * mw.rate(t);
      break;
    }
    case BaseMotion::kCircle: {
      const double r = profile.radius;
      const double k = profile.speed / r;
      const double th = k * mw.integral(t);
      const double thd = k * mw.value(t);
      const double thdd = k * mw.rate(t);
      const double c = std::cos(th), s = std::sin(th);
      p = Vec3(r * s, r * (1.0 - c), 0.0);
      v = Vec3(r * thd * c, r * thd * s, 0.0);
      a = Vec3(r * thdd * c - r * thd * thd * s, r * thdd * s + r * thd * thd * c, 0.0);
      yaw = th;
      yaw_rate = thd;
      break;
    }
  }

  // Vibration terms.
  const Envelope& vw = profile.vibration_window;
  const double e = vw.value(t), ed = vw.rate(t), edd = vw.accel(t);
  Vec3 phi = Vec3::Zero(), phid = Vec3::Zero();
  for (const VibrationTerm& term : profile.terms) {
    const double w = kTwoPi * term.frequency;
    const double arg = w * (t - vw.start) + term.phase;
    const double sn = std::sin(arg), cs = std::cos(arg);
    const double q = e * term.amplitude * sn;
    const double qd = term.amplitude * (ed * sn + e * w * cs);
    const double qdd = term.amplitude * (edd * sn + 2.0 * ed * w * cs - e * w * w * sn);
    const int i = axis_index(term.axis);
    if (is_rotational(term.axis)) {
      phi[i] += q;
      phid[i] += qd;
    } else {
      p[i] += q;
      v[i] += qd;
      a[i] += qdd;
    }
  }

  const Rot3 r_phi = so3_exp(phi);
  ks.pose.rotation = Rot3::nearest(rot_z(yaw) * r_phi.matrix());
  ks.pose.translation = p;
  ks.vel = v;
  ks.accel = a;
  ks.omega = r_phi.inverse() * Vec3(0.0, 0.0, yaw_rate) + so3_right_jacobian(phi) * phid;
  return ks;
}

// ---------------------------------------------------------------- rig

void SensorRig::validate() const {
  if (!(lidar.scan_period > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "scan period must be positive");
  }
  if (!(imu.rate >= 10.0 / lidar.scan_period)) {
    throw Error(ErrorCode::kInvalidArgument, "IMU rate must be at least 10x the scan rate");
  }
  if (lidar.channels < 1 || lidar.columns < 1) {
    throw Error(ErrorCode::kInvalidArgument, "LiDAR needs at least one channel and column");
  }
  if (!(lidar.max_range > lidar.min_range) || lidar.min_range < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "invalid LiDAR range limits");
  }
  if (!(lidar.fov_up_deg >= lidar.fov_down_deg)) {
    throw Error(ErrorCode::kInvalidArgument, "fov_up must be >= fov_down");
  }
  if (!(lidar.beam.sigma_range >= 0.0) || !(lidar.beam.sigma_bearing >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "beam noise must be >= 0");
  }
  if (!(imu.vib_noise_gyro >= 0.0) || !(imu.vib_noise_accel >= 0.0) ||
      !(imu.vib_noise_tau >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "vibration noise must be >= 0");
  }
  imu.noise.validate();
}

// ---------------------------------------------------------------- sensors

RenderedScan render_scan(const SimWorld& world, const VibrationProfile& profile,
                         const SensorRig& rig, double t0, std::uint64_t seed) {
  const LidarModel& lm = rig.lidar;
  if (t0 < -1e-9 || t0 + lm.scan_period > profile.duration + 1e-9) {
    throw Error(ErrorCode::kOutOfDuration, "scan exceeds the profile duration");
  }
  const auto t0_us = static_cast<std::uint64_t>(std::llround(t0 * 1e6));
  std::mt19937_64 rng = make_rng(seed, 0x5ca9, t0_us);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<double> elevation(lm.channels);
  const double down = lm.fov_down_deg * std::numbers::pi / 180.0;
  const double up = lm.fov_up_deg * std::numbers::pi / 180.0;
  for (int i = 0; i < lm.channels; ++i) {
    elevation[i] = lm.channels == 1 ? 0.5 * (down + up)
                                    : down + (up - down) * i / static_cast<double>(lm.channels - 1);
  }

  const RigidTransform start_pose = pose_at(profile, t0).pose * rig.extrinsics;
  const RigidTransform start_inv = start_pose.inverse();

  RenderedScan out;
  out.raw.t0 = t0;
  out.truth.t0 = t0;
  for (int c = 0; c < lm.columns; ++c) {
    const double dt = lm.scan_period * c / static_cast<double>(lm.columns);
    const RigidTransform pose_l = pose_at(profile, t0 + dt).pose * rig.extrinsics;
    const RigidTransform rel = start_inv * pose_l;
    const double az = kTwoPi * c / static_cast<double>(lm.columns);
    for (int i = 0; i < lm.channels; ++i) {
      const double el = elevation[i];
      const Vec3 dir_l(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
      const Vec3 dir_w = pose_l.rotation * dir_l;
      // Noise draws happen for every beam so the stream does not depend on hits.
      const double n_d = gauss(rng) * lm.beam.sigma_range;
      const double n_a = gauss(rng) * lm.beam.sigma_bearing;
      const double n_b = gauss(rng) * lm.beam.sigma_bearing;
      const auto hit = world.raycast(pose_l.translation, dir_w, lm.max_range);
      if (!hit || *hit < lm.min_range) continue;

      const Vec3 exact = *hit * dir_l;
      Vec3 noisy = exact;
      if (lm.beam.sigma_range > 0.0 || lm.beam.sigma_bearing > 0.0) {
        const Vec3 e1 = Vec3(-std::sin(az), std::cos(az), 0.0);
        const Vec3 e2 = dir_l.cross(e1);
        const Vec3 dir_noisy = (dir_l + n_a * e1 + n_b * e2).normalized();
        noisy = (*hit + n_d) * dir_noisy;
      }
      out.raw.points.push_back({noisy, dt});

      UndistortedPoint gt;
      gt.position = rel.apply(exact);
      gt.raw = exact;
      gt.dt = dt;
      gt.rotation = rel.rotation.matrix();
      out.truth.points.push_back(gt);
    }
  }
  return out;
}

ImuWindow synthesize_imu(const VibrationProfile& profile, const SensorRig& rig, double t0,
                         double t1, std::uint64_t seed) {
  if (!(t1 > t0)) throw Error(ErrorCode::kInvalidArgument, "synthesize_imu needs t1 > t0");
  const ImuModel& im = rig.imu;
  const auto k0 = static_cast<std::int64_t>(std::ceil(t0 * im.rate - 1e-9));
  const auto k1 = static_cast<std::int64_t>(std::floor(t1 * im.rate + 1e-9));
  const double sg = im.noise.sigma_gyro * std::sqrt(im.rate);
  const double sa = im.noise.sigma_accel * std::sqrt(im.rate);

  // Unit-variance Gauss-Markov state, always run from sample 0 so a window
  // does not depend on where it starts.
  const bool colored = im.vib_noise_tau > 0.0;
  const double phi = colored ? std::exp(-1.0 / (im.rate * im.vib_noise_tau)) : 0.0;
  Eigen::Matrix<double, 6, 1> gm = Eigen::Matrix<double, 6, 1>::Zero();
  auto advance_gm = [&](std::int64_t k) {
    std::mt19937_64 rng = make_rng(seed, 0x1b0, static_cast<std::uint64_t>(k));
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double w = k == 0 ? 1.0 : std::sqrt(1.0 - phi * phi);
    for (int i = 0; i < 6; ++i) gm[i] = (k == 0 ? 0.0 : phi * gm[i]) + w * gauss(rng);
  };
  if (colored) {
    for (std::int64_t k = 0; k < k0; ++k) advance_gm(k);
  }

  ImuWindow out;
  out.reserve(static_cast<std::size_t>(std::max<std::int64_t>(0, k1 - k0 + 1)));
  for (std::int64_t k = k0; k <= k1; ++k) {
    const double t = std::min(static_cast<double>(k) / im.rate, profile.duration);
    const KinematicState ks = pose_at(profile, t);
    const double env = profile.vibration_window.value(t);
    const double std_g = colored ? sg : std::hypot(sg, im.vib_noise_gyro * env);
    const double std_a = colored ? sa : std::hypot(sa, im.vib_noise_accel * env);

    ImuSample s;
    s.t = static_cast<double>(k) / im.rate;
    s.gyro = ks.omega + im.bias_gyro;
    s.accel = ks.pose.rotation.inverse() * (ks.accel - kWorldGravity) + im.bias_accel;
    if (std_g > 0.0 || std_a > 0.0) {
      std::mt19937_64 rng = make_rng(seed, 0x1a0, static_cast<std::uint64_t>(k));
      std::normal_distribution<double> gauss(0.0, 1.0);
      for (int i = 0; i < 3; ++i) s.gyro[i] += std_g * gauss(rng);
      for (int i = 0; i < 3; ++i) s.accel[i] += std_a * gauss(rng);
    }
    if (colored) {
      advance_gm(k);
      for (int i = 0; i < 3; ++i) s.gyro[i] += im.vib_noise_gyro * env * gm[i];
      for (int i = 0; i < 3; ++i) s.accel[i] += im.vib_noise_accel * env * gm[3 + i];
    }
    out.push_back(s);
  }
  return out;
}

Dataset generate_dataset(const Scenario& scenario, std::uint64_t seed) {
  scenario.world.validate();
  scenario.profile.validate();
  scenario.rig.validate();
  const double period = scenario.rig.lidar.scan_period;
  const double duration = scenario.profile.duration;

  Dataset ds;
  ds.imu = synthesize_imu(scenario.profile, scenario.rig, 0.0, duration, seed);
  for (std::int64_t n = 0;; ++n) {
    const double t0 = static_cast<double>(n) * period;
    if (t0 + period > duration + 1e-9) break;
    ds.scans.push_back(render_scan(scenario.world, scenario.profile, scenario.rig, t0, seed).raw);
    ds.truth.push_back({t0, pose_at(scenario.profile, t0).pose});
  }
  return ds;
}

}  // namespace vlio::sim
