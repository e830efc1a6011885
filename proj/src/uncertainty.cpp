#include "vlio/uncertainty.hpp"

#include <cmath>
#include <string>

#include "vlio/error.hpp"

namespace vlio {

namespace {

/// Running mean; exact when all inputs are identical.
Vec3 running_mean(std::span<const Vec3> xs) {
  Vec3 m = Vec3::Zero();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    m += (xs[i] - m) / static_cast<double>(i + 1);
  }
  return m;
}

Vec3 spread(std::span<const Vec3> xs, std::span<const double> ts, const Vec3& mean,
            DeviationMode mode) {
  const double n = static_cast<double>(xs.size());
  switch (mode) {
    case DeviationMode::kMad: {
      Vec3 acc = Vec3::Zero();
      for (const Vec3& x : xs) acc += (x - mean).cwiseAbs();
      return acc / n;
    }
    case DeviationMode::kStd: {
      Vec3 acc = Vec3::Zero();
      for (const Vec3& x : xs) acc += (x - mean).cwiseAbs2();
      return (acc / n).cwiseSqrt();
    }
    case DeviationMode::kLls: {
      double t_mean = 0.0;
      for (double t : ts) t_mean += t;
      t_mean /= n;
      double stt = 0.0;
      Vec3 sxt = Vec3::Zero();
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dt = ts[i] - t_mean;
        stt += dt * dt;
        sxt += dt * (xs[i] - mean);
      }
      const Vec3 slope = stt > 0.0 ? Vec3(sxt / stt) : Vec3(Vec3::Zero());
      Vec3 acc = Vec3::Zero();
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const Vec3 r = xs[i] - mean - slope * (ts[i] - t_mean);
        acc += r.cwiseAbs2();
      }
      return (acc / n).cwiseSqrt();
    }
  }
  return Vec3::Zero();
}

}  // namespace

std::string_view to_string(DeviationMode mode) {
  switch (mode) {
    case DeviationMode::kMad: return "MAD";
    case DeviationMode::kStd: return "STD";
    case DeviationMode::kLls: return "LLS";
  }
  return "?";
}

DeviationMode deviation_mode_from_string(std::string_view s) {
  if (s == "MAD" || s == "mad") return DeviationMode::kMad;
  if (s == "STD" || s == "std") return DeviationMode::kStd;
  if (s == "LLS" || s == "lls") return DeviationMode::kLls;
  throw Error(ErrorCode::kInvalidArgument, "unknown deviation mode '" + std::string(s) + "'");
}

void UncertaintyConfig::validate() const {
  if (!(gamma > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "gamma must be positive");
  }
}

std::vector<LidarVelocity> lidar_frame_velocities(std::span<const ImuSample> window,
                                                  const PoseTimeline& timeline,
                                                  const RigidTransform& extrinsics) {
  const Mat3 r_li = extrinsics.rotation.matrix().transpose();
  std::vector<LidarVelocity> out;
  out.reserve(window.size());
  for (const ImuSample& s : window) {
    if (s.t < timeline.start_time() - 1e-9 || s.t > timeline.end_time() + 1e-9) continue;
    const PoseSample pose = timeline.at(s.t);
    // pose.vel is in the scan-start frame; R_rel^T brings it to the IMU frame at s.t.
    const Vec3 v_imu = pose.rot.matrix().transpose() * pose.vel;
    out.push_back({s.t, r_li * s.gyro, r_li * v_imu});
  }
  return out;
}

VibrationIntensity vibration_intensity(std::span<const LidarVelocity> velocities,
                                       DeviationMode mode) {
  if (velocities.size() < 2) {
    throw Error(ErrorCode::kInsufficientSamples,
                "need at least 2 IMU samples, got " + std::to_string(velocities.size()));
  }
  std::vector<Vec3> omegas, vs;
  std::vector<double> ts;
  omegas.reserve(velocities.size());
  vs.reserve(velocities.size());
  ts.reserve(velocities.size());
  for (const LidarVelocity& lv : velocities) {
    omegas.push_back(lv.omega);
    vs.push_back(lv.v);
    ts.push_back(lv.t);
  }
  VibrationIntensity out;
  out.omega_ave = running_mean(omegas);
  out.v_ave = running_mean(vs);
  out.k_omega = spread(omegas, ts, out.omega_ave, mode);
  out.k_v = spread(vs, ts, out.v_ave, mode);
  return out;
}

PointSigmas point_sigmas(const VibrationIntensity& intensity, double dt_j0,
                         const UncertaintyConfig& cfg) {
  if (dt_j0 < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "negative point time offset");
  }
  const double scale = cfg.gamma * dt_j0;
  return {scale * intensity.k_omega, scale * intensity.k_v};
}

Mat3 rotational_covariance(const Vec3& p, const Vec3& sigma_r) {
  const Mat3 k = skew(p);
  return k * sigma_r.cwiseAbs2().asDiagonal() * k.transpose();
}

Eigen::Matrix<double, 3, 2> tangent_basis(const Vec3& bearing) {
  int axis = 0;
  bearing.cwiseAbs().minCoeff(&axis);
  Vec3 seed = Vec3::Zero();
  seed[axis] = 1.0;
  const Vec3 o1 = (seed - seed.dot(bearing) * bearing).normalized();
  const Vec3 o2 = bearing.cross(o1);
  Eigen::Matrix<double, 3, 2> basis;
  basis << o1, o2;
  return basis;
}

Mat3 measurement_covariance(const Vec3& p_raw, const BeamNoiseModel& beam) {
  const double d = p_raw.norm();
  if (!(d > 0.0)) {
    throw Error(ErrorCode::kZeroRangePoint, "point at the sensor origin");
  }
  const Vec3 phi = p_raw / d;
  Mat3 a;
  a.col(0) = phi;
  a.rightCols<2>() = -d * skew(phi) * tangent_basis(phi);
  const Vec3 var(beam.sigma_range * beam.sigma_range, beam.sigma_bearing * beam.sigma_bearing,
                 beam.sigma_bearing * beam.sigma_bearing);
  return a * var.asDiagonal() * a.transpose();
}

PointCovariance total_covariance(const UndistortedPoint& p, const Vec3& sigma_r,
                                 const Vec3& sigma_T, const BeamNoiseModel& beam) {
  PointCovariance c;
  c.sigma_rot = rotational_covariance(p.position, sigma_r);
  c.sigma_trans = sigma_T.cwiseAbs2().asDiagonal();
  c.sigma_meas = measurement_covariance(p.raw, beam);
  const Mat3 meas_rotated = p.rotation * c.sigma_meas * p.rotation.transpose();
  c.total = c.sigma_rot + c.sigma_trans + meas_rotated;
  c.total = 0.5 * (c.total + c.total.transpose()).eval();
  return c;
}

void assign_covariances(UndistortedScan& scan, const VibrationIntensity& intensity,
                        const UncertaintyConfig& cfg, const BeamNoiseModel& beam,
                        bool include_motion) {
  for (UndistortedPoint& p : scan.points) {
    if (include_motion) {
      const PointSigmas s = point_sigmas(intensity, p.dt, cfg);
      p.cov = total_covariance(p, s.rot, s.trans, beam).total;
    } else {
      const Mat3 meas = measurement_covariance(p.raw, beam);
      p.cov = p.rotation * meas * p.rotation.transpose();
      p.cov = 0.5 * (p.cov + p.cov.transpose()).eval();
    }
  }
}

}  // namespace vlio
