#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "vlio/error.hpp"
#include "vlio/sim.hpp"
#include "vlio/uncertainty.hpp"

namespace vlio {
namespace {

std::vector<LidarVelocity> series(const std::vector<double>& wz) {
  std::vector<LidarVelocity> v;
  for (std::size_t i = 0; i < wz.size(); ++i) {
    LidarVelocity s;
    s.t = 0.01 * static_cast<double>(i);
    s.omega = Vec3(0, 0, wz[i]);
    v.push_back(s);
  }
  return v;
}

TEST(LidarVelocities, ExtrinsicRotation) {
  NavState x;
  ImuWindow w;
  for (int k = 0; k <= 10; ++k) w.push_back({0.01 * k, Vec3(1, 0, 0), -x.gravity});
  const PoseTimeline tl = build_pose_timeline(x, w, 0.1);
  const RigidTransform ext{so3_exp(Vec3(0, 0, std::numbers::pi / 2)), Vec3::Zero()};
  const auto v = lidar_frame_velocities(w, tl, ext);
  ASSERT_EQ(v.size(), w.size());
  for (const auto& s : v) EXPECT_LT((s.omega - Vec3(0, -1, 0)).norm(), 1e-12);
}

TEST(LidarVelocities, IdentityExtrinsicsGiveBodyVelocity) {
  NavState x;
  x.vel = Vec3(1.0, 0.5, 0.0);
  x.rot = so3_exp(Vec3(0, 0, 0.4));
  ImuWindow w;
  for (int k = 0; k <= 10; ++k) w.push_back({0.01 * k, Vec3(0, 0, 0.2), x.rot.inverse() * -x.gravity});
  const auto v = lidar_frame_velocities(w, build_pose_timeline(x, w, 0.1), RigidTransform{});
  // At the scan start the LiDAR-frame velocity is R^T v_G.
  EXPECT_LT((v.front().v - x.rot.inverse() * x.vel).norm(), 1e-12);
  EXPECT_LT((v.front().omega - Vec3(0, 0, 0.2)).norm(), 1e-12);
}

TEST(LidarVelocities, StationarySimulatorNearZero) {
  sim::Scenario sc;
  sc.rig.imu.rate = 200.0;
  const ImuWindow w = sim::synthesize_imu(sc.profile, sc.rig, 1.0, 1.1, 3);
  NavState x;
  x.t = 1.0;
  x.rot = Rot3::identity();
  x.gravity = sim::kWorldGravity;
  const auto v = lidar_frame_velocities(w, build_pose_timeline(x, w, 1.1), RigidTransform{});
  // Accelerometer noise integrated over 0.1 s.
  const double floor = 4.0 * sc.rig.imu.noise.sigma_accel * std::sqrt(sc.rig.imu.rate) * 0.1;
  for (const auto& s : v) EXPECT_LT(s.v.norm(), floor);
}

TEST(Intensity, ConstantIsZero) {
  for (DeviationMode m : {DeviationMode::kMad, DeviationMode::kStd, DeviationMode::kLls}) {
    const auto k = vibration_intensity(series({0.7, 0.7, 0.7, 0.7}), m);
    EXPECT_EQ(k.k_omega, Vec3::Zero());
    EXPECT_EQ(k.k_v, Vec3::Zero());
  }
}

TEST(Intensity, AlternatingHandComputed) {
  const auto s = series({1, -1, 1, -1});
  EXPECT_NEAR(vibration_intensity(s, DeviationMode::kMad).k_omega.z(), 1.0, 1e-15);
  EXPECT_NEAR(vibration_intensity(s, DeviationMode::kStd).k_omega.z(), 1.0, 1e-15);
  EXPECT_EQ(vibration_intensity(s, DeviationMode::kMad).k_omega.x(), 0.0);
}

TEST(Intensity, MadAndStdDiffer) {
  // Deviations {-1, -1, -1, 3}: MAD 1.5, STD sqrt(3).
  const auto s = series({0, 0, 0, 4});
  EXPECT_NEAR(vibration_intensity(s, DeviationMode::kMad).k_omega.z(), 1.5, 1e-15);
  EXPECT_NEAR(vibration_intensity(s, DeviationMode::kStd).k_omega.z(), std::sqrt(3.0), 1e-15);
}

TEST(Intensity, LinearFitRemovesRamp) {
  std::vector<double> ramp;
  for (int i = 0; i < 11; ++i) ramp.push_back(0.3 + 2.0 * 0.01 * i);
  const auto s = series(ramp);
  EXPECT_LT(vibration_intensity(s, DeviationMode::kLls).k_omega.z(), 1e-12);
  EXPECT_GT(vibration_intensity(s, DeviationMode::kMad).k_omega.z(), 0.05);
}

TEST(Intensity, NeedsTwoSamples) {
  EXPECT_THROW(vibration_intensity(series({1.0}), DeviationMode::kMad), Error);
}

TEST(Intensity, PureYawVibrationSimulator) {
  sim::Scenario sc;
  sc.rig = oracle::noiseless_rig();
  sc.rig.imu.rate = 200.0;
  sc.profile.duration = 3.0;
  sc.profile.vibration_window = {0.0, 3.0, 0.0};
  sc.profile.terms.push_back({sim::VibAxis::kYaw, 0.05, 3.0, 0.0});
  const double t0 = 1.0;
  const sim::KinematicState ks = sim::pose_at(sc.profile, t0);
  NavState x;
  x.t = t0;
  x.rot = ks.pose.rotation;
  x.pos = ks.pose.translation;
  x.vel = ks.vel;
  x.gravity = sim::kWorldGravity;
  const ImuWindow w = sim::synthesize_imu(sc.profile, sc.rig, t0, t0 + 0.1, 0);
  const auto v = lidar_frame_velocities(w, build_pose_timeline(x, w, t0 + 0.1), RigidTransform{});
  const auto k = vibration_intensity(v, DeviationMode::kMad);
  EXPECT_GT(k.k_omega.z(), 0.1);
  EXPECT_LT(k.k_omega.head<2>().norm(), 1e-9);
  EXPECT_LT(k.k_v.norm(), 1e-6);
}

TEST(PointSigmas, Arithmetic) {
  VibrationIntensity k;
  k.k_omega = Vec3(0, 2, 0);
  k.k_v = Vec3(1, 0, 0.5);
  const UncertaintyConfig cfg;
  const PointSigmas zero = point_sigmas(k, 0.0, cfg);
  EXPECT_EQ(zero.rot, Vec3::Zero());
  EXPECT_EQ(zero.trans, Vec3::Zero());
  const PointSigmas s = point_sigmas(k, 0.1, cfg);
  EXPECT_LT((s.rot - Vec3(0, 0.02, 0)).norm(), 1e-15);
  EXPECT_LT((s.trans - Vec3(0.01, 0, 0.005)).norm(), 1e-15);
}

TEST(RotationalCovariance, HandExpanded) {
  EXPECT_TRUE(rotational_covariance(Vec3::Zero(), Vec3(1, 1, 1)).isZero(0.0));
  const double s = 0.03;
  Mat3 expected = Mat3::Zero();
  expected(2, 2) = s * s;
  EXPECT_LT((rotational_covariance(Vec3(1, 0, 0), Vec3(0, s, 0)) - expected).norm(), 1e-18);
}

TEST(RotationalCovariance, PointInNullSpace) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 100; ++i) {
    const Vec3 p = oracle::random_vec(rng, 20.0);
    const Vec3 sr = oracle::random_vec(rng, 0.05).cwiseAbs();
    const Mat3 c = rotational_covariance(p, sr);
    EXPECT_LT((c * p).norm(), 1e-12 * c.norm() * p.norm() + 1e-300);
    EXPECT_LT((c - c.transpose()).norm(), 1e-15 * c.norm());
  }
}

TEST(RotationalCovariance, QuadraticInRange) {
  const Vec3 sr(0.01, 0.02, 0.03);
  const Vec3 dir = Vec3(1, 2, 3).normalized();
  const Mat3 near = rotational_covariance(dir, sr);
  const Mat3 far = rotational_covariance(10.0 * dir, sr);
  EXPECT_LT((far - 100.0 * near).norm(), 1e-12);
}

TEST(MeasurementCovariance, RangeOnlyIsRankOne) {
  BeamNoiseModel beam{0.02, 0.0};
  const Vec3 p(3, -4, 1);
  const Vec3 phi = p.normalized();
  const Mat3 expected = 0.02 * 0.02 * phi * phi.transpose();
  EXPECT_LT((measurement_covariance(p, beam) - expected).norm(), 1e-18);
}

TEST(MeasurementCovariance, MatchesTangentIsotropicForm) {
  // Tangent-basis invariance: the bearing block equals (d sigma)^2 (I - phi phi^T).
  std::mt19937_64 rng(22);
  const BeamNoiseModel beam{0.03, 0.002};
  for (int i = 0; i < 50; ++i) {
    const Vec3 p = oracle::random_vec(rng, 30.0);
    const double d = p.norm();
    const Vec3 phi = p / d;
    const Mat3 expected = beam.sigma_range * beam.sigma_range * phi * phi.transpose() +
                          d * d * beam.sigma_bearing * beam.sigma_bearing *
                              (Mat3::Identity() - phi * phi.transpose());
    EXPECT_LT((measurement_covariance(p, beam) - expected).norm(), 1e-12 * expected.norm());
    const auto o = tangent_basis(phi);
    EXPECT_LT((o.transpose() * o - Eigen::Matrix2d::Identity()).norm(), 1e-12);
    EXPECT_LT((o.transpose() * phi).norm(), 1e-12);
  }
  EXPECT_THROW(measurement_covariance(Vec3::Zero(), beam), Error);
}

TEST(TotalCovariance, DegenerateToMeasurement) {
  UndistortedPoint p;
  p.raw = Vec3(2, 1, 0.5);
  p.position = p.raw;
  const BeamNoiseModel beam;
  const PointCovariance c = total_covariance(p, Vec3::Zero(), Vec3::Zero(), beam);
  EXPECT_LT((c.total - measurement_covariance(p.raw, beam)).norm(), 1e-18);
  EXPECT_TRUE(c.sigma_rot.isZero(0.0));
  EXPECT_TRUE(c.sigma_trans.isZero(0.0));
}

TEST(TotalCovariance, TraceNonDecreasingInTime) {
  VibrationIntensity k;
  k.k_omega = Vec3(0.5, 1.0, 0.2);
  k.k_v = Vec3(0.1, 0.05, 0.3);
  UncertaintyConfig cfg;
  UndistortedScan scan;
  for (int i = 0; i <= 20; ++i) {
    UndistortedPoint p;
    p.raw = Vec3(4, -2, 1);
    p.position = p.raw;
    p.dt = 0.005 * i;
    scan.points.push_back(p);
  }
  assign_covariances(scan, k, cfg, BeamNoiseModel{}, true);
  for (std::size_t i = 1; i < scan.points.size(); ++i) {
    EXPECT_GE(scan.points[i].cov.trace(), scan.points[i - 1].cov.trace());
  }
  UndistortedScan off = scan;
  assign_covariances(off, k, cfg, BeamNoiseModel{}, false);
  for (const auto& p : off.points) {
    EXPECT_LT((p.cov - measurement_covariance(p.raw, BeamNoiseModel{})).norm(), 1e-18);
  }
}

TEST(TotalCovariance, MonteCarloSpotCheck) {
  UndistortedPoint p;
  p.raw = Vec3(5, 2, -1);
  p.rotation = so3_exp(Vec3(0.02, -0.01, 0.03)).matrix();
  p.position = p.rotation * p.raw + Vec3(0.01, 0, 0);
  const Vec3 sr(0.02, 0.01, 0.03), st(0.01, 0.02, 0.005);
  const BeamNoiseModel beam{0.02, 0.002};
  const Mat3 model = total_covariance(p, sr, st, beam).total;
  const Mat3 mc = oracle::monte_carlo_covariance(p.position, p.raw, p.rotation, sr, st,
                                                 beam.sigma_range, beam.sigma_bearing, 200000, 7);
  EXPECT_LT((mc - model).norm() / model.norm(), 0.05);
}

TEST(UncertaintyConfig, Validation) {
  UncertaintyConfig c;
  c.gamma = -1.0;
  EXPECT_THROW(c.validate(), Error);
  EXPECT_EQ(deviation_mode_from_string("lls"), DeviationMode::kLls);
  EXPECT_EQ(std::string(to_string(DeviationMode::kStd)), "STD");
  EXPECT_THROW(deviation_mode_from_string("median"), Error);
}

}  // namespace
}  // namespace vlio
