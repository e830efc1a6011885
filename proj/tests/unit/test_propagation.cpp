#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "vlio/error.hpp"
#include "vlio/point_map.hpp"
#include "vlio/propagation.hpp"
#include "vlio/sim.hpp"

namespace vlio {
namespace {

ImuWindow constant_imu(double t0, double t1, double rate, const Vec3& gyro, const Vec3& accel) {
  ImuWindow w;
  const int n = static_cast<int>(std::lround((t1 - t0) * rate));
  for (int k = 0; k <= n; ++k) w.push_back({t0 + k / rate, gyro, accel});
  return w;
}

NoiseParams quiet() {
  NoiseParams n;
  n.sigma_gyro = n.sigma_accel = n.sigma_bias_gyro_walk = n.sigma_bias_accel_walk = 0.0;
  return n;
}

TEST(Propagate, StaticEquilibrium) {
  NavState x;
  const ImuWindow w = constant_imu(0.0, 1.0, 200.0, Vec3::Zero(), -x.gravity);
  const NavState y = propagate(x, w, NoiseParams{});
  EXPECT_NEAR(y.t, 1.0, 1e-12);
  EXPECT_LT(y.pos.norm(), 1e-12);
  EXPECT_LT(y.vel.norm(), 1e-12);
  EXPECT_LT(so3_log(y.rot).norm(), 1e-12);
  for (int i = 0; i < kStateDim; ++i) EXPECT_GE(y.cov(i, i), x.cov(i, i));
  EXPECT_GT(y.cov.trace(), x.cov.trace());
}

TEST(Propagate, ConstantAccelerationClosedForm) {
  NavState x;
  const ImuWindow w = constant_imu(0.0, 1.0, 100.0, Vec3::Zero(), Vec3(1.0, 0.0, 0.0) - x.gravity);
  const NavState y = propagate(x, w, quiet());
  EXPECT_LT((y.pos - Vec3(0.5, 0, 0)).norm(), 1e-6);
  EXPECT_LT((y.vel - Vec3(1.0, 0, 0)).norm(), 1e-6);
}

TEST(Propagate, ConstantRateRotation) {
  NavState x;
  x.gravity.setZero();
  const ImuWindow w = constant_imu(0.0, 1.0, 100.0, Vec3(0.2, -0.1, 0.5), Vec3::Zero());
  const NavState y = propagate(x, w, quiet());
  EXPECT_LT(rotation_angle(y.rot, so3_exp(Vec3(0.2, -0.1, 0.5))), 1e-10);
}

TEST(Propagate, PartialInterval) {
  NavState x;
  const ImuWindow w = constant_imu(0.0, 1.0, 100.0, Vec3::Zero(), Vec3(2.0, 0.0, 0.0) - x.gravity);
  const NavState y = propagate(x, w, quiet(), 0.355);
  EXPECT_NEAR(y.t, 0.355, 1e-12);
  EXPECT_NEAR(y.pos.x(), 0.355 * 0.355, 1e-9);
}

TEST(Propagate, BitIdenticalRepeats) {
  std::mt19937_64 rng(11);
  ImuWindow w;
  for (int k = 0; k <= 50; ++k) {
    w.push_back({k * 0.01, oracle::random_vec(rng, 1.0), oracle::random_vec(rng, 10.0)});
  }
  NavState x;
  x.vel = Vec3(0.3, 0.1, 0);
  const NavState a = propagate(x, w, NoiseParams{});
  const NavState b = propagate(x, w, NoiseParams{});
  EXPECT_EQ(a.pos, b.pos);
  EXPECT_EQ(a.vel, b.vel);
  EXPECT_EQ(a.rot.matrix(), b.rot.matrix());
  EXPECT_EQ(a.cov, b.cov);
}

TEST(Propagate, CovarianceStaysSymmetric) {
  std::mt19937_64 rng(12);
  ImuWindow w;
  for (int k = 0; k <= 100; ++k) {
    w.push_back({k * 0.005, oracle::random_vec(rng, 2.0), oracle::random_vec(rng, 12.0)});
  }
  const NavState y = propagate(NavState{}, w, NoiseParams{});
  EXPECT_LT((y.cov - y.cov.transpose()).norm(), 1e-15);
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<StateMat>(y.cov).eigenvalues().minCoeff(), 0.0);
}

TEST(Propagate, RejectsNonMonotonicWindow) {
  ImuWindow w = constant_imu(0.0, 0.1, 100.0, Vec3::Zero(), Vec3(0, 0, 9.81));
  std::swap(w[3], w[4]);
  EXPECT_THROW(propagate(NavState{}, w, NoiseParams{}), Error);
}

TEST(Timeline, StaticIsIdentity) {
  NavState x;
  const ImuWindow w = constant_imu(0.0, 0.1, 200.0, Vec3::Zero(), -x.gravity);
  const PoseTimeline tl = build_pose_timeline(x, w, 0.1);
  for (const PoseSample& s : tl.samples()) {
    EXPECT_LT(so3_log(s.rot).norm(), 1e-15);
    EXPECT_LT(s.pos.norm(), 1e-15);
  }
}

TEST(Timeline, ConstantGyro) {
  NavState x;
  const ImuWindow w = constant_imu(0.0, 0.1, 200.0, Vec3(0, 0, 1), -x.gravity);
  const PoseTimeline tl = build_pose_timeline(x, w, 0.1);
  EXPECT_TRUE(tl.samples().front().rot.matrix().isIdentity(0.0));
  EXPECT_LT(rotation_angle(tl.at(0.1).rot, so3_exp(Vec3(0, 0, 0.1))), 1e-8);
  EXPECT_LT(rotation_angle(tl.at(0.05).rot, so3_exp(Vec3(0, 0, 0.05))), 1e-8);
  EXPECT_THROW(tl.at(0.2), Error);
}

TEST(Timeline, WindowTooShort) {
  NavState x;
  const ImuWindow w = constant_imu(0.0, 0.05, 200.0, Vec3::Zero(), -x.gravity);
  EXPECT_THROW(build_pose_timeline(x, w, 0.1), Error);
}

TEST(Undistort, IdentityTimeline) {
  NavState x;
  const ImuWindow w = constant_imu(0.0, 0.1, 200.0, Vec3::Zero(), -x.gravity);
  const PoseTimeline tl = build_pose_timeline(x, w, 0.1);
  RawScan scan;
  for (int i = 0; i < 20; ++i) scan.points.push_back({Vec3(i, 2.0 - i, 0.5), 0.005 * i});
  const UndistortedScan u = undistort(scan, tl);
  ASSERT_EQ(u.points.size(), scan.points.size());
  for (std::size_t i = 0; i < u.points.size(); ++i) {
    EXPECT_LT((u.points[i].position - scan.points[i].position).norm(), 1e-14);
  }
}

TEST(Undistort, ScanStartPointUnchanged) {
  NavState x;
  x.vel = Vec3(1, 0, 0);
  const ImuWindow w = constant_imu(0.0, 0.1, 200.0, Vec3(0.3, 0.2, 1.0), Vec3(0.5, 0, 9.0));
  const PoseTimeline tl = build_pose_timeline(x, w, 0.1);
  RawScan scan;
  scan.points.push_back({Vec3(3, -1, 2), 0.0});
  scan.points.push_back({Vec3(3, -1, 2), 0.1});
  const RigidTransform ext{so3_exp(Vec3(0, 0, 0.3)), Vec3(0.1, 0, 0.05)};
  const UndistortedScan u = undistort(scan, tl, ext);
  EXPECT_LT((u.points[0].position - Vec3(3, -1, 2)).norm(), 1e-12);
  EXPECT_GT((u.points[1].position - Vec3(3, -1, 2)).norm(), 1e-3);
  for (const auto& p : u.points) EXPECT_GE(p.dt, 0.0);
}

sim::Scenario pitch_scenario(double imu_rate) {
  sim::Scenario sc;
  sc.world = oracle::gallery_world();
  sc.profile.duration = 4.0;
  sc.profile.vibration_window = {0.5, 3.5, 0.2};
  sc.profile.terms.push_back({sim::VibAxis::kPitch, 0.07, 2.0, 0.0});
  sc.profile.terms.push_back({sim::VibAxis::kZ, 0.03, 1.0, 0.3});
  sc.rig = oracle::noiseless_rig();
  sc.rig.imu.rate = imu_rate;
  sc.rig.extrinsics = {so3_exp(Vec3(0, 0, 0.2)), Vec3(0.05, 0.02, 0.1)};
  return sc;
}

NavState truth_state(const sim::VibrationProfile& profile, double t) {
  const sim::KinematicState ks = sim::pose_at(profile, t);
  NavState x;
  x.t = t;
  x.rot = ks.pose.rotation;
  x.pos = ks.pose.translation;
  x.vel = ks.vel;
  x.gravity = sim::kWorldGravity;
  return x;
}

TEST(Timeline, TracksSimulatorTruth) {
  // Integration error must shrink quadratically with the sample period.
  double err[2];
  const double rates[2] = {200.0, 400.0};
  for (int r = 0; r < 2; ++r) {
    const sim::Scenario sc = pitch_scenario(rates[r]);
    const double t0 = 2.0;
    const NavState x = truth_state(sc.profile, t0);
    const ImuWindow w = sim::synthesize_imu(sc.profile, sc.rig, t0, t0 + 0.1, 0);
    const PoseTimeline tl = build_pose_timeline(x, w, t0 + 0.1);
    const RigidTransform start = sim::pose_at(sc.profile, t0).pose;
    err[r] = 0.0;
    for (const PoseSample& s : tl.samples()) {
      const RigidTransform rel = start.inverse() * sim::pose_at(sc.profile, s.t).pose;
      err[r] = std::max(err[r], (rel.translation - s.pos).norm() + rotation_angle(rel.rotation, s.rot));
    }
  }
  EXPECT_LT(err[0], 1e-4);
  EXPECT_LT(err[1], err[0] / 3.0);
}

TEST(Undistort, NoiselessKilohertzImuMatchesTruth) {
  const sim::Scenario sc = pitch_scenario(1000.0);
  for (double t0 : {1.0, 2.0, 2.7}) {
    const sim::RenderedScan rs = sim::render_scan(sc.world, sc.profile, sc.rig, t0, 0);
    const NavState x = truth_state(sc.profile, t0);
    const ImuWindow w = sim::synthesize_imu(sc.profile, sc.rig, t0, t0 + 0.1, 0);
    const PoseTimeline tl = build_pose_timeline(x, w, t0 + 0.1);
    const UndistortedScan u = undistort(rs.raw, tl, sc.rig.extrinsics);
    ASSERT_EQ(u.points.size(), rs.truth.points.size());
    double worst = 0.0, distortion = 0.0;
    for (std::size_t i = 0; i < u.points.size(); ++i) {
      worst = std::max(worst, (u.points[i].position - rs.truth.points[i].position).norm());
      distortion = std::max(distortion, (rs.raw.points[i].position - rs.truth.points[i].position).norm());
    }
    EXPECT_LT(worst, 1e-3) << t0;
    EXPECT_GT(distortion, 1e-2) << t0;
  }
}

TEST(Undistort, WallPointsCoplanarWithinRangeNoise) {
  sim::Scenario sc = pitch_scenario(400.0);
  sc.rig.lidar.beam.sigma_range = 0.01;
  const double t0 = 2.0;
  const sim::RenderedScan rs = sim::render_scan(sc.world, sc.profile, sc.rig, t0, 5);
  const NavState x = truth_state(sc.profile, t0);
  const ImuWindow w = sim::synthesize_imu(sc.profile, sc.rig, t0, t0 + 0.1, 5);
  const UndistortedScan u = undistort(rs.raw, build_pose_timeline(x, w, t0 + 0.1), sc.rig.extrinsics);
  // Points on the +x wall, expressed in the world frame.
  const RigidTransform start = sim::pose_at(sc.profile, t0).pose * sc.rig.extrinsics;
  double sum2 = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < u.points.size(); ++i) {
    const Vec3 gt = start.apply(rs.truth.points[i].position);
    if (std::abs(gt.x() - 5.0) > 1e-6) continue;
    const Vec3 est = start.apply(u.points[i].position);
    sum2 += (est.x() - 5.0) * (est.x() - 5.0);
    ++n;
  }
  ASSERT_GT(n, 50u);
  EXPECT_LE(std::sqrt(sum2 / n), 0.01 * 1.15);
}

}  // namespace
}  // namespace vlio
