#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "vlio/error.hpp"
#include "vlio/trajectory.hpp"

namespace vlio {
namespace {

Trajectory line(std::size_t n, double dt, const Vec3& offset = Vec3::Zero()) {
  Trajectory t;
  for (std::size_t i = 0; i < n; ++i) {
    TimedPose p;
    p.t = dt * static_cast<double>(i);
    p.pose.translation = Vec3(0.1 * static_cast<double>(i), 0, 0) + offset;
    t.push_back(p);
  }
  return t;
}

TEST(EndTime, IdenticalStatic) {
  const Trajectory t = line(50, 0.1, Vec3::Zero());
  Trajectory still = t;
  for (auto& p : still) p.pose.translation.setZero();
  const EndTimeError e = end_time_error(still, still, 1.0);
  EXPECT_EQ(e.trans_err, 0.0);
  EXPECT_EQ(e.rot_err, 0.0);
}

TEST(EndTime, VerticalOffset) {
  Trajectory truth(40), est(40);
  for (std::size_t i = 0; i < 40; ++i) {
    truth[i].t = est[i].t = 0.1 * static_cast<double>(i);
    est[i].pose.translation = Vec3(0, 0, 0.0219);
  }
  EXPECT_NEAR(end_time_error(est, truth, 1.0).trans_err, 0.0219, 1e-12);
}

TEST(EndTime, YawOffsetDegrees) {
  Trajectory truth(40), est(40);
  for (std::size_t i = 0; i < 40; ++i) {
    truth[i].t = est[i].t = 0.1 * static_cast<double>(i);
    est[i].pose.rotation = so3_exp(Vec3(0, 0, std::numbers::pi / 180.0));
  }
  const EndTimeError e = end_time_error(est, truth, 1.0);
  EXPECT_NEAR(e.rot_err, 1.0, 1e-9);
  EXPECT_EQ(e.trans_err, 0.0);
}

TEST(EndTime, AveragesSettleWindow) {
  Trajectory truth(30), est(30);
  for (std::size_t i = 0; i < 30; ++i) {
    truth[i].t = est[i].t = 0.1 * static_cast<double>(i);
    est[i].pose.translation = Vec3(i % 2 == 0 ? 0.01 : 0.03, 0, 0);
  }
  // The last second holds 11 poses (1.9 to 2.9), five at 0.01 and six at 0.03.
  EXPECT_NEAR(end_time_error(est, truth, 1.0).trans_err, (5 * 0.01 + 6 * 0.03) / 11.0, 1e-12);
}

TEST(EndTime, UncoveredWindow) {
  const Trajectory t = line(5, 0.1);
  EXPECT_THROW(end_time_error(t, t, 2.0), Error);
  EXPECT_THROW(end_time_error({}, t, 0.1), Error);
}

TEST(Ape, IdenticalIsZero) {
  const Trajectory t = line(20, 0.1);
  const ApeStats s = absolute_pose_error(t, t);
  EXPECT_EQ(s.count, 20u);
  EXPECT_EQ(s.mean, 0.0);
  EXPECT_EQ(s.rmse, 0.0);
  EXPECT_EQ(s.max, 0.0);
}

TEST(Ape, ConstantOffset) {
  const Trajectory truth = line(20, 0.1);
  const Trajectory est = line(20, 0.1, Vec3(0, 0.1, 0));
  const ApeStats s = absolute_pose_error(est, truth);
  EXPECT_NEAR(s.mean, 0.1, 1e-12);
  EXPECT_NEAR(s.rmse, 0.1, 1e-12);
  // First-pose alignment removes a constant offset.
  EXPECT_NEAR(absolute_pose_error(est, truth, 0.005, true).mean, 0.0, 1e-12);
}

TEST(Ape, HandBuiltThreePoses) {
  const Trajectory truth = line(3, 1.0);
  Trajectory est = truth;
  est[0].pose.translation.z() += 0.1;
  est[1].pose.translation.z() += 0.2;
  est[2].pose.translation.y() -= 0.2;
  const ApeStats s = absolute_pose_error(est, truth);
  EXPECT_NEAR(s.mean, 0.5 / 3.0, 1e-12);
  EXPECT_NEAR(s.rmse, std::sqrt(0.09 / 3.0), 1e-12);
  EXPECT_NEAR(s.mean, 0.1667, 5e-5);
  EXPECT_NEAR(s.rmse, 0.1732, 5e-5);
  EXPECT_NEAR(s.max, 0.2, 1e-12);
}

TEST(Ape, NearestTimestampAssociation) {
  const Trajectory truth = line(10, 0.1);
  Trajectory est = truth;
  for (auto& p : est) p.t += 0.004;
  EXPECT_EQ(absolute_pose_error(est, truth).count, 10u);
  for (auto& p : est) p.t += 0.002;
  EXPECT_THROW(absolute_pose_error(est, truth), Error);
}

TEST(MeanRotation, Symmetric) {
  const std::vector<Rot3> r = {so3_exp(Vec3(0, 0, 0.2)), so3_exp(Vec3(0, 0, -0.2))};
  EXPECT_LT(so3_log(mean_rotation(r)).norm(), 1e-12);
}

}  // namespace
}  // namespace vlio
