#pragma once

#include <Eigen/Core>

#include "vlio/manifold.hpp"

namespace vlio {

/// Error-state layout: [dtheta, dp, dv, dbias_gyro, dbias_accel]. Rotation
/// error is right-multiplicative: R = R_hat * Exp(dtheta).
inline constexpr int kStateDim = 15;
inline constexpr int kRotIdx = 0;
inline constexpr int kPosIdx = 3;
inline constexpr int kVelIdx = 6;
inline constexpr int kBiasGyroIdx = 9;
inline constexpr int kBiasAccelIdx = 12;

using StateVec = Eigen::Matrix<double, kStateDim, 1>;
using StateMat = Eigen::Matrix<double, kStateDim, kStateDim>;

struct NavState {
  double t = 0.0;
  Rot3 rot;                              // G <- I
  Vec3 pos = Vec3::Zero();               // m, in G
  Vec3 vel = Vec3::Zero();               // m/s, in G
  Vec3 bias_gyro = Vec3::Zero();         // rad/s
  Vec3 bias_accel = Vec3::Zero();        // m/s^2
  Vec3 gravity = Vec3(0.0, 0.0, -9.81);  // m/s^2, in G, not estimated
  StateMat cov = StateMat::Identity() * 1e-6;

  RigidTransform pose() const { return {rot, pos}; }
};

NavState state_boxplus(const NavState& x, const StateVec& delta);

/// a boxminus b: the error-state vector d with b boxplus d == a.
StateVec state_boxminus(const NavState& a, const NavState& b);

/// Checks covariance symmetry/PSD and the gravity magnitude; throws
/// kInvalidArgument on violation.
void validate_state(const NavState& x);

}  // namespace vlio
