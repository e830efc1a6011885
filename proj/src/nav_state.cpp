#include "vlio/nav_state.hpp"

#include <Eigen/Eigenvalues>

#include "vlio/error.hpp"

namespace vlio {

NavState state_boxplus(const NavState& x, const StateVec& delta) {
  NavState out = x;
  out.rot = x.rot * so3_exp(delta.segment<3>(kRotIdx));
  out.pos = x.pos + delta.segment<3>(kPosIdx);
  out.vel = x.vel + delta.segment<3>(kVelIdx);
  out.bias_gyro = x.bias_gyro + delta.segment<3>(kBiasGyroIdx);
  out.bias_accel = x.bias_accel + delta.segment<3>(kBiasAccelIdx);
  return out;
}

StateVec state_boxminus(const NavState& a, const NavState& b) {
  StateVec d;
  d.segment<3>(kRotIdx) = so3_log(b.rot.inverse() * a.rot);
  d.segment<3>(kPosIdx) = a.pos - b.pos;
  d.segment<3>(kVelIdx) = a.vel - b.vel;
  d.segment<3>(kBiasGyroIdx) = a.bias_gyro - b.bias_gyro;
  d.segment<3>(kBiasAccelIdx) = a.bias_accel - b.bias_accel;
  return d;
}

void validate_state(const NavState& x) {
  if (!x.rot.is_valid(1e-9)) {
    throw Error(ErrorCode::kInvalidArgument, "state rotation is not orthonormal");
  }
  const double g = x.gravity.norm();
  if (g < 9.5 || g > 10.1) {
    throw Error(ErrorCode::kInvalidArgument, "gravity magnitude outside [9.5, 10.1]");
  }
  if ((x.cov - x.cov.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument, "state covariance is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<StateMat> eig(x.cov, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-9) {
    throw Error(ErrorCode::kInvalidArgument, "state covariance is not PSD");
  }
}

}  // namespace vlio
