#include "vlio/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/SVD>

#include "vlio/error.hpp"

namespace vlio {

namespace {
constexpr double kSmallAngle = 1e-8;
}  // namespace

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Vec3 vee(const Mat3& m) {
  return Vec3(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1)) * 0.5;
}

Rot3 Rot3::from_matrix(const Mat3& m, double tol) {
  Rot3 r(m);
  if (!r.is_valid(tol)) {
    throw Error(ErrorCode::kInvalidArgument, "matrix is not a rotation");
  }
  return r;
}

Rot3 Rot3::nearest(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) {
    u.col(2) = -u.col(2);
  }
  return Rot3(u * v.transpose());
}

Rot3 Rot3::from_quaternion(const Eigen::Quaterniond& q) {
  return Rot3(q.normalized().toRotationMatrix());
}

Eigen::Quaterniond Rot3::quaternion() const {
  Eigen::Quaterniond q(m_);
  q.normalize();
  if (q.w() < 0.0) {
    q.coeffs() = -q.coeffs();
  }
  return q;
}

bool Rot3::is_valid(double tol) const {
  if (!m_.allFinite()) {
    return false;
  }
  const Mat3 err = m_.transpose() * m_ - Mat3::Identity();
  return err.cwiseAbs().maxCoeff() <= tol && std::abs(m_.determinant() - 1.0) <= tol;
}

Rot3 so3_exp(const Vec3& phi) {
  const double theta = phi.norm();
  const Mat3 k = skew(phi);
  if (theta < kSmallAngle) {
    return Rot3(Mat3::Identity() + k + 0.5 * k * k);
  }
  const double a = std::sin(theta) / theta;
  const double b = (1.0 - std::cos(theta)) / (theta * theta);
  return Rot3(Mat3::Identity() + a * k + b * k * k);
}

Vec3 so3_log(const Rot3& r) {
  const Mat3& m = r.matrix();
  const Vec3 w = vee(m);  // sin(theta) * axis
  const double cos_theta = std::clamp((m.trace() - 1.0) * 0.5, -1.0, 1.0);
  const double theta = std::atan2(w.norm(), cos_theta);

  if (theta < kSmallAngle) {
    return w;
  }
  if (std::numbers::pi - theta > 1e-5) {
    return w * (theta / w.norm());
  }

  // Near pi: sym(R) = cos(theta) I + (1 - cos(theta)) a a^T.
  const Mat3 sym = 0.5 * (m + m.transpose());
  const Mat3 aat = (sym - cos_theta * Mat3::Identity()) / (1.0 - cos_theta);
  int i = 0;
  aat.diagonal().maxCoeff(&i);
  Vec3 axis = aat.col(i) / std::sqrt(std::max(aat(i, i), 1e-300));
  axis.normalize();
  const double s = axis.dot(w);
  if (std::abs(s) > 1e-12) {
    if (s < 0.0) axis = -axis;
  } else {
    int j = 0;
    axis.cwiseAbs().maxCoeff(&j);
    if (axis[j] < 0.0) axis = -axis;
  }
  return axis * theta;
}

Mat3 small_angle_matrix(const Vec3& delta_r) {
  return Mat3::Identity() + skew(delta_r);
}

Rot3 from_small_angles(const Vec3& delta_r) {
  return Rot3::nearest(small_angle_matrix(delta_r));
}

Mat3 so3_right_jacobian(const Vec3& phi) {
  const double theta = phi.norm();
  const Mat3 k = skew(phi);
  if (theta < 1e-6) {
    return Mat3::Identity() - 0.5 * k + (1.0 / 6.0) * k * k;
  }
  const double t2 = theta * theta;
  return Mat3::Identity() - ((1.0 - std::cos(theta)) / t2) * k +
         ((theta - std::sin(theta)) / (t2 * theta)) * k * k;
}

Mat3 so3_right_jacobian_inv(const Vec3& phi) {
  const double theta = phi.norm();
  const Mat3 k = skew(phi);
  if (theta < 1e-6) {
    return Mat3::Identity() + 0.5 * k + (1.0 / 12.0) * k * k;
  }
  const double t2 = theta * theta;
  const double c = 1.0 / t2 - (1.0 + std::cos(theta)) / (2.0 * theta * std::sin(theta));
  return Mat3::Identity() + 0.5 * k + c * k * k;
}

double rotation_angle(const Rot3& a, const Rot3& b) {
  return so3_log(a.inverse() * b).norm();
}

RigidTransform RigidTransform::inverse() const {
  const Rot3 r_inv = rotation.inverse();
  return {r_inv, -(r_inv * translation)};
}

RigidTransform RigidTransform::operator*(const RigidTransform& other) const {
  return {rotation * other.rotation, rotation * other.translation + translation};
}

}  // namespace vlio
