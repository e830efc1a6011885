#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace vlio {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Cross-product matrix: skew(v) * w == v.cross(w).
Mat3 skew(const Vec3& v);

/// Inverse of skew() for the antisymmetric part of m.
Vec3 vee(const Mat3& m);

/// Element of SO(3). Always holds an orthonormal matrix with det +1.
class Rot3 {
 public:
  Rot3() : m_(Mat3::Identity()) {}

  static Rot3 identity() { return Rot3(); }

  /// Throws kInvalidArgument when m is not a rotation within `tol` per entry.
  static Rot3 from_matrix(const Mat3& m, double tol = 1e-9);

  /// Projects an arbitrary matrix onto SO(3) (polar decomposition).
  static Rot3 nearest(const Mat3& m);

  static Rot3 from_quaternion(const Eigen::Quaterniond& q);

  const Mat3& matrix() const { return m_; }
  Eigen::Quaterniond quaternion() const;

  Rot3 inverse() const { return Rot3(m_.transpose()); }
  Rot3 operator*(const Rot3& other) const { return Rot3(m_ * other.m_); }
  Vec3 operator*(const Vec3& v) const { return m_ * v; }

  bool is_valid(double tol = 1e-9) const;

 private:
  explicit Rot3(const Mat3& m) : m_(m) {}

  friend Rot3 so3_exp(const Vec3& phi);

  Mat3 m_;
};

/// Rodrigues exponential; second-order Taylor series below 1e-8 rad.
Rot3 so3_exp(const Vec3& phi);

/// Inverse of so3_exp on the ball |phi| <= pi. At exactly pi the axis sign is
/// chosen so that its largest-magnitude component is positive.
Vec3 so3_log(const Rot3& r);

/// Small-angle rotation I + skew(d) before re-orthonormalization.
Mat3 small_angle_matrix(const Vec3& delta_r);

/// Small-angle rotation, projected back onto SO(3). Agrees with so3_exp to
/// first order in |delta_r|.
Rot3 from_small_angles(const Vec3& delta_r);

/// Right Jacobian of SO(3): Exp(phi + d) ~= Exp(phi) Exp(Jr(phi) d).
Mat3 so3_right_jacobian(const Vec3& phi);
Mat3 so3_right_jacobian_inv(const Vec3& phi);

/// Geodesic angle between two rotations, in radians.
double rotation_angle(const Rot3& a, const Rot3& b);

struct RigidTransform {
  Rot3 rotation;
  Vec3 translation = Vec3::Zero();

  static RigidTransform identity() { return {}; }

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  RigidTransform inverse() const;
  RigidTransform operator*(const RigidTransform& other) const;
};

}  // namespace vlio
