#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

#include "rcmik/errors.hpp"

namespace rcmik {

using Vector3 = Eigen::Vector3d;
using Vector6 = Eigen::Matrix<double, 6, 1>;
using Matrix3 = Eigen::Matrix3d;

/// Rigid transform. Rotation is expected to stay in SO(3); nothing renormalizes it.
struct Transform {
  Matrix3 rotation = Matrix3::Identity();
  Vector3 translation = Vector3::Zero();

  static Transform identity() { return {}; }

  static Transform from_translation(const Vector3& t) { return {Matrix3::Identity(), t}; }

  Transform operator*(const Transform& rhs) const {
    return {rotation * rhs.rotation, rotation * rhs.translation + translation};
  }

  Vector3 operator*(const Vector3& point) const { return rotation * point + translation; }

  Transform inverse() const {
    const Matrix3 rt = rotation.transpose();
    return {rt, -rt * translation};
  }

  Eigen::Matrix4d matrix() const {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = rotation;
    m.topRightCorner<3, 1>() = translation;
    return m;
  }
};

/// se(3) element. Ordering is (linear, angular) everywhere in this library.
struct Twist {
  Vector3 linear = Vector3::Zero();
  Vector3 angular = Vector3::Zero();

  Vector6 vector() const {
    Vector6 v;
    v << linear, angular;
    return v;
  }

  static Twist from_vector(const Vector6& v) { return {v.head<3>(), v.tail<3>()}; }

  double norm() const { return vector().norm(); }
};

inline Matrix3 skew(const Vector3& v) {
  Matrix3 s;
  s << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return s;
}

/// Below this rotation angle the log/exp maps switch to their Taylor forms.
inline constexpr double kSmallAngle = 1e-8;
/// Angles within this distance of pi are rejected by se3_log.
inline constexpr double kPiMargin = 1e-6;

/// Fixed-axis roll/pitch/yaw: R = Rz(yaw) * Ry(pitch) * Rx(roll).
inline Matrix3 rpy_to_rotation(const Vector3& rpy) {
  return (Eigen::AngleAxisd(rpy.z(), Vector3::UnitZ()) *
          Eigen::AngleAxisd(rpy.y(), Vector3::UnitY()) *
          Eigen::AngleAxisd(rpy.x(), Vector3::UnitX()))
      .toRotationMatrix();
}

/// Below this angle the exp/log coefficients switch to their Taylor series.
inline constexpr double kSeriesAngle = 1e-3;

/// (1 - cos t) / t^2 without cancellation.
inline double one_minus_cos_over_sq(double t) {
  const double s = std::sin(0.5 * t) / t;
  return 2.0 * s * s;
}

/// (t - sin t) / t^3, by series where the difference cancels.
inline double theta_minus_sin_over_cube(double t) {
  const double t2 = t * t;
  if (t < kSeriesAngle) return 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0;
  return (t - std::sin(t)) / (t2 * t);
}

inline Matrix3 so3_exp(const Vector3& omega) {
  const double theta = omega.norm();
  const Matrix3 w = skew(omega);
  if (theta < kSmallAngle) {
    return Matrix3::Identity() + w + 0.5 * w * w;
  }
  return Matrix3::Identity() + (std::sin(theta) / theta) * w + one_minus_cos_over_sq(theta) * w * w;
}

/// Rotation angle of R, computed with atan2 so it stays accurate near 0 and pi.
inline double rotation_angle(const Matrix3& r) {
  const Vector3 axis_sin(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  return std::atan2(0.5 * axis_sin.norm(), 0.5 * (r.trace() - 1.0));
}

/// exp: se(3) -> SE(3).
inline Transform se3_exp(const Twist& xi) {
  const double theta = xi.angular.norm();
  const Matrix3 w = skew(xi.angular);
  Matrix3 v;
  if (theta < kSmallAngle) {
    v = Matrix3::Identity() + 0.5 * w + (1.0 / 6.0) * w * w;
  } else {
    v = Matrix3::Identity() + one_minus_cos_over_sq(theta) * w + theta_minus_sin_over_cube(theta) * w * w;
  }
  return {so3_exp(xi.angular), v * xi.linear};
}

/// log: SE(3) -> se(3) on the principal branch.
///
/// Throws BranchError when the rotation angle is within kPiMargin of pi, where
/// the rotation axis is ambiguous and the caller has to pick a different seed.
inline Twist se3_log(const Transform& pose) {
  const Matrix3& r = pose.rotation;
  const double theta = rotation_angle(r);
  if (theta >= std::numbers::pi - kPiMargin) {
    throw BranchError("se3_log: rotation angle " + std::to_string(theta) +
                      " is too close to pi");
  }
  const Vector3 vee(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));

  Vector3 omega;
  Matrix3 v_inv;
  if (theta < kSmallAngle) {
    omega = 0.5 * vee;
    const Matrix3 w = skew(omega);
    v_inv = Matrix3::Identity() - 0.5 * w + (1.0 / 12.0) * w * w;
  } else {
    omega = (theta / (2.0 * std::sin(theta))) * vee;
    const Matrix3 w = skew(omega);
    const double half = 0.5 * theta;
    const double t2 = theta * theta;
    const double coef = theta < kSeriesAngle ? 1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0
                                             : (1.0 - half * std::cos(half) / std::sin(half)) / t2;
    v_inv = Matrix3::Identity() - 0.5 * w + coef * w * w;
  }
  return {v_inv * pose.translation, omega};
}

/// Distance of R from SO(3): max of ||R^T R - I|| and |det R - 1|.
inline double orthonormality_defect(const Matrix3& r) {
  return std::max((r.transpose() * r - Matrix3::Identity()).norm(),
                  std::abs(r.determinant() - 1.0));
}

}  // namespace rcmik
