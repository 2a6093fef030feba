#pragma once

#include <cmath>
#include <string>

#include "rcmik/kinematics.hpp"

namespace rcmik {

/// Least-squares task  weight/2 * ||A qdot - b||^2.  b already carries the residual gain.
struct EqualityTask {
  std::string name;
  MatrixX A;
  VectorX b;
  double weight = 1.0;

  void validate() const {
    if (A.rows() != b.size()) {
      throw DimensionError("task '" + name + "': A has " + std::to_string(A.rows()) +
                           " rows but b has " + std::to_string(b.size()) + " entries");
    }
    if (!(weight > 0.0) || !std::isfinite(weight)) {
      throw ValidationError("task '" + name + "': weight must be positive");
    }
    if (!A.allFinite() || !b.allFinite()) {
      throw ValidationError("task '" + name + "': non-finite entries");
    }
  }
};

/// Inequality rows  C qdot - d <= w,  with w penalized by slack_weight/2 * ||w||^2.
struct InequalityConstraint {
  std::string name;
  MatrixX C;
  VectorX d;
  double slack_weight = 1.0;

  void validate() const {
    if (C.rows() != d.size()) {
      throw DimensionError("constraint '" + name + "': C/d row mismatch");
    }
    if (!(slack_weight > 0.0) || !std::isfinite(slack_weight)) {
      throw ValidationError("constraint '" + name + "': slack weight must be positive");
    }
    if (!C.allFinite() || !d.allFinite()) {
      throw ValidationError("constraint '" + name + "': non-finite entries");
    }
  }
};

// ---------------------------------------------------------------------------
// End-effector pose

/// Pose error of `frame` w.r.t. `desired`, as a twist in base coordinates that
/// is consistent with the rows of the geometric Jacobian.
///
/// The local error log(T_act^-1 T_des) is rotated by R_act, so its norm equals
/// the norm of the local twist.
inline Twist pose_error(const Transform& actual, const Transform& desired) {
  const Twist local = se3_log(actual.inverse() * desired);
  return {actual.rotation * local.linear, actual.rotation * local.angular};
}

inline EqualityTask ee_pose_task(const KinematicChain& chain, const VectorX& q,
                                 const Transform& desired, double weight, double residual_gain,
                                 const std::string& frame = frame_names::kEndEffector) {
  const auto poses = joint_poses(chain, q);
  EqualityTask task;
  task.name = "ee_pose";
  task.A = frame_jacobian(chain, poses, frame).matrix;
  task.b = residual_gain * pose_error(frame_pose(chain, poses, frame), desired).vector();
  task.weight = weight;
  return task;
}

// ---------------------------------------------------------------------------
// Remote center of motion

struct RcmState {
  Vector3 p_trocar;
  Vector3 p_pre;
  Vector3 p_post;
  Vector3 p_rcm;         ///< closest point to the trocar on the shaft line
  Vector3 residual_vec;  ///< p_trocar - p_rcm
  Vector3 shaft_dir;     ///< unit vector from p_pre to p_post
  double shaft_length = 0.0;

  double error() const { return residual_vec.norm(); }
};

inline constexpr double kMinShaftLength = 1e-9;

inline RcmState rcm_state_from_points(const Vector3& p_pre, const Vector3& p_post,
                                      const Vector3& p_trocar) {
  RcmState s;
  s.p_trocar = p_trocar;
  s.p_pre = p_pre;
  s.p_post = p_post;
  const Vector3 shaft = p_post - p_pre;
  s.shaft_length = shaft.norm();
  if (!(s.shaft_length > kMinShaftLength)) {
    throw DegenerateShaftError("rcm: shaft endpoints coincide (length " +
                               std::to_string(s.shaft_length) + ")");
  }
  s.shaft_dir = shaft / s.shaft_length;
  s.p_rcm = p_pre + (p_trocar - p_pre).dot(s.shaft_dir) * s.shaft_dir;
  s.residual_vec = p_trocar - s.p_rcm;
  return s;
}

inline RcmState rcm_state(const KinematicChain& chain, const VectorX& q, const Vector3& p_trocar) {
  const auto poses = joint_poses(chain, q);
  return rcm_state_from_points(frame_pose(chain, poses, frame_names::kRcmPre).translation,
                               frame_pose(chain, poses, frame_names::kRcmPost).translation,
                               p_trocar);
}

/// d p_rcm / dq from the position Jacobians of the shaft endpoints.
///
///   J = (I - s s^T) J_pre + ((r.s) I + s r^T) ds/dq,
///   ds/dq = (I - s s^T)(J_post - J_pre) / |p_post - p_pre|,   r = p_trocar - p_pre.
inline MatrixX rcm_jacobian(const RcmState& s, const MatrixX& j_pre, const MatrixX& j_post) {
  const Vector3& dir = s.shaft_dir;
  const Vector3 r = s.p_trocar - s.p_pre;
  const Matrix3 perp = Matrix3::Identity() - dir * dir.transpose();
  const MatrixX d_dir = perp * (j_post - j_pre) / s.shaft_length;
  const Matrix3 lever = r.dot(dir) * Matrix3::Identity() + dir * r.transpose();
  return perp * j_pre + lever * d_dir;
}

/// RCM task A qdot = b with b = gain * residual. The rows are J_rcm restricted to
/// the plane normal to the shaft: the residual lives in that plane, and the
/// along-shaft row of J_rcm scales with |residual|, so keeping it would make the
/// task rank jump between 2 and 3 and lock insertion out of the null space.
inline EqualityTask rcm_task(const RcmState& s, const MatrixX& j_pre, const MatrixX& j_post,
                             double weight, double residual_gain) {
  const Matrix3 perp = Matrix3::Identity() - s.shaft_dir * s.shaft_dir.transpose();
  EqualityTask task;
  task.name = "rcm";
  task.A = perp * rcm_jacobian(s, j_pre, j_post);
  task.b = residual_gain * s.residual_vec;
  task.weight = weight;
  return task;
}

inline EqualityTask rcm_task(const KinematicChain& chain, const VectorX& q, const Vector3& p_trocar,
                             double weight, double residual_gain) {
  const auto poses = joint_poses(chain, q);
  const RcmState s = rcm_state_from_points(
      frame_pose(chain, poses, frame_names::kRcmPre).translation,
      frame_pose(chain, poses, frame_names::kRcmPost).translation, p_trocar);
  return rcm_task(s, frame_jacobian(chain, poses, frame_names::kRcmPre).matrix.topRows(3),
                  frame_jacobian(chain, poses, frame_names::kRcmPost).matrix.topRows(3), weight,
                  residual_gain);
}

// ---------------------------------------------------------------------------
// Manipulability

/// det(J J^T) at or below this value is treated as a singular configuration.
inline constexpr double kManipulabilityDetFloor = 1e-14;
/// Gradient norms above this are reported as suspicious (near-singular sqrt).
inline constexpr double kGradientFlagNorm = 1e6;

/// Yoshikawa index sqrt(det(J J^T)); 0 at (numerically) singular configurations.
inline double manipulability(const MatrixX& jac) {
  const double det = (jac * jac.transpose()).determinant();
  if (!(det > kManipulabilityDetFloor)) return 0.0;
  return std::sqrt(det);
}

inline double manipulability(const KinematicChain& chain, const VectorX& q,
                             const std::string& frame = frame_names::kEndEffector) {
  return manipulability(geometric_jacobian(chain, q, frame).matrix);
}

/// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h of a scalar function.
template <class F>
VectorX central_difference_gradient(F&& f, const VectorX& x, double step) {
  if (!(step > 0.0)) throw ValidationError("central_difference_gradient: step must be positive");
  VectorX grad(x.size());
  VectorX xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + step;
    const double f_plus = f(xp);
    xp[i] = x[i] - step;
    const double f_minus = f(xp);
    xp[i] = x[i];
    grad[i] = (f_plus - f_minus) / (2.0 * step);
  }
  return grad;
}

/// Central-difference gradient of the manipulability index, one joint at a time.
inline VectorX manipulability_gradient(const KinematicChain& chain, const VectorX& q,
                                       const std::string& frame = frame_names::kEndEffector,
                                       double step = 1e-6) {
  chain.check_size(q);
  return central_difference_gradient(
      [&](const VectorX& x) { return manipulability(chain, x, frame); }, q, step);
}

/// Linearized manipulability ascent:  || dt grad(m)^T qdot - K_r m ||^2.
inline EqualityTask manipulability_task(double m, const VectorX& gradient, double dt,
                                        double weight, double residual_gain = 1.0) {
  if (!(dt > 0.0)) throw ValidationError("manipulability_task: dt must be positive");
  EqualityTask task;
  task.name = "manipulability";
  task.A = dt * gradient.transpose();
  task.b = VectorX::Constant(1, residual_gain * m);
  task.weight = weight;
  return task;
}

inline EqualityTask manipulability_task(const KinematicChain& chain, const VectorX& q,
                                        const std::string& frame, double dt, double weight,
                                        double residual_gain = 1.0) {
  return manipulability_task(manipulability(chain, q, frame),
                             manipulability_gradient(chain, q, frame), dt, weight,
                             residual_gain);
}

// ---------------------------------------------------------------------------
// Joint limits

/// Velocity bounds that keep q + dt * qdot inside [q-, q+]:
///   [ I; -I] qdot - [ (q+ - q)/dt ; -(q- - q)/dt ] <= w
inline InequalityConstraint joint_limit_constraint(const KinematicChain& chain, const VectorX& q,
                                                   double dt, double slack_weight) {
  chain.check_size(q);
  if (!(dt > 0.0)) throw ValidationError("joint_limit_constraint: dt must be positive");
  const int n = chain.dof();
  InequalityConstraint c;
  c.name = "joint_limits";
  c.C.resize(2 * n, n);
  c.C << MatrixX::Identity(n, n), -MatrixX::Identity(n, n);
  c.d.resize(2 * n);
  c.d << (chain.upper_limits() - q) / dt, -(chain.lower_limits() - q) / dt;
  c.slack_weight = slack_weight;
  return c;
}

}  // namespace rcmik
