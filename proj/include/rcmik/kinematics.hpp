#pragma once

#include <string>
#include <vector>

#include "rcmik/chain.hpp"

namespace rcmik {

/// Geometric Jacobian of a named frame. Rows 0-2 are the linear velocity of the
/// frame origin, rows 3-5 the angular velocity, both in base coordinates.
struct Jacobian {
  MatrixX matrix;
  std::string frame;

  Eigen::Block<const MatrixX> position_rows() const { return matrix.topRows(3); }
  Eigen::Block<const MatrixX> angular_rows() const { return matrix.bottomRows(3); }
  int cols() const { return static_cast<int>(matrix.cols()); }
};

/// Poses of every joint frame (after its own motion) for configuration q.
inline std::vector<Transform> joint_poses(const KinematicChain& chain, const VectorX& q) {
  chain.check_size(q);
  std::vector<Transform> poses;
  poses.reserve(chain.dof());
  Transform current = Transform::identity();
  for (int i = 0; i < chain.dof(); ++i) {
    const Joint& joint = chain.joints()[i];
    current = current * joint.origin;
    Transform motion;
    if (joint.type == JointType::Revolute) {
      motion.rotation = Eigen::AngleAxisd(q[i], joint.axis).toRotationMatrix();
    } else {
      motion.translation = q[i] * joint.axis;
    }
    current = current * motion;
    poses.push_back(current);
  }
  return poses;
}

inline Transform frame_pose(const KinematicChain& chain, const std::vector<Transform>& poses,
                            const std::string& frame) {
  const FrameAttachment& attach = chain.frame(frame);
  const Transform parent = attach.parent < 0 ? Transform::identity() : poses[attach.parent];
  return parent * attach.offset;
}

inline Transform forward_kinematics(const KinematicChain& chain, const VectorX& q,
                                    const std::string& frame) {
  chain.frame(frame);
  return frame_pose(chain, joint_poses(chain, q), frame);
}

inline Jacobian frame_jacobian(const KinematicChain& chain, const std::vector<Transform>& poses,
                               const std::string& frame) {
  const FrameAttachment& attach = chain.frame(frame);
  const Vector3 point = frame_pose(chain, poses, frame).translation;
  Jacobian jac{MatrixX::Zero(6, chain.dof()), frame};
  for (int i = 0; i <= attach.parent; ++i) {
    const Joint& joint = chain.joints()[i];
    const Vector3 axis = poses[i].rotation * joint.axis;
    if (joint.type == JointType::Revolute) {
      jac.matrix.block<3, 1>(0, i) = axis.cross(point - poses[i].translation);
      jac.matrix.block<3, 1>(3, i) = axis;
    } else {
      jac.matrix.block<3, 1>(0, i) = axis;
    }
  }
  return jac;
}

inline Jacobian geometric_jacobian(const KinematicChain& chain, const VectorX& q,
                                   const std::string& frame) {
  chain.frame(frame);
  return frame_jacobian(chain, joint_poses(chain, q), frame);
}

}  // namespace rcmik
