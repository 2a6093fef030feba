#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rcmik/hqp.hpp"

namespace rcmik {

/// Task weights (Kt), residual gains (Kr), damping (Kd) and slack weights (Kw).
/// Index 1 is the RCM task, 2 the pose task, 3 the manipulability task; Kd/Kw
/// index 1 belongs to the upper level and 2 to the lower one.
struct GainSet {
  double Kt1 = 1.0;
  double Kt2 = 1.0;
  double Kt3 = 0.01;
  double Kr1 = 1.0;
  double Kr2 = 1.0;
  double Kr3 = 1e-3;
  double Kd1 = 1e-5;
  double Kd2 = 1e-9;
  double Kw1 = 1e-5;
  double Kw2 = 1e-5;

  /// Reference tuning; the 12-joint chain (5-DOF tool) uses Kt3 = 0.001.
  static GainSet reference(int dof) {
    GainSet g;
    if (dof >= 12) g.Kt3 = 0.001;
    return g;
  }

  /// Every gain must be positive except Kt3, where 0 switches the
  /// manipulability task off.
  void validate() const {
    const std::pair<const char*, double> strict[] = {
        {"Kt1", Kt1}, {"Kt2", Kt2}, {"Kr1", Kr1}, {"Kr2", Kr2}, {"Kr3", Kr3},
        {"Kd1", Kd1}, {"Kd2", Kd2}, {"Kw1", Kw1}, {"Kw2", Kw2}};
    for (const auto& [name, value] : strict) {
      if (!(value > 0.0) || !std::isfinite(value)) {
        throw ValidationError(std::string("gain ") + name + " must be positive");
      }
    }
    if (!(Kt3 >= 0.0) || !std::isfinite(Kt3)) {
      throw ValidationError("gain Kt3 must be non-negative");
    }
  }
};

struct SurgicalProblem {
  std::vector<PriorityLevel> levels;
  double manipulability = 0.0;
  VectorX manipulability_gradient;  ///< empty when the task is off
  bool gradient_flagged = false;    ///< ||grad m|| exceeded kGradientFlagNorm
};

/// Composes the two-level RCM problem, or the single-level unconstrained one
/// when no trocar is given.
///
/// Pose and RCM residuals are divided by the control period dt, so the gain
/// Kr is the fraction of the error removed in one integration step. The
/// manipulability row already measures a per-step change and is not rescaled.
inline SurgicalProblem build_surgical_problem(const KinematicChain& chain, const VectorX& q,
                                              const Transform& desired,
                                              const std::optional<Vector3>& trocar,
                                              const GainSet& gains, double dt,
                                              double limit_dt, bool optimize_manipulability) {
  gains.validate();
  if (!(dt > 0.0)) throw ValidationError("build_surgical_problem: dt must be positive");

  SurgicalProblem out;
  const auto poses = joint_poses(chain, q);
  const Jacobian j_ee = frame_jacobian(chain, poses, frame_names::kEndEffector);
  out.manipulability = manipulability(j_ee.matrix);

  EqualityTask pose;
  pose.name = "ee_pose";
  pose.A = j_ee.matrix;
  pose.b = (gains.Kr2 / dt) *
           pose_error(frame_pose(chain, poses, frame_names::kEndEffector), desired).vector();
  pose.weight = gains.Kt2;

  std::optional<EqualityTask> manip;
  if (optimize_manipulability && gains.Kt3 > 0.0) {
    out.manipulability_gradient = manipulability_gradient(chain, q);
    out.gradient_flagged = out.manipulability_gradient.norm() > kGradientFlagNorm;
    manip = manipulability_task(out.manipulability, out.manipulability_gradient, dt, gains.Kt3,
                                gains.Kr3);
  }

  if (trocar) {
    const RcmState s = rcm_state_from_points(
        frame_pose(chain, poses, frame_names::kRcmPre).translation,
        frame_pose(chain, poses, frame_names::kRcmPost).translation, *trocar);
    EqualityTask rcm = rcm_task(
        s, frame_jacobian(chain, poses, frame_names::kRcmPre).matrix.topRows(3),
        frame_jacobian(chain, poses, frame_names::kRcmPost).matrix.topRows(3), gains.Kt1,
        gains.Kr1 / dt);

    PriorityLevel upper;
    upper.tasks.push_back(std::move(rcm));
    upper.constraints.push_back(joint_limit_constraint(chain, q, limit_dt, gains.Kw1));
    upper.damping = gains.Kd1;
    upper.slack_weight = gains.Kw1;

    PriorityLevel lower;
    lower.tasks.push_back(std::move(pose));
    if (manip) lower.tasks.push_back(std::move(*manip));
    lower.damping = gains.Kd2;
    lower.slack_weight = gains.Kw2;

    out.levels.push_back(std::move(upper));
    out.levels.push_back(std::move(lower));
  } else {
    PriorityLevel single;
    single.tasks.push_back(std::move(pose));
    if (manip) single.tasks.push_back(std::move(*manip));
    single.constraints.push_back(joint_limit_constraint(chain, q, limit_dt, gains.Kw2));
    single.damping = gains.Kd2;
    single.slack_weight = gains.Kw2;
    out.levels.push_back(std::move(single));
  }
  return out;
}

}  // namespace rcmik
