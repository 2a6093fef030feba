#pragma once

#include <algorithm>
#include <chrono>
#include <string>
#include <vector>

#include "rcmik/bench/scenario.hpp"

namespace rcmik::bench {

/// Steps excluded from the per-step RCM bound while the initial transient settles.
inline constexpr int kSettlingSteps = 10;

struct TrackingAggregates {
  double avg_manipulability = 0.0;
  double max_manipulability = 0.0;
  double avg_rcm_error = 0.0;                ///< m
  double max_rcm_error_after_settling = 0.0;  ///< m
  double avg_ee_error = 0.0;                 ///< twist norm
  double max_ee_error = 0.0;
  double mean_solve_time_s = 0.0;
  double max_solve_time_s = 0.0;
  double max_joint_limit_violation = 0.0;  ///< rad or m, 0 when always inside
  int gradient_flags = 0;                  ///< steps with ||grad m|| > kGradientFlagNorm
};

/// Per-step series plus aggregates. Every series has one entry per path sample;
/// metrics are taken after the integration step against that sample's target.
struct TrackingReport {
  std::string scenario;
  std::string chain;
  std::string fingerprint;
  std::string path_kind;
  bool constrained = false;
  bool optimize = false;
  bool timing_recorded = true;

  std::vector<int> step;
  std::vector<double> t;
  std::vector<double> manipulability;
  std::vector<double> rcm_error;
  std::vector<double> ee_error;
  std::vector<double> solve_time_s;
  std::vector<VectorX> q;
  std::vector<double> limit_violation;
  std::vector<char> gradient_flagged;

  TrackingAggregates aggregates;

  std::size_t size() const { return step.size(); }
};

inline double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double max_of(const std::vector<double>& v, std::size_t from = 0) {
  double m = 0.0;
  for (std::size_t i = from; i < v.size(); ++i) m = std::max(m, v[i]);
  return m;
}

/// Aggregates as plain means/maxima over the stored series.
inline TrackingAggregates compute_aggregates(const TrackingReport& r) {
  TrackingAggregates a;
  a.avg_manipulability = mean_of(r.manipulability);
  a.max_manipulability = max_of(r.manipulability);
  a.avg_rcm_error = mean_of(r.rcm_error);
  a.max_rcm_error_after_settling = max_of(r.rcm_error, kSettlingSteps);
  a.avg_ee_error = mean_of(r.ee_error);
  a.max_ee_error = max_of(r.ee_error);
  a.mean_solve_time_s = mean_of(r.solve_time_s);
  a.max_solve_time_s = max_of(r.solve_time_s);
  a.max_joint_limit_violation = max_of(r.limit_violation);
  a.gradient_flags = static_cast<int>(std::count(r.gradient_flagged.begin(), r.gradient_flagged.end(), 1));
  return a;
}

inline double limit_violation(const KinematicChain& chain, const VectorX& q) {
  double v = 0.0;
  for (int i = 0; i < chain.dof(); ++i) {
    v = std::max({v, chain.joints()[i].lower - q[i], q[i] - chain.joints()[i].upper});
  }
  return v;
}

/// Closed-loop path tracking with explicit Euler integration q += dt * qdot.
///
/// Throws TrackingError (with the step index) when a level QP does not
/// converge or when the shaft drifts more than kRcmDivergence from the trocar.
inline TrackingReport run_tracking(const Scenario& scenario, HqpSettings settings = {}) {
  validate_scenario(scenario);
  const ScenarioConfig& c = scenario.config;
  const KinematicChain& chain = scenario.chain;

  TrackingReport r;
  r.scenario = c.name;
  r.chain = chain.name();
  r.fingerprint = scenario_fingerprint(c, chain.name());
  r.path_kind = to_string(c.path.kind);
  r.constrained = c.constrained;
  r.optimize = c.optimize_manipulability && c.gains.Kt3 > 0.0;
  r.timing_recorded = c.record_timing;

  const std::optional<Vector3> trocar = c.constrained ? c.trocar : std::nullopt;
  HqpSolver solver(settings);
  VectorX q = c.initial_q;
  const auto n = static_cast<std::size_t>(c.path.n_steps);
  for (auto* v : {&r.t, &r.manipulability, &r.rcm_error, &r.ee_error, &r.solve_time_s,
                  &r.limit_violation}) {
    v->reserve(n);
  }

  for (int k = 0; k < c.path.n_steps; ++k) {
    const double t = c.path.t_at(k);
    const Transform target = path_point(t, c.path);

    const auto t0 = std::chrono::steady_clock::now();
    const SurgicalProblem problem = build_surgical_problem(
        chain, q, target, trocar, c.gains, c.dt, c.limit_dt, c.optimize_manipulability);
    const HierarchySolution sol = solver.solve(problem.levels);
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (!sol.stats.all_solved()) {
      throw TrackingError(static_cast<std::size_t>(k), "QP did not converge within " +
                                                           std::to_string(settings.qp.max_iter) +
                                                           " iterations");
    }
    q += c.dt * sol.qdot;

    const auto poses = joint_poses(chain, q);
    const Transform ee = frame_pose(chain, poses, frame_names::kEndEffector);
    double e_rcm = 0.0;
    if (trocar) {
      e_rcm = rcm_state_from_points(frame_pose(chain, poses, frame_names::kRcmPre).translation,
                                    frame_pose(chain, poses, frame_names::kRcmPost).translation,
                                    *trocar)
                  .error();
      if (e_rcm > kRcmDivergence) {
        throw TrackingError(static_cast<std::size_t>(k),
                            "RCM diverged: shaft is " + std::to_string(e_rcm * 1e3) +
                                " mm from the trocar");
      }
    }

    r.step.push_back(k);
    r.t.push_back(t);
    r.manipulability.push_back(manipulability(frame_jacobian(chain, poses, frame_names::kEndEffector).matrix));
    r.rcm_error.push_back(e_rcm);
    r.ee_error.push_back(pose_error(ee, target).norm());
    r.solve_time_s.push_back(c.record_timing ? elapsed : 0.0);
    r.q.push_back(q);
    r.limit_violation.push_back(limit_violation(chain, q));
    r.gradient_flagged.push_back(problem.gradient_flagged ? 1 : 0);
  }
  r.aggregates = compute_aggregates(r);
  return r;
}

}  // namespace rcmik::bench
