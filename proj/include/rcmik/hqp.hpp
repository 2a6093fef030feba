#pragma once

#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include "rcmik/qp.hpp"
#include "rcmik/tasks.hpp"

namespace rcmik {

/// Tasks and inequality rows that share one rank of the hierarchy.
struct PriorityLevel {
  std::vector<EqualityTask> tasks;
  std::vector<InequalityConstraint> constraints;
  double damping = 1e-5;       ///< K_d on ||qdot||^2
  double slack_weight = 1e-5;  ///< K_w on ||w||^2

  int dof() const {
    if (!tasks.empty()) return static_cast<int>(tasks.front().A.cols());
    if (!constraints.empty()) return static_cast<int>(constraints.front().C.cols());
    return 0;
  }

  int num_slacks() const {
    int k = 0;
    for (const auto& c : constraints) k += static_cast<int>(c.C.rows());
    return k;
  }

  void validate() const {
    if (tasks.empty() && constraints.empty()) throw ValidationError("priority level is empty");
    if (!(damping > 0.0) || !(slack_weight > 0.0)) {
      throw ValidationError("priority level: damping and slack weight must be positive");
    }
    const int n = dof();
    for (const auto& t : tasks) {
      t.validate();
      if (t.A.cols() != n) throw DimensionError("priority level: task '" + t.name + "' column count");
    }
    for (const auto& c : constraints) {
      c.validate();
      if (c.C.cols() != n) throw DimensionError("priority level: constraint '" + c.name + "' column count");
    }
  }
};

/// Inequality rows inherited from a solved level, relaxed by its optimal slack.
struct FrozenConstraint {
  MatrixX C;
  VectorX d_relaxed;  ///< d + w*
};

/// QP of one level over x = [qdot_new; w], where the joint velocity is
/// offset + projector * qdot_new.
///
/// The cost is ||Abar x - bbar||^2 / 2 with
///   Abar = [ sqrt(K_t,i) A_i N , 0 ; sqrt(K_d) I , 0 ; 0 , sqrt(K_w) I ],
///   bbar = [ sqrt(K_t,i) (b_i - A_i offset) ; 0 ; 0 ],
/// i.e. Q = Abar^T Abar and p = -Abar^T bbar. Rows of this level get their own
/// slack; frozen rows from higher levels are hard, relaxed by their w*.
inline QpProblem assemble_level(const PriorityLevel& level, const MatrixX& projector,
                                const VectorX& offset,
                                const std::vector<FrozenConstraint>& frozen = {}) {
  level.validate();
  const int n = level.dof();
  if (projector.rows() != n || projector.cols() != n) {
    throw DimensionError("assemble_level: projector must be " + std::to_string(n) + "x" +
                         std::to_string(n));
  }
  if (offset.size() != n) throw DimensionError("assemble_level: offset size");
  const int ns = level.num_slacks();
  const int nx = n + ns;

  int task_rows = 0;
  for (const auto& t : level.tasks) task_rows += static_cast<int>(t.A.rows());

  MatrixX a_bar = MatrixX::Zero(task_rows + nx, nx);
  VectorX b_bar = VectorX::Zero(task_rows + nx);
  int row = 0;
  for (const auto& t : level.tasks) {
    const double sw = std::sqrt(t.weight);
    const auto rows = t.A.rows();
    a_bar.block(row, 0, rows, n) = sw * (t.A * projector);
    b_bar.segment(row, rows) = sw * (t.b - t.A * offset);
    row += static_cast<int>(rows);
  }
  a_bar.block(row, 0, n, n).diagonal().setConstant(std::sqrt(level.damping));
  row += n;
  a_bar.block(row, n, ns, ns).diagonal().setConstant(std::sqrt(level.slack_weight));

  QpProblem qp;
  qp.Q = a_bar.transpose() * a_bar;
  qp.Q = 0.5 * (qp.Q + qp.Q.transpose()).eval();
  qp.p = -a_bar.transpose() * b_bar;

  int frozen_rows = 0;
  for (const auto& f : frozen) {
    if (f.C.cols() != n) throw DimensionError("assemble_level: frozen constraint columns");
    frozen_rows += static_cast<int>(f.C.rows());
  }
  qp.C = MatrixX::Zero(ns + frozen_rows, nx);
  qp.d = VectorX::Zero(ns + frozen_rows);
  row = 0;
  for (const auto& c : level.constraints) {
    const auto rows = c.C.rows();
    qp.C.block(row, 0, rows, n) = c.C * projector;
    qp.C.block(row, n + row, rows, rows).diagonal().setConstant(-1.0);
    qp.d.segment(row, rows) = c.d - c.C * offset;
    row += static_cast<int>(rows);
  }
  for (const auto& f : frozen) {
    const auto rows = f.C.rows();
    qp.C.block(row, 0, rows, n) = f.C * projector;
    qp.d.segment(row, rows) = f.d_relaxed - f.C * offset;
    row += static_cast<int>(rows);
  }
  return qp;
}

/// N = I - A^+ A via SVD; singular values below tol * sigma_max count as zero.
inline MatrixX null_space_projector(const MatrixX& a, double tol = 1e-8) {
  const auto n = a.cols();
  if (a.rows() == 0) return MatrixX::Identity(n, n);
  Eigen::JacobiSVD<MatrixX> svd(a, Eigen::ComputeFullV);
  const VectorX& sv = svd.singularValues();
  const double sigma_max = sv.size() > 0 ? sv[0] : 0.0;
  int rank = 0;
  if (sigma_max > 0.0) {
    for (int i = 0; i < sv.size(); ++i) {
      if (sv[i] > tol * sigma_max) ++rank;
    }
  }
  if (rank == n) return MatrixX::Zero(n, n);
  const MatrixX v_r = svd.matrixV().leftCols(rank);
  MatrixX proj = MatrixX::Identity(n, n) - v_r * v_r.transpose();
  return 0.5 * (proj + proj.transpose());
}

struct HqpSettings {
  QpSettings qp;
  double rank_tolerance = 1e-8;
  bool warm_start = true;
};

struct HqpStats {
  int iterations = 0;              ///< ADMM iterations summed over levels
  std::vector<QpStatus> statuses;  ///< per level
  double solve_time_s = 0.0;

  bool all_solved() const {
    for (auto s : statuses) {
      if (s != QpStatus::Solved) return false;
    }
    return true;
  }
};

struct HierarchySolution {
  VectorX qdot;
  std::vector<VectorX> slacks_per_level;
  /// ||A_i qdot - b_i|| for every task, per level, at the final qdot.
  std::vector<std::vector<double>> level_residuals;
  HqpStats stats;
};

/// Lexicographic solver. Keeps per-level primal/dual iterates between calls for
/// warm starting, so one instance belongs to one control loop.
class HqpSolver {
 public:
  explicit HqpSolver(HqpSettings settings = {}) : settings_(settings), qp_(settings.qp) {}

  void reset() { warm_.clear(); }

  const HqpSettings& settings() const { return settings_; }

  HierarchySolution solve(const std::vector<PriorityLevel>& levels) {
    if (levels.empty()) throw ValidationError("solve_hierarchy: no priority levels");
    const auto t0 = std::chrono::steady_clock::now();
    const int n = levels.front().dof();
    for (const auto& level : levels) {
      if (level.dof() != n) throw DimensionError("solve_hierarchy: levels disagree on dof");
    }
    if (warm_.size() != levels.size()) warm_.assign(levels.size(), QpWarmStart{});

    HierarchySolution sol;
    VectorX offset = VectorX::Zero(n);
    MatrixX projector = MatrixX::Identity(n, n);
    MatrixX stacked(0, n);
    std::vector<FrozenConstraint> frozen;

    for (std::size_t li = 0; li < levels.size(); ++li) {
      const PriorityLevel& level = levels[li];
      const QpProblem qp = assemble_level(level, projector, offset, frozen);
      const QpResult res =
          qp_.solve(qp, settings_.warm_start ? &warm_[li] : nullptr);
      warm_[li] = {res.x, res.y};
      sol.stats.iterations += res.iterations;
      sol.stats.statuses.push_back(res.status);

      offset += projector * res.x.head(n);
      VectorX w = res.x.tail(level.num_slacks());

      int row = 0;
      for (const auto& c : level.constraints) {
        const auto rows = c.C.rows();
        // w* is at least the violation of the composed solution, so every lower
        // level starts feasible at qdot_new = 0.
        const VectorX w_c = w.segment(row, rows).cwiseMax(c.C * offset - c.d);
        w.segment(row, rows) = w_c;
        frozen.push_back({c.C, c.d + w_c});
        row += static_cast<int>(rows);
      }
      sol.slacks_per_level.push_back(w);

      if (li + 1 < levels.size()) {
        for (const auto& t : level.tasks) {
          MatrixX grown(stacked.rows() + t.A.rows(), n);
          grown << stacked, t.A;
          stacked.swap(grown);
        }
        projector = null_space_projector(stacked, settings_.rank_tolerance);
      }
    }

    sol.qdot = offset;
    for (const auto& level : levels) {
      std::vector<double> r;
      for (const auto& t : level.tasks) r.push_back((t.A * sol.qdot - t.b).norm());
      sol.level_residuals.push_back(std::move(r));
    }
    sol.stats.solve_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return sol;
  }

 private:
  HqpSettings settings_;
  AdmmQpSolver qp_;
  std::vector<QpWarmStart> warm_;
};

/// Cold-start convenience wrapper around HqpSolver.
inline HierarchySolution solve_hierarchy(const std::vector<PriorityLevel>& levels,
                                         const HqpSettings& settings = {}) {
  HqpSolver solver(settings);
  return solver.solve(levels);
}

}  // namespace rcmik
