#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "rcmik/errors.hpp"

namespace rcmik {

/// Dense strictly convex QP:  min 1/2 x^T Q x + p^T x   s.t.  C x <= d.
struct QpProblem {
  Eigen::MatrixXd Q;
  Eigen::VectorXd p;
  Eigen::MatrixXd C;
  Eigen::VectorXd d;

  int num_vars() const { return static_cast<int>(Q.rows()); }
  int num_constraints() const { return static_cast<int>(C.rows()); }

  void validate() const {
    const auto n = Q.rows();
    if (Q.cols() != n || p.size() != n) throw DimensionError("qp: Q/p size mismatch");
    if (C.rows() != d.size() || (C.rows() > 0 && C.cols() != n)) {
      throw DimensionError("qp: C/d size mismatch");
    }
    if (!Q.allFinite() || !p.allFinite() || !C.allFinite() || !d.allFinite()) {
      throw ValidationError("qp: non-finite data");
    }
  }
};

enum class QpStatus { Solved, MaxIterations };

inline const char* to_string(QpStatus s) {
  return s == QpStatus::Solved ? "solved" : "max_iterations";
}

struct QpSettings {
  double eps_abs = 1e-8;
  double eps_rel = 1e-8;
  int max_iter = 4000;
  double rho = 0.1;
  double sigma = 1e-6;
  double alpha = 1.6;
  bool adaptive_rho = true;
  int adaptive_rho_interval = 25;
  double adaptive_rho_tolerance = 5.0;
  bool polish = true;
  /// ADMM iterations between early polish attempts.
  int polish_interval = 10;
  /// Add/drop passes allowed when correcting a polish active set.
  int max_active_set_passes = 50;
};

struct QpWarmStart {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
};

struct QpResult {
  Eigen::VectorXd x;
  Eigen::VectorXd y;  ///< multipliers of C x <= d, nonnegative at the optimum
  QpStatus status = QpStatus::MaxIterations;
  int iterations = 0;
  bool polished = false;
  double primal_residual = std::numeric_limits<double>::infinity();
  double dual_residual = std::numeric_limits<double>::infinity();
};

/// Operator-splitting QP solver (OSQP iteration specialized to one-sided rows),
/// followed by an active-set polish that recovers the exact KKT point.
class AdmmQpSolver {
 public:
  explicit AdmmQpSolver(QpSettings settings = {}) : settings_(settings) {}

  const QpSettings& settings() const { return settings_; }

  QpResult solve(const QpProblem& qp, const QpWarmStart* warm = nullptr) const {
    qp.validate();
    const int n = qp.num_vars();
    const int m = qp.num_constraints();

    Eigen::LLT<Eigen::MatrixXd> q_llt(qp.Q);
    if (q_llt.info() != Eigen::Success) {
      throw ValidationError("qp: Q is not positive definite");
    }

    QpResult res;
    if (m == 0) {
      res.x = q_llt.solve(-qp.p);
      res.y.resize(0);
      res.status = QpStatus::Solved;
      compute_residuals(qp, res);
      return res;
    }

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
    if (warm != nullptr && warm->x.size() == n) x = warm->x;
    if (warm != nullptr && warm->y.size() == m) y = warm->y;
    Eigen::VectorXd z = (qp.C * x).cwiseMin(qp.d);

    double rho = settings_.rho;
    const double sigma = settings_.sigma;
    const double alpha = settings_.alpha;
    const Eigen::MatrixXd ctc = qp.C.transpose() * qp.C;
    auto factor = [&](double r) {
      Eigen::MatrixXd k = qp.Q + ctc * r;
      k.diagonal().array() += sigma;
      return Eigen::LLT<Eigen::MatrixXd>(k);
    };
    Eigen::LLT<Eigen::MatrixXd> kkt = factor(rho);

    Eigen::VectorXd x_tilde(n), z_tilde(m), z_prev(m), cx(m), qx(n), cty(n);
    for (int it = 1; it <= settings_.max_iter; ++it) {
      res.iterations = it;
      x_tilde = kkt.solve(sigma * x - qp.p + qp.C.transpose() * (rho * z - y));
      z_tilde = qp.C * x_tilde;
      x = alpha * x_tilde + (1.0 - alpha) * x;
      z_prev = z;
      const Eigen::VectorXd z_relaxed = alpha * z_tilde + (1.0 - alpha) * z_prev;
      z = (z_relaxed + y / rho).cwiseMin(qp.d);
      y += rho * (z_relaxed - z);

      cx = qp.C * x;
      qx = qp.Q * x;
      cty = qp.C.transpose() * y;
      const double r_prim = (cx - z).lpNorm<Eigen::Infinity>();
      const double r_dual = (qx + qp.p + cty).lpNorm<Eigen::Infinity>();
      const double prim_scale = std::max(cx.lpNorm<Eigen::Infinity>(), z.lpNorm<Eigen::Infinity>());
      const double dual_scale = std::max({qx.lpNorm<Eigen::Infinity>(),
                                          cty.lpNorm<Eigen::Infinity>(),
                                          qp.p.lpNorm<Eigen::Infinity>()});
      const bool converged = r_prim <= settings_.eps_abs + settings_.eps_rel * prim_scale &&
                             r_dual <= settings_.eps_abs + settings_.eps_rel * dual_scale;

      if (converged || (settings_.polish && it % settings_.polish_interval == 0)) {
        if (settings_.polish) {
          if (auto polished = polish(qp, q_llt, z, y)) {
            polished->iterations = it;
            return *polished;
          }
        }
        if (converged) {
          res.x = x;
          res.y = y.cwiseMax(0.0);
          res.status = QpStatus::Solved;
          compute_residuals(qp, res);
          return res;
        }
      }

      if (settings_.adaptive_rho && it % settings_.adaptive_rho_interval == 0) {
        const double num = r_prim / std::max(prim_scale, 1e-30);
        const double den = r_dual / std::max(dual_scale, 1e-30);
        if (num > 0.0 && den > 0.0) {
          const double new_rho = std::clamp(rho * std::sqrt(num / den), 1e-6, 1e6);
          if (new_rho > rho * settings_.adaptive_rho_tolerance ||
              new_rho < rho / settings_.adaptive_rho_tolerance) {
            rho = new_rho;
            kkt = factor(rho);
          }
        }
      }
    }

    res.x = x;
    res.y = y.cwiseMax(0.0);
    res.status = QpStatus::MaxIterations;
    compute_residuals(qp, res);
    return res;
  }

  /// Scaled KKT test used to accept a candidate point.
  bool kkt_satisfied(const QpProblem& qp, const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    const Eigen::VectorXd qx = qp.Q * x;
    const Eigen::VectorXd cx = qp.C * x;
    const Eigen::VectorXd cty = qp.C.transpose() * y;
    const double stat_tol = settings_.eps_abs +
        settings_.eps_rel * std::max({qx.lpNorm<Eigen::Infinity>(), cty.lpNorm<Eigen::Infinity>(),
                                      qp.p.lpNorm<Eigen::Infinity>()});
    if ((qx + qp.p + cty).lpNorm<Eigen::Infinity>() > stat_tol) return false;
    if (qp.num_constraints() == 0) return true;
    const double prim_tol = settings_.eps_abs +
        settings_.eps_rel * std::max(cx.lpNorm<Eigen::Infinity>(), qp.d.lpNorm<Eigen::Infinity>());
    const Eigen::VectorXd slack = cx - qp.d;
    if (slack.maxCoeff() > prim_tol) return false;
    if (y.minCoeff() < -settings_.eps_abs) return false;
    for (int i = 0; i < qp.num_constraints(); ++i) {
      if (std::abs(y[i] * slack[i]) > prim_tol) return false;
    }
    return true;
  }

 private:
  static void compute_residuals(const QpProblem& qp, QpResult& res) {
    res.dual_residual = (qp.Q * res.x + qp.p + qp.C.transpose() * res.y).lpNorm<Eigen::Infinity>();
    res.primal_residual =
        qp.num_constraints() == 0 ? 0.0 : (qp.C * res.x - qp.d).cwiseMax(0.0).lpNorm<Eigen::Infinity>();
  }

  /// Solves the equality-constrained problem on a guessed active set, then
  /// repairs the guess (drop negative multipliers, add violated rows) until the
  /// KKT test passes or the pass budget runs out.
  std::optional<QpResult> polish(const QpProblem& qp, const Eigen::LLT<Eigen::MatrixXd>& q_llt,
                                 const Eigen::VectorXd& z, const Eigen::VectorXd& y) const {
    const int m = qp.num_constraints();
    std::vector<char> active(m, 0);
    for (int i = 0; i < m; ++i) active[i] = (qp.d[i] - z[i] < y[i]) ? 1 : 0;

    const Eigen::VectorXd q_inv_p = q_llt.solve(qp.p);
    for (int pass = 0; pass <= settings_.max_active_set_passes; ++pass) {
      std::vector<int> idx;
      for (int i = 0; i < m; ++i) {
        if (active[i]) idx.push_back(i);
      }
      const int k = static_cast<int>(idx.size());

      Eigen::VectorXd x;
      Eigen::VectorXd y_full = Eigen::VectorXd::Zero(m);
      if (k == 0) {
        x = -q_inv_p;
      } else {
        Eigen::MatrixXd ca(k, qp.num_vars());
        Eigen::VectorXd da(k);
        for (int r = 0; r < k; ++r) {
          ca.row(r) = qp.C.row(idx[r]);
          da[r] = qp.d[idx[r]];
        }
        const Eigen::MatrixXd q_inv_cat = q_llt.solve(ca.transpose());
        const Eigen::MatrixXd schur = ca * q_inv_cat;
        const Eigen::VectorXd rhs = -da - ca * q_inv_p;
        const Eigen::VectorXd ya = schur.completeOrthogonalDecomposition().solve(rhs);
        x = -q_inv_p - q_inv_cat * ya;
        for (int r = 0; r < k; ++r) y_full[idx[r]] = ya[r];
      }

      if (kkt_satisfied(qp, x, y_full)) {
        QpResult res;
        res.x = std::move(x);
        res.y = y_full.cwiseMax(0.0);
        res.status = QpStatus::Solved;
        res.polished = true;
        compute_residuals(qp, res);
        return res;
      }

      // Repair: drop the most negative multiplier first, else add the most violated row.
      int worst_dual = -1;
      double worst_dual_val = -settings_.eps_abs;
      for (int i = 0; i < m; ++i) {
        if (active[i] && y_full[i] < worst_dual_val) {
          worst_dual_val = y_full[i];
          worst_dual = i;
        }
      }
      if (worst_dual >= 0) {
        active[worst_dual] = 0;
        continue;
      }
      const Eigen::VectorXd viol = qp.C * x - qp.d;
      int worst_primal = -1;
      double worst_primal_val = 0.0;
      for (int i = 0; i < m; ++i) {
        if (!active[i] && viol[i] > worst_primal_val) {
          worst_primal_val = viol[i];
          worst_primal = i;
        }
      }
      if (worst_primal < 0) return std::nullopt;
      active[worst_primal] = 1;
    }
    return std::nullopt;
  }

  QpSettings settings_;
};

inline QpResult solve_qp(const QpProblem& qp, const std::optional<QpWarmStart>& warm = std::nullopt,
                         const QpSettings& settings = {}) {
  return AdmmQpSolver(settings).solve(qp, warm ? &*warm : nullptr);
}

}  // namespace rcmik
