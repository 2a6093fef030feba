// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "support/oracles.hpp"

namespace {

using namespace rcmik;
using namespace rcmik::bench;

const std::vector<std::string> kScenarios = {"kc1_constrained_helix", "kc2_constrained_helix",
                                             "kc1_unconstrained_lissajous", "kc2_unconstrained_lissajous"};

Scenario shipped(const std::string& name, bool optimize) {
  Scenario s = load_scenario(oracle::data_dir() / "scenarios" / (name + ".json"));
  s.config.optimize_manipulability = optimize;
  return s;
}

struct Pair {
  TrackingReport off, on;
  double seconds = 0.0;
  ComparisonSummary summary() const { return compare_runs(off, on); }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

struct Line {
  int id;
  bool pass;
  std::string detail;
};

Line c1(const std::map<std::string, Pair>& runs) {
  const double g1 = runs.at("kc1_constrained_helix").summary().avg_m_change_pct();
  const double g2 = runs.at("kc2_constrained_helix").summary().avg_m_change_pct();
  const double t = std::max(runs.at("kc1_constrained_helix").seconds, runs.at("kc2_constrained_helix").seconds);
  return {1, g1 >= 5.0 && g2 >= 5.0 && t < 60.0,
          fmt("constrained avg m gain kc1 %+.2f%%, kc2 %+.2f%% (need >= +5%%); slowest paired run %.2f s (< 60)",
              g1, g2, t)};
}

Line c2(const std::map<std::string, Pair>& runs) {
  const auto s1 = runs.at("kc1_unconstrained_lissajous").summary();
  const auto s2 = runs.at("kc2_unconstrained_lissajous").summary();
  double worst = 1e300;
  for (const auto& [name, p] : runs) worst = std::min(worst, p.summary().avg_m_change_pct());
  const bool ok = s1.avg_m_change_pct() >= 3.0 && s2.avg_m_change_pct() >= 20.0 && s2.max_m_change_pct() > 0.0 &&
                  worst >= -0.1;
  return {2, ok,
          fmt("unconstrained avg m gain kc1 %+.2f%% (>= +3%%), kc2 %+.2f%% (>= +20%%), kc2 max m %+.2f%% (> 0); "
              "worst pair %+.2f%% (>= -0.1%%)",
              s1.avg_m_change_pct(), s2.avg_m_change_pct(), s2.max_m_change_pct(), worst)};
}

Line c3(const std::map<std::string, Pair>& runs) {
  double avg = 0.0, peak = 0.0;
  for (const char* name : {"kc1_constrained_helix", "kc2_constrained_helix"}) {
    for (const TrackingReport* r : {&runs.at(name).off, &runs.at(name).on}) {
      avg = std::max(avg, r->aggregates.avg_rcm_error);
      peak = std::max(peak, r->aggregates.max_rcm_error_after_settling);
    }
  }
  return {3, avg <= 1e-4 && peak <= 5e-4,
          fmt("worst avg RCM error %.4f mm (<= 0.1), worst settled per-step %.4f mm (<= 0.5)", 1e3 * avg,
              1e3 * peak)};
}

Line c4(const std::map<std::string, Pair>& runs) {
  double worst = 0.0;
  for (const auto& [name, p] : runs) {
    worst = std::max({worst, p.off.aggregates.avg_ee_error, p.on.aggregates.avg_ee_error});
  }
  return {4, worst <= 1e-4, fmt("worst avg end-effector error %.3e (<= 1e-4)", worst)};
}

Line c5() {
  std::mt19937 rng(5);
  std::normal_distribution<double> nd(0.0, 0.004);
  double worst = 0.0, least_change = 1e300;
  int cases = 0;
  for (const char* chain_name : {"kc1_like", "kc2_like"}) {
    const KinematicChain c = oracle::shipped_chain(chain_name);
    const GainSet gains = GainSet::reference(c.dof());
    for (int k = 0; k < 25; ++k, ++cases) {
      const VectorX q = oracle::random_config(c, rng, 0.15);
      const Vector3 pre = forward_kinematics(c, q, "rcm_pre").translation;
      const Vector3 post = forward_kinematics(c, q, "rcm_post").translation;
      const Vector3 trocar = 0.5 * (pre + post) + Vector3(nd(rng), nd(rng), nd(rng));
      Transform target = forward_kinematics(c, q, "ee");
      target.translation += Vector3(nd(rng), nd(rng), nd(rng));
      target.rotation = oracle::random_rotation(rng, 0.01) * target.rotation;
      const SurgicalProblem p = build_surgical_problem(c, q, target, trocar, gains, 0.001, 0.001, true);
      const VectorX both = solve_hierarchy(p.levels).qdot;
      const VectorX top = solve_hierarchy({p.levels[0]}).qdot;
      least_change = std::min(least_change, (both - top).norm());
      for (const auto& t : p.levels[0].tasks) {
        worst = std::max(worst, std::abs((t.A * both - t.b).norm() - (t.A * top - t.b).norm()));
      }
    }
  }
  // The check is only meaningful when level 2 actually moves the solution.
  return {5, worst <= 1e-8 && least_change > 1e-6,
          fmt("max level-1 residual change from level 2 over %.0f constrained configurations: %.2e (<= 1e-8); "
              "smallest qdot change from level 2 %.2e",
              cases, worst, least_change)};
}

Line c6() {
  std::mt19937 rng(6);
  double worst_rel = 0.0;
  int n = 0;
  for (const char* chain_name : {"kc1_like", "kc2_like"}) {
    const KinematicChain c = oracle::shipped_chain(chain_name);
    for (int got = 0, tries = 0; got < 50 && tries < 10000; ++tries) {
      const VectorX q = oracle::random_config(c, rng, 0.05);
      if (manipulability(c, q) <= 1e-3) continue;
      const VectorX g = manipulability_gradient(c, q);
      const VectorX ref = manipulability_gradient(c, q, frame_names::kEndEffector, 1e-7);
      worst_rel = std::max(worst_rel, (g - ref).norm() / std::max(ref.norm(), 1e-12));
      ++got;
      ++n;
    }
  }
  // Planar 2R: the planar manipulability |l1 l2 sin q2| has derivative l1 l2 cos q2.
  const KinematicChain arm = oracle::planar_2r(1.0, 1.0);
  double worst_2r = 0.0;
  for (double q2 : {0.3, 0.7, 1.1, 1.5, 2.0, 2.6}) {
    const VectorX q = (VectorX(2) << 0.4, q2).finished();
    const VectorX g = central_difference_gradient(
        [&](const VectorX& x) {
          return manipulability(MatrixX(geometric_jacobian(arm, x, "ee").matrix.topRows(2)));
        },
        q, 1e-6);
    worst_2r = std::max({worst_2r, std::abs(g[0]), std::abs(g[1] - std::cos(q2))});
  }
  return {6, n == 100 && worst_rel <= 1e-4 && worst_2r <= 1e-5,
          fmt("gradient vs step-refined oracle on %.0f configurations: max rel %.2e (<= 1e-4); 2R closed form "
              "max err %.2e (<= 1e-5)",
              n, worst_rel, worst_2r)};
}

Line c7() {
  std::mt19937 rng(7);
  std::normal_distribution<double> nd(0.0, 0.01);
  double worst = 0.0;
  for (const char* chain_name : {"kc1_like", "kc2_like"}) {
    const KinematicChain c = oracle::shipped_chain(chain_name);
    for (int k = 0; k < 100; ++k) {
      const VectorX q = oracle::random_config(c, rng, 0.05);
      const Vector3 pre = forward_kinematics(c, q, "rcm_pre").translation;
      const Vector3 post = forward_kinematics(c, q, "rcm_post").translation;
      const Vector3 trocar = 0.5 * (pre + post) + Vector3(nd(rng), nd(rng), nd(rng));
      const RcmState s = rcm_state(c, q, trocar);
      const MatrixX j = rcm_jacobian(s, geometric_jacobian(c, q, "rcm_pre").matrix.topRows(3),
                                     geometric_jacobian(c, q, "rcm_post").matrix.topRows(3));
      worst = std::max(worst, (j - oracle::fd_rcm_jacobian(c, q, trocar)).cwiseAbs().maxCoeff());
    }
  }
  return {7, worst <= 1e-5, fmt("J_rcm vs finite differences, 100 configurations per chain: max err %.2e (<= 1e-5)",
                                worst)};
}

Line c8() {
  std::mt19937 rng(8);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_int_distribution<int> dim(1, 12);
  double worst_kkt = 0.0;
  for (int k = 0; k < 200; ++k) {
    const int n = dim(rng), m = dim(rng);
    QpProblem qp;
    qp.Q = oracle::random_spd(n, rng, 0.1, 10.0);
    qp.p = VectorX::NullaryExpr(n, [&] { return 3.0 * nd(rng); });
    qp.C = MatrixX::NullaryExpr(m, n, [&] { return nd(rng); });
    qp.d = VectorX::NullaryExpr(m, [&] { return std::abs(nd(rng)) + 0.1; });
    const QpResult r = solve_qp(qp);
    const auto rep = oracle::kkt(qp, r.x, r.y);
    worst_kkt = std::max({worst_kkt, rep.stationarity, rep.primal_violation, rep.dual_violation,
                          rep.complementarity, r.status == QpStatus::Solved ? 0.0 : 1.0});
  }
  double worst_grid = 0.0;
  for (int n = 1; n <= 6; ++n) {
    for (int rep = 0; rep < 3; ++rep) {
      const MatrixX q = oracle::random_spd(n, rng, 0.5, 3.0);
      const VectorX p = VectorX::NullaryExpr(n, [&] { return 2.0 * nd(rng); });
      const VectorX lo = VectorX::Constant(n, -1.0), hi = VectorX::Constant(n, 1.0);
      QpProblem qp{q, p, MatrixX(2 * n, n), VectorX(2 * n)};
      qp.C << MatrixX::Identity(n, n), -MatrixX::Identity(n, n);
      qp.d << hi, -lo;
      const QpResult r = solve_qp(qp);
      auto f = [&](const VectorX& x) { return 0.5 * x.dot(q * x) + p.dot(x); };
      const VectorX brute = oracle::grid_minimize(f, lo, hi, n <= 3 ? 9 : 7, 1e-6);
      worst_grid = std::max(worst_grid, (r.x - brute).cwiseAbs().maxCoeff());
    }
  }
  return {8, worst_kkt <= 1e-8 && worst_grid <= 1e-4,
          fmt("KKT residual over 200 random QPs %.2e (<= 1e-8); grid oracle n<=6 max err %.2e (<= 1e-4)", worst_kkt,
              worst_grid)};
}

Line c9(const std::map<std::string, Pair>& runs) {
  double worst = 0.0;
  for (const auto& [name, p] : runs) {
    for (const TrackingReport* r : {&p.off, &p.on}) {
      const KinematicChain c = shipped(name, false).chain;
      for (const VectorX& q : r->q) worst = std::max(worst, limit_violation(c, q));
    }
  }
  return {9, worst <= 1e-9, fmt("max joint limit violation over all runs %.2e (<= 1e-9)", worst)};
}

Line c10() {
  bool ok = true;
  std::string detail;
  for (const char* name : {"kc1_constrained_helix", "kc2_constrained_helix"}) {
    for (bool optimize : {false, true}) {
      Scenario s = shipped(name, optimize);
      s.config.record_timing = true;
      const TrackingAggregates a = run_tracking(s).aggregates;
      ok = ok && a.mean_solve_time_s < 5e-3;
      detail += std::string(detail.empty() ? "" : "; ") + s.config.name.substr(0, 3) +
                (optimize ? " on" : " off") +
                fmt(" mean %.3f ms max %.3f ms", 1e3 * a.mean_solve_time_s, 1e3 * a.max_solve_time_s);
    }
  }
  return {10, ok, "constrained solve time (mean < 5 ms): " + detail};
}

Line c11(const std::map<std::string, Pair>& runs) {
  bool identical = true;
  for (const auto& [name, p] : runs) {
    const TrackingReport again = run_tracking(shipped(name, true));
    identical = identical && report_json_text(again) == report_json_text(p.on) &&
                report_csv(again) == report_csv(p.on);
  }
  double worst = 0.0;
  for (const auto& [name, p] : runs) {
    Scenario s = shipped(name, true);
    apply_override(s.config, "Kt3=0");
    const TrackingAggregates a = run_tracking(s).aggregates;
    const TrackingAggregates& b = p.off.aggregates;
    for (double d : {a.avg_manipulability - b.avg_manipulability, a.max_manipulability - b.max_manipulability,
                     a.avg_rcm_error - b.avg_rcm_error, a.avg_ee_error - b.avg_ee_error,
                     a.max_ee_error - b.max_ee_error}) {
      worst = std::max(worst, std::abs(d));
    }
  }
  return {11, identical && worst <= 1e-9,
          std::string("repeated runs byte-identical: ") + (identical ? "yes" : "no") +
              fmt("; Kt3=0 vs off aggregates max diff %.2e (<= 1e-9)", worst)};
}

}  // namespace

int main() {
  std::map<std::string, Pair> runs;
  for (const auto& name : kScenarios) {
    const auto start = std::chrono::steady_clock::now();
    Pair p{run_tracking(shipped(name, false)), run_tracking(shipped(name, true))};
    p.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    runs[name] = std::move(p);
    const auto s = runs[name].summary();
    std::printf("%-28s avg m %.5f -> %.5f (%+.2f%%), max m %.5f -> %.5f (%+.2f%%)\n", name.c_str(),
                s.baseline.avg_manipulability, s.optimized.avg_manipulability, s.avg_m_change_pct(),
                s.baseline.max_manipulability, s.optimized.max_manipulability, s.max_m_change_pct());
  }

  const std::vector<Line> lines = {c1(runs), c2(runs), c3(runs), c4(runs), c5(), c6(),
                                   c7(),      c8(),      c9(runs), c10(),    c11(runs)};
  bool all = true;
  for (const Line& l : lines) {
    std::printf("criterion %2d %s  %s\n", l.id, l.pass ? "PASS" : "FAIL", l.detail.c_str());
    all = all && l.pass;
  }
  return all ? 0 : 1;
}
