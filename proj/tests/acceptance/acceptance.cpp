// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include "bsde/errors.hpp"
#include "bsde/estimation.hpp"
#include "bsde/experiment.hpp"
#include "bsde/model.hpp"
#include "bsde/pde.hpp"
#include "bsde/random.hpp"
#include "bsde/value_function.hpp"

namespace {

using namespace bsde;

int g_failures = 0;

void report(const std::string& id, bool pass, const std::string& what, const std::string& detail) {
  if (!pass) ++g_failures;
  std::printf("%s %-3s %s: %s\n", pass ? "PASS" : "FAIL", id.c_str(), what.c_str(),
              detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

ExperimentConfig linear_config(const std::string& terminal, std::vector<double> eps,
                               std::size_t m) {
  ExperimentConfig c;
  c.terminal = terminal;
  c.epsilon_list = std::move(eps);
  c.n_replications = m;
  return c;
}

LinearModelSpec linear_spec(TerminalFunction phi) {
  LinearModelSpec s;
  s.beta = 0.1;
  s.gamma = 0.2;
  s.terminal = std::move(phi);
  return s;
}

void criteria_1_2_3_6_9() {
  const auto start = std::chrono::steady_clock::now();
  const ExperimentReport rep = run_monte_carlo(linear_config("identity", {0.02}, 5000));
  const double wall = seconds_since(start);
  const ReportRow& row = rep.rows.at(0);
  const EpsilonSummary& sum = rep.summaries.at(0);

  report("1", std::abs(row.ratio_y - 1.0) <= 0.10 && wall <= 300.0,
         "efficiency attainment, identity terminal, eps=0.02, M=5000",
         fmt("riskY=%.5f boundY=%.5f ratio=%.4f (se %.4f), %.1f s", row.risk_y, row.bound_y,
             row.ratio_y, row.risk_y_se / row.bound_y, wall));

  // With Phi(x) = x the slope u_x does not depend on theta, so both the
  // bound and the risk vanish; the curved terminal below exercises Z.
  report("2", row.bound_z == 0.0 && std::abs(row.risk_z) <= 1e-6,
         "Z risk, identity terminal (degenerate: bound is 0)",
         fmt("riskZ=%.3g boundZ=%.3g", row.risk_z, row.bound_z));

  const ExperimentReport sq = run_monte_carlo(linear_config("square", {0.02}, 5000));
  const ReportRow& rs = sq.rows.at(0);
  report("2b", std::abs(rs.ratio_z - 1.0) <= 0.15,
         "Z efficiency, square terminal, eps=0.02, M=5000",
         fmt("riskZ=%.5f boundZ=%.5f (2e^0.1=%.5f) ratio=%.4f", rs.risk_z, rs.bound_z,
             2.0 * std::exp(0.1), rs.ratio_z));

  report("3", std::abs(row.var_ratio_theta - 1.0) <= 0.05 && row.ks_p > 0.01,
         "one-step estimator law at t=0.5",
         fmt("Var/I^-1=%.4f (I^-1=%.4f), KS D=%.4f p=%.3f", row.var_ratio_theta,
             row.fisher_inverse, row.ks_statistic, row.ks_p));

  report("6", sum.terminal_max_error <= 1e-12 && sum.n_ok == 5000,
         "terminal identity on every replication",
         fmt("max |Y^_T - Phi(X_T)| = %.3g over %zu replications", sum.terminal_max_error,
             sum.n_ok));

  const ModelSpec model = build_model(rep.config);
  const double d2 = mde_asymptotic_variance(model, 1.0, rep.config.delta);
  const double d2_closed = 6.0 / (5.0 * rep.config.delta);
  const double info_inv = 1.0 / fisher_information(model, 1.0,
                                                   solve_limit_ode(model, 1.0, TimeGrid(0.0, 0.1, 100)),
                                                   rep.config.delta);
  const bool var_ok = std::abs(sum.pilot_variance / d2_closed - 1.0) <= 0.10;
  const bool formula_ok = std::abs(d2 / d2_closed - 1.0) <= 1e-3 && d2 >= info_inv;
  report("9", row.risk_plugin > row.risk_y && row.plugin_p_value < 0.01 && var_ok && formula_ok,
         "plug-in inferiority and pilot variance, eps=0.02",
         fmt("plug-in risk=%.4f vs %.4f, paired p=%.3g; pilot Var=%.3f vs 6/(5 delta)=%.3f; "
             "D^2=%.4f >= I^-1=%.4f",
             row.risk_plugin, row.risk_y, row.plugin_p_value, sum.pilot_variance, d2_closed, d2,
             info_inv));
}

void criterion_4() {
  const ModelSpec model = constant_drift_model(1.0, {0.0, 2.0}, 0.0, 1.0);
  const TimeGrid grid(0.0, 1.0, 1000);
  const double t = 0.5;
  const std::vector<double> pilots{0.0, 0.13, 0.5, 1.0, 1.37, 1.9, 2.0};
  double worst = 0.0;
  std::size_t checks = 0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const ForwardPaths p = simulate_forward(model, 1.0, 0.1, grid, NoiseSource{77, i});
    const double expected = std::clamp((p.X.at_time(t) - 0.0) / t, 0.0, 2.0);
    for (double pilot : pilots) {
      const OneStepResult r = one_step_mle(model, pilot, p.X, 0.1, t, 0.1);
      worst = std::max(worst, std::abs(r.theta - expected));
      ++checks;
    }
  }
  report("4", worst <= 1e-10, "one-step estimate equals (X_t - x0)/t for any pilot",
         fmt("max deviation %.3g over %zu (path, pilot) pairs", worst, checks));
}

void criterion_5() {
  const auto start = std::chrono::steady_clock::now();
  const double eps = 0.1;

  const LinearModelSpec id = linear_spec(terminal_identity());
  const PdeProblem pid = linear_pde_problem(id);
  const PdeSolution sid = solve_semilinear_pde(pid, 1.0, eps, default_pde_grid(pid.model, 400, 200));

  const LinearModelSpec sn = linear_spec(terminal_sine());
  const PdeSolution ssn =
      solve_semilinear_pde(linear_pde_problem(sn), 0.5, eps, PdeGrid{-1.5, 2.4, 400, 400, 1.0});

  auto inner = [](const PdeSolution& sol, const LinearModelSpec& spec) {
    const PdeGrid& g = sol.grid;
    const double quarter = 0.25 * (g.x_max - g.x_min);
    double worst = 0.0;
    for (std::size_t i = 0; i < g.n_x; ++i) {
      const double x = g.x_node(i);
      if (x < g.x_min + quarter || x > g.x_max - quarter) continue;
      worst = std::max(worst, std::abs(sol.at(0, i) - linear_u(spec, sol.epsilon, 0.0, x, sol.theta)));
    }
    return worst;
  };
  const double err_id = inner(sid, id);
  const double err_sn = inner(ssn, sn);

  LinearModelSpec heat = linear_spec(terminal_sine());
  heat.beta = 0.0;
  heat.gamma = 0.0;
  const PdeSolution sh = solve_semilinear_pde(
      linear_pde_problem(heat), 0.0, eps, PdeGrid{-std::numbers::pi, std::numbers::pi, 400, 200, 1.0});
  double err_heat = 0.0;
  for (std::size_t i = sh.grid.n_x / 4; i < 3 * sh.grid.n_x / 4; ++i) {
    const double x = sh.grid.x_node(i);
    err_heat = std::max(err_heat, std::abs(sh.at(0, i) - std::sin(x) * std::exp(-0.5 * eps * eps)));
  }
  const double wall = seconds_since(start);
  report("5", err_id <= 1e-3 && err_sn <= 1e-3 && err_heat <= 1e-4 && wall <= 30.0,
         "PDE cross-validation, eps=0.1, 400 nodes",
         fmt("identity %.2g, sine %.2g (inner half), heat oracle %.2g, %.1f s", err_id, err_sn,
             err_heat, wall));
}

void criterion_7() {
  const std::vector<double> eps{0.1, 0.05, 0.02};
  const TimeGrid grid(0.0, 1.0, 1000);
  auto spread = [&](const ModelSpec& model, double& lo, double& hi) {
    const auto rows = path_concentration(model, 1.0, eps, grid, 1000, 20240601);
    lo = hi = rows.front().sup_sq;
    for (const auto& r : rows) {
      lo = std::min(lo, r.sup_sq);
      hi = std::max(hi, r.sup_sq);
    }
    return (hi - lo) / lo;
  };
  double lo_c = 0, hi_c = 0, lo_n = 0, hi_n = 0;
  const double var_c = spread(constant_drift_model(1.0, {0.0, 2.0}, 0.0, 1.0), lo_c, hi_c);
  const double var_n = spread(nonlinear_model({}, {0.0, 2.0}, 0.0, 1.0), lo_n, hi_n);
  report("7", var_c <= 0.25 && var_n <= 0.25, "path concentration E sup|X-x|^2/eps^2, M=1000",
         fmt("constant drift %.4f..%.4f (spread %.1f%%), nonlinear %.4f..%.4f (spread %.1f%%)",
             lo_c, hi_c, 100.0 * var_c, lo_n, hi_n, 100.0 * var_n));
}

void criterion_8() {
  // rY vanishes identically for Phi(x) = x; the square terminal has a
  // non-trivial residual of order eps.
  const ExperimentReport rep = run_monte_carlo(linear_config("square", {0.1, 0.05}, 2000));
  const double a = rep.rows.at(0).mean_abs_r_y;
  const double b = rep.rows.at(1).mean_abs_r_y;
  report("8", b <= 0.7 * a, "residual decay E|rY_0.5|, square terminal, M=2000 paired",
         fmt("eps=0.1: %.5f, eps=0.05: %.5f, ratio %.3f", a, b, b / a));
}

void criterion_10() {
  ExperimentConfig c = linear_config("identity", {0.1, 0.05, 0.02}, 500);
  // A wide parameter box keeps early-window clamping from capping the sup.
  c.model.theta_interval = {-4.0, 6.0};
  c.n_steps = 4000;
  const DeltaStudyReport rep = delta_shrink_study(c, {"eps2log", "power:3"});
  std::string p95, proxy;
  for (const auto& r : rep.rows) {
    if (r.schedule == "eps2log") p95 += fmt(" %.3f", r.sup_err_p95);
    if (r.schedule == "power:3") proxy += fmt(" %.2f", r.pilot_proxy);
  }
  bool eps2log_ok = false, cube_flagged = false;
  for (const auto& v : rep.verdicts) {
    if (v.schedule == "eps2log") eps2log_ok = v.sup_decreasing && !v.proxy_flagged;
    if (v.schedule == "power:3") cube_flagged = v.proxy_flagged;
  }
  report("10", eps2log_ok && cube_flagged, "delta-shrink study",
         fmt("eps^2 ln(1/eps): p95 sup|Y^-Y| =%s; eps^3: proxy =%s %s", p95.c_str(),
             proxy.c_str(), cube_flagged ? "(flagged)" : "(not flagged)"));
}

template <class F>
void guarded(const std::string& id, F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    report(id, false, "raised an exception", e.what());
  }
}

}  // namespace

int main() {
  guarded("1-3,6,9", criteria_1_2_3_6_9);
  guarded("4", criterion_4);
  guarded("5", criterion_5);
  guarded("7", criterion_7);
  guarded("8", criterion_8);
  guarded("10", criterion_10);
  std::printf("%s: %d failing criteria\n", g_failures == 0 ? "ALL PASS" : "FAILURES", g_failures);
  return g_failures == 0 ? 0 : 1;
}
