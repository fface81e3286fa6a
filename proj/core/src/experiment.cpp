#include "bsde/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <ostream>
#include <thread>

#include "bsde/bsde_approx.hpp"
#include "bsde/errors.hpp"
#include "bsde/estimation.hpp"
#include "bsde/random.hpp"
#include "bsde/stats.hpp"

namespace bsde {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::size_t resolve_workers(std::size_t requested) {
  if (requested > 0) return requested;
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

// Runs body(i) for i in [0, n) on a pool; body must not throw.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& body) {
  workers = std::min(resolve_workers(workers), std::max<std::size_t>(n, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) body(i);
    });
  }
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void require(bool ok, const std::string& field, const std::string& why) {
  if (!ok) throw Error(ErrorKind::Configuration, field + ": " + why);
}

double safe_ratio(double num, double den) {
  return den > 0.0 ? num / den : kNaN;
}

}  // namespace

std::string to_string(Backend backend) {
  return backend == Backend::ClosedForm ? "closed-form" : "pde";
}

Backend backend_from_string(const std::string& name) {
  if (name == "closed-form") return Backend::ClosedForm;
  if (name == "pde") return Backend::Pde;
  throw Error(ErrorKind::Configuration, "backend: unknown value '" + name + "'");
}

TimeGrid ExperimentConfig::grid() const { return TimeGrid(0.0, model.horizon, n_steps); }

void ExperimentConfig::validate() const {
  require(model.name == "linear-constant-drift" || model.name == "linear-ou" ||
              model.name == "custom-pde",
          "model", "unknown model '" + model.name + "'");
  require(model.sigma > 0.0, "sigma", "must be positive");
  require(model.horizon > 0.0, "horizon", "must be positive");
  require(model.theta_interval.hi > model.theta_interval.lo, "theta_interval", "needs lo < hi");
  require(model.theta_interval.contains_closed(theta0), "theta0", "must lie in the closed Theta");
  require(n_steps >= 2, "n_steps", "must be at least 2");
  require(!epsilon_list.empty(), "epsilon_list", "must not be empty");
  for (std::size_t i = 0; i < epsilon_list.size(); ++i) {
    require(epsilon_list[i] > 0.0, "epsilon_list", "entries must be positive");
    if (i > 0) {
      require(epsilon_list[i] < epsilon_list[i - 1], "epsilon_list", "must be strictly decreasing");
    }
  }
  require(n_replications >= 100, "n_replications", "must be at least 100");
  require(max_failure_fraction >= 0.0 && max_failure_fraction < 1.0, "max_failure_fraction",
          "must lie in [0, 1)");
  require(backend == Backend::Pde || model.name == "linear-constant-drift", "backend",
          "closed-form backend needs the linear-constant-drift model");
  require(pde_n_x >= 4 && pde_n_t >= 1 && pde_n_theta >= 3, "pde", "grid too small");
  terminal_by_name(terminal);

  const TimeGrid g = grid();
  require(delta > 0.0 && delta < model.horizon, "delta", "must lie in (0, T)");
  EstimationWindow{delta, t_report}.validate(g);
}

ModelSpec build_model(const ExperimentConfig& config) {
  const ModelChoice& m = config.model;
  if (m.name == "linear-constant-drift") {
    return constant_drift_model(m.sigma, m.theta_interval, m.x0, m.horizon);
  }
  if (m.name == "linear-ou") return ou_model(m.sigma, m.theta_interval, m.x0, m.horizon);
  if (m.name == "custom-pde") {
    return nonlinear_model(m.nonlinear, m.theta_interval, m.x0, m.horizon);
  }
  throw Error(ErrorKind::Configuration, "model: unknown model '" + m.name + "'");
}

PdeProblem build_pde_problem(const ExperimentConfig& config) {
  return {build_model(config), linear_driver(config.beta, config.gamma),
          terminal_by_name(config.terminal)};
}

std::unique_ptr<ValueFunction> build_value_function(const ExperimentConfig& config,
                                                    double epsilon) {
  if (config.backend == Backend::ClosedForm) {
    if (config.model.name != "linear-constant-drift") {
      throw Error(ErrorKind::Configuration,
                  "backend: closed-form backend needs the linear-constant-drift model");
    }
    LinearModelSpec spec;
    spec.sigma = config.model.sigma;
    spec.beta = config.beta;
    spec.gamma = config.gamma;
    spec.terminal = terminal_by_name(config.terminal);
    spec.theta_interval = config.model.theta_interval;
    spec.x0 = config.model.x0;
    spec.horizon = config.model.horizon;
    return std::make_unique<LinearValueFunction>(spec, epsilon);
  }
  const PdeProblem problem = build_pde_problem(config);
  const PdeGrid grid = default_pde_grid(problem.model, config.pde_n_x, config.pde_n_t);
  return std::make_unique<PdeValueFunction>(
      make_pde_value_function(problem, grid, epsilon, config.pde_n_theta));
}

namespace {

ReplicationRecord run_replication(const ExperimentConfig& config, const ModelSpec& model,
                                  const ValueFunction& vf, const TimeGrid& grid,
                                  const Path& limit_path, double epsilon, std::size_t index,
                                  const ApproximationOptions& options) {
  ReplicationRecord rec;
  const std::size_t nt = config.t_report.size();
  try {
    const NoiseSource noise{config.base_seed, index};
    const ForwardPaths paths = simulate_forward(model, config.theta0, epsilon, grid, noise);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      rec.sup_path_dev = std::max(rec.sup_path_dev, std::abs(paths.X[k] - limit_path[k]));
    }
    const EstimationWindow window{config.delta, config.t_report};
    const BsdeApproximation approx = approximate_bsde(model, vf, paths.X, paths.W, window,
                                                      epsilon, config.theta0, options);
    rec.theta_pilot = approx.trace.theta_pilot;
    rec.n_clamped = approx.n_clamped;
    if (!approx.failed_nodes.empty()) {
      throw Error(ErrorKind::Evaluation, "one-step estimate failed on some nodes",
                  approx.failed_nodes.front());
    }
    const ResidualPaths resid =
        residual_decomposition(approx, vf, model, config.theta0, epsilon);

    const TimeGrid& sub = approx.Y_hat.grid();
    for (std::size_t j = 0; j < sub.size(); ++j) {
      rec.sup_err_y = std::max(rec.sup_err_y, std::abs(approx.Y_hat[j] - (*approx.Y_true)[j]));
    }
    rec.terminal_error = std::abs(approx.Y_hat[sub.size() - 1] - vf.terminal(paths.X.back()));

    for (std::size_t r = 0; r < nt; ++r) {
      const std::size_t j = sub.require_node(config.t_report[r], "t_report");
      const double t = sub.node(j);
      const double y = (*approx.Y_true)[j];
      rec.err_y.push_back((approx.Y_hat[j] - y) / epsilon);
      rec.err_z.push_back((approx.Z_hat[j] - (*approx.Z_true)[j]) / (epsilon * epsilon));
      rec.err_theta.push_back((approx.trace.rows[j].theta_onestep - config.theta0) / epsilon);
      rec.err_plugin.push_back((vf.u(t, approx.X[j], rec.theta_pilot) - y) / epsilon);
      rec.r_y.push_back(resid.rY[j]);
      rec.clamped.push_back(approx.trace.rows[j].clamped ? 1 : 0);
    }
  } catch (const Error& e) {
    rec.status = e.kind() == ErrorKind::SimulationDiverged ? ReplicationStatus::Diverged
                                                           : ReplicationStatus::Failed;
    rec.error = e.what();
  }
  return rec;
}

}  // namespace

ExperimentReport run_monte_carlo(const ExperimentConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const ModelSpec model = build_model(config);
  const TimeGrid grid = config.grid();
  const Path limit_path = solve_limit_ode(model, config.theta0, grid);
  const std::size_t m = config.n_replications;
  const std::size_t nt = config.t_report.size();

  ExperimentReport report;
  report.config = config;
  for (double eps : config.epsilon_list) {
    const auto eps_start = std::chrono::steady_clock::now();
    const std::unique_ptr<ValueFunction> vf = build_value_function(config, eps);
    const ApproximationOptions options;

    std::vector<ReplicationRecord> records(m);
    parallel_for(m, config.workers, [&](std::size_t i) {
      records[i] = run_replication(config, model, *vf, grid, limit_path, eps, i, options);
    });

    EpsilonSummary summary;
    summary.epsilon = eps;
    std::vector<const ReplicationRecord*> ok;
    for (const auto& rec : records) {
      if (rec.status == ReplicationStatus::Ok) {
        ok.push_back(&rec);
      } else if (rec.status == ReplicationStatus::Diverged) {
        ++summary.n_diverged;
      } else {
        ++summary.n_failed;
      }
    }
    summary.n_ok = ok.size();
    const double failed = static_cast<double>(summary.n_diverged + summary.n_failed);
    if (failed > config.max_failure_fraction * static_cast<double>(m)) {
      std::string first;
      for (const auto& rec : records) {
        if (rec.status != ReplicationStatus::Ok) {
          first = rec.error;
          break;
        }
      }
      throw Error(ErrorKind::Divergence,
                  "failure fraction above cap at eps=" + std::to_string(eps) + "; first: " + first);
    }

    std::vector<double> sup_err, pilot;
    for (const auto* rec : ok) {
      const double dev = rec->sup_path_dev / eps;
      summary.path_sup_abs += dev;
      summary.path_sup_sq += dev * dev;
      sup_err.push_back(rec->sup_err_y);
      summary.terminal_max_error = std::max(summary.terminal_max_error, rec->terminal_error);
      pilot.push_back((rec->theta_pilot - config.theta0) / eps);
    }
    if (!ok.empty()) {
      summary.path_sup_abs /= static_cast<double>(ok.size());
      summary.path_sup_sq /= static_cast<double>(ok.size());
      summary.sup_err_y_p95 = quantile(sup_err, 0.95);
      summary.pilot_variance = ok.size() >= 2 ? variance(pilot) : kNaN;
    }

    for (std::size_t r = 0; r < nt; ++r) {
      const double t = config.t_report[r];
      ReportRow row;
      row.epsilon = eps;
      row.t = t;
      row.n_ok = summary.n_ok;
      row.n_failed = summary.n_failed;
      row.n_diverged = summary.n_diverged;
      const EfficiencyBounds bounds = efficiency_bounds(model, *vf, config.theta0, t);
      row.bound_y = bounds.bound_y;
      row.bound_z = bounds.bound_z;
      row.fisher_inverse = 1.0 / bounds.fisher;

      std::vector<double> sq_y, sq_z, sq_plugin, theta, ry, abs_ry;
      for (const auto* rec : ok) {
        sq_y.push_back(rec->err_y[r] * rec->err_y[r]);
        sq_z.push_back(rec->err_z[r] * rec->err_z[r]);
        sq_plugin.push_back(rec->err_plugin[r] * rec->err_plugin[r]);
        theta.push_back(rec->err_theta[r]);
        ry.push_back(rec->r_y[r]);
        abs_ry.push_back(std::abs(rec->r_y[r]));
        row.n_clamped += static_cast<std::size_t>(rec->clamped[r]);
      }
      if (ok.size() >= 2) {
        row.risk_y = mean(sq_y);
        row.risk_y_se = standard_error(sq_y);
        row.risk_z = mean(sq_z);
        row.risk_plugin = mean(sq_plugin);
        row.mean_r_y = mean(ry);
        row.se_r_y = standard_error(ry);
        row.mean_abs_r_y = mean(abs_ry);
        try {
          row.plugin_p_value = paired_z_test(sq_plugin, sq_y).p_value;
        } catch (const Error&) {
          row.plugin_p_value = kNaN;
        }
      }
      row.ratio_y = safe_ratio(row.risk_y, row.bound_y);
      row.ratio_z = safe_ratio(row.risk_z, row.bound_z);
      try {
        const NormalityDiagnostics nd = normality_diagnostics(theta, row.fisher_inverse);
        row.var_ratio_theta = nd.variance_ratio;
        row.ks_statistic = nd.ks_statistic;
        row.ks_p = nd.p_value;
      } catch (const Error&) {
        row.var_ratio_theta = kNaN;
        row.ks_statistic = kNaN;
        row.ks_p = kNaN;
      }
      report.rows.push_back(row);
    }
    summary.wall_seconds = seconds_since(eps_start);
    report.summaries.push_back(summary);
    report.records.push_back(std::move(records));
  }
  report.wall_seconds = seconds_since(start);
  return report;
}

void write_report_csv(std::ostream& out, const ExperimentReport& report) {
  out << "epsilon,t,riskY,boundY,ratioY,riskZ,boundZ,ratioZ,var_ratio_theta,ks_p,n_clamped,"
         "n_diverged\n"
      << std::setprecision(12);
  for (const auto& r : report.rows) {
    out << r.epsilon << ',' << r.t << ',' << r.risk_y << ',' << r.bound_y << ',' << r.ratio_y
        << ',' << r.risk_z << ',' << r.bound_z << ',' << r.ratio_z << ',' << r.var_ratio_theta
        << ',' << r.ks_p << ',' << r.n_clamped << ',' << r.n_diverged << '\n';
  }
}

void write_summary(std::ostream& out, const ExperimentReport& report) {
  const ExperimentConfig& c = report.config;
  out << "model " << c.model.name << ", backend " << to_string(c.backend) << ", terminal "
      << c.terminal << "\n"
      << "theta0 " << c.theta0 << ", delta " << c.delta << ", replications " << c.n_replications
      << ", seed " << c.base_seed << "\n\n"
      << std::setprecision(6);
  for (const auto& s : report.summaries) {
    out << "eps " << s.epsilon << ": ok " << s.n_ok << ", diverged " << s.n_diverged
        << ", failed " << s.n_failed << ", wall " << s.wall_seconds << " s\n"
        << "  E sup|X-x|/eps " << s.path_sup_abs << ", E sup|X-x|^2/eps^2 " << s.path_sup_sq
        << "\n"
        << "  p95 sup|Yhat-Y| " << s.sup_err_y_p95 << ", max terminal error "
        << s.terminal_max_error << ", pilot variance " << s.pilot_variance << "\n";
    for (const auto& r : report.rows) {
      if (r.epsilon != s.epsilon) continue;
      out << "  t " << r.t << ": riskY " << r.risk_y << " (se " << r.risk_y_se << ") / bound "
          << r.bound_y << " = " << r.ratio_y << "; riskZ " << r.risk_z << " / bound "
          << r.bound_z << " = " << r.ratio_z << "\n"
          << "    var ratio theta " << r.var_ratio_theta << ", KS p " << r.ks_p
          << ", plug-in risk " << r.risk_plugin << " (paired p " << r.plugin_p_value << ")"
          << ", clamped " << r.n_clamped << "\n";
      if (!std::isfinite(r.ratio_y) || !std::isfinite(r.ratio_z)) {
        out << "    note: zero bound, ratio not defined\n";
      }
    }
  }
  out << "\ntotal wall " << report.wall_seconds << " s\n";
}

std::vector<ConcentrationRow> path_concentration(const ModelSpec& model, double theta0,
                                                 const std::vector<double>& epsilons,
                                                 const TimeGrid& grid, std::size_t n_replications,
                                                 std::uint64_t seed, std::size_t workers) {
  const Path limit = solve_limit_ode(model, theta0, grid);
  std::vector<ConcentrationRow> out;
  for (double eps : epsilons) {
    std::vector<double> dev(n_replications, kNaN);
    parallel_for(n_replications, workers, [&](std::size_t i) {
      try {
        const ForwardPaths p = simulate_forward(model, theta0, eps, grid, NoiseSource{seed, i});
        double sup = 0.0;
        for (std::size_t k = 0; k < grid.size(); ++k) {
          sup = std::max(sup, std::abs(p.X[k] - limit[k]));
        }
        dev[i] = sup / eps;
      } catch (const Error&) {
      }
    });
    ConcentrationRow row;
    row.epsilon = eps;
    for (double d : dev) {
      if (!std::isfinite(d)) continue;
      ++row.n_ok;
      row.sup_abs += d;
      row.sup_sq += d * d;
    }
    if (row.n_ok > 0) {
      row.sup_abs /= static_cast<double>(row.n_ok);
      row.sup_sq /= static_cast<double>(row.n_ok);
    }
    out.push_back(row);
  }
  return out;
}

double DeltaSchedule::delta(double epsilon, double fixed_delta) const {
  switch (kind) {
    case Kind::Fixed:
      return fixed_delta;
    case Kind::Eps2Log:
      return epsilon * epsilon * std::log(1.0 / epsilon);
    case Kind::Power:
      return std::pow(epsilon, power);
  }
  return fixed_delta;
}

DeltaSchedule parse_delta_schedule(const std::string& name) {
  if (name == "fixed") return {name, 0.0, DeltaSchedule::Kind::Fixed};
  if (name == "eps2log") return {name, 0.0, DeltaSchedule::Kind::Eps2Log};
  if (name.rfind("power:", 0) == 0) {
    try {
      std::size_t used = 0;
      const double k = std::stod(name.substr(6), &used);
      if (used == name.size() - 6 && k > 0.0) return {name, k, DeltaSchedule::Kind::Power};
    } catch (const std::exception&) {
    }
  }
  throw Error(ErrorKind::Configuration, "schedule: unknown delta schedule '" + name + "'");
}

DeltaStudyReport delta_shrink_study(const ExperimentConfig& config,
                                    const std::vector<std::string>& schedules) {
  config.validate();
  const ModelSpec model = build_model(config);
  if (model.name != "linear-constant-drift" && model.name != "linear-ou") {
    throw Error(ErrorKind::Configuration, "model: delta study needs a linear model");
  }
  if (std::abs(model.drift_dtheta(config.theta0, 0.0, model.x0)) < 1e-8) {
    throw Error(ErrorKind::Configuration,
                "model: drift sensitivity vanishes at the start, the pilot is not identifiable");
  }
  const TimeGrid grid = config.grid();
  ApproximationOptions options;
  options.include_z = false;

  DeltaStudyReport report;
  for (const std::string& name : schedules) {
    const DeltaSchedule schedule = parse_delta_schedule(name);
    const std::size_t first_row = report.rows.size();
    for (double eps : config.epsilon_list) {
      DeltaStudyRow row;
      row.schedule = name;
      row.epsilon = eps;
      row.delta_requested = schedule.delta(eps, config.delta);
      row.pilot_proxy = eps / std::sqrt(row.delta_requested);
      row.delta_steps = grid.nearest_node(row.delta_requested);
      row.delta_used = grid.node(row.delta_steps);
      if (row.delta_steps < 2 || row.delta_steps >= grid.n_steps()) {
        row.skipped = true;
        report.rows.push_back(row);
        continue;
      }
      const std::unique_ptr<ValueFunction> vf = build_value_function(config, eps);
      std::vector<double> sup(config.n_replications, kNaN), pilot(config.n_replications, kNaN);
      parallel_for(config.n_replications, config.workers, [&](std::size_t i) {
        try {
          const ForwardPaths p =
              simulate_forward(model, config.theta0, eps, grid, NoiseSource{config.base_seed, i});
          const BsdeApproximation a = approximate_bsde(model, *vf, p.X, p.W,
                                                       EstimationWindow{row.delta_used, {}}, eps,
                                                       config.theta0, options);
          if (!a.failed_nodes.empty()) return;
          double s = 0.0;
          for (std::size_t j = 0; j < a.Y_hat.size(); ++j) {
            s = std::max(s, std::abs(a.Y_hat[j] - (*a.Y_true)[j]));
          }
          sup[i] = s;
          pilot[i] = a.trace.theta_pilot - config.theta0;
        } catch (const Error&) {
        }
      });
      std::vector<double> sup_ok, pilot_ok;
      for (std::size_t i = 0; i < sup.size(); ++i) {
        if (std::isfinite(sup[i])) {
          sup_ok.push_back(sup[i]);
          pilot_ok.push_back(pilot[i]);
        }
      }
      row.n_ok = sup_ok.size();
      row.n_failed = config.n_replications - row.n_ok;
      if (row.n_ok >= 2) {
        row.sup_err_p95 = quantile(sup_ok, 0.95);
        row.pilot_error_sd = std::sqrt(variance(pilot_ok));
      }
      report.rows.push_back(row);
    }

    DeltaStudyVerdict verdict;
    verdict.schedule = name;
    std::vector<double> p95;
    for (std::size_t i = first_row; i < report.rows.size(); ++i) {
      if (!report.rows[i].skipped && report.rows[i].n_ok >= 2) {
        p95.push_back(report.rows[i].sup_err_p95);
      }
    }
    verdict.sup_decreasing = p95.size() >= 2;
    for (std::size_t i = 1; i < p95.size(); ++i) {
      if (!(p95[i] < p95[i - 1])) verdict.sup_decreasing = false;
    }
    const double proxy_first = report.rows[first_row].pilot_proxy;
    const double proxy_last = report.rows.back().pilot_proxy;
    verdict.proxy_flagged = !(proxy_last < proxy_first * (1.0 - 1e-12));
    report.verdicts.push_back(verdict);
  }
  return report;
}

void write_delta_study_csv(std::ostream& out, const DeltaStudyReport& report) {
  out << "schedule,epsilon,delta_requested,delta_used,delta_steps,skipped,pilot_proxy,"
         "pilot_error_sd,sup_err_p95,n_ok,n_failed\n"
      << std::setprecision(12);
  for (const auto& r : report.rows) {
    out << r.schedule << ',' << r.epsilon << ',' << r.delta_requested << ',' << r.delta_used
        << ',' << r.delta_steps << ',' << (r.skipped ? 1 : 0) << ',' << r.pilot_proxy << ','
        << r.pilot_error_sd << ',' << r.sup_err_p95 << ',' << r.n_ok << ',' << r.n_failed
        << '\n';
  }
}

}  // namespace bsde
