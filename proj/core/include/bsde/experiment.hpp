#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "bsde/grid.hpp"
#include "bsde/model.hpp"
#include "bsde/pde.hpp"
#include "bsde/value_function.hpp"

namespace bsde {

enum class Backend { ClosedForm, Pde };

std::string to_string(Backend backend);
// "closed-form" or "pde".
Backend backend_from_string(const std::string& name);

// Registered model name plus the parameters each model reads.
struct ModelChoice {
  std::string name = "linear-constant-drift";  // or "linear-ou", "custom-pde"
  double sigma = 1.0;
  double x0 = 0.0;
  double horizon = 1.0;
  Interval theta_interval{0.0, 2.0};
  NonlinearModelParams nonlinear;
};

struct ExperimentConfig {
  ModelChoice model;
  double beta = 0.1;
  double gamma = 0.2;
  std::string terminal = "identity";
  double theta0 = 1.0;
  std::vector<double> epsilon_list{0.1};
  double delta = 0.1;
  std::vector<double> t_report{0.5};
  std::size_t n_steps = 1000;
  std::size_t n_replications = 200;
  std::uint64_t base_seed = 20240601;
  Backend backend = Backend::ClosedForm;
  std::size_t pde_n_x = 400;
  std::size_t pde_n_t = 200;
  std::size_t pde_n_theta = 17;
  std::size_t workers = 0;  // 0 = all hardware threads
  double max_failure_fraction = 0.1;
  std::string output_dir = "out";

  TimeGrid grid() const;
  // Throws ErrorKind::Configuration naming the offending field.
  void validate() const;
};

ModelSpec build_model(const ExperimentConfig& config);
PdeProblem build_pde_problem(const ExperimentConfig& config);
// Closed-form backend for the constant-drift model, PDE backend otherwise.
std::unique_ptr<ValueFunction> build_value_function(const ExperimentConfig& config,
                                                    double epsilon);

enum class ReplicationStatus { Ok, Diverged, Failed };

// Everything one replication contributes; per-t vectors follow t_report.
struct ReplicationRecord {
  ReplicationStatus status = ReplicationStatus::Ok;
  std::string error;
  double theta_pilot = 0.0;
  std::vector<double> err_y;       // (Y^ - Y) / eps
  std::vector<double> err_z;       // (Z^ - Z) / eps^2
  std::vector<double> err_theta;   // (theta~ - theta0) / eps
  std::vector<double> err_plugin;  // (Y_bar - Y) / eps
  std::vector<double> r_y;         // first-order residual rY
  std::vector<char> clamped;
  std::size_t n_clamped = 0;       // clamped nodes over [delta, T]
  double sup_err_y = 0.0;          // sup over [delta, T] of |Y^ - Y|
  double sup_path_dev = 0.0;       // sup over [0, T] of |X - x(theta0)|
  double terminal_error = 0.0;     // |Y^_T - Phi(X_T)|
};

struct ReportRow {
  double epsilon = 0.0;
  double t = 0.0;
  double risk_y = 0.0;
  double bound_y = 0.0;
  double ratio_y = 0.0;
  double risk_z = 0.0;
  double bound_z = 0.0;
  double ratio_z = 0.0;
  double var_ratio_theta = 0.0;
  double ks_p = 0.0;
  std::size_t n_clamped = 0;
  std::size_t n_diverged = 0;
  // Extended statistics.
  std::size_t n_ok = 0;
  std::size_t n_failed = 0;
  double risk_y_se = 0.0;
  double risk_plugin = 0.0;
  double plugin_p_value = 0.0;  // paired test, H1: plug-in risk > one-step risk
  double mean_abs_r_y = 0.0;
  double mean_r_y = 0.0;
  double se_r_y = 0.0;
  double ks_statistic = 0.0;
  double fisher_inverse = 0.0;
};

struct EpsilonSummary {
  double epsilon = 0.0;
  std::size_t n_ok = 0;
  std::size_t n_diverged = 0;
  std::size_t n_failed = 0;
  double path_sup_sq = 0.0;      // E sup |X - x|^2 / eps^2
  double path_sup_abs = 0.0;     // E sup |X - x| / eps
  double sup_err_y_p95 = 0.0;
  double terminal_max_error = 0.0;
  double pilot_variance = 0.0;   // Var((theta* - theta0) / eps)
  double wall_seconds = 0.0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<ReportRow> rows;  // epsilon-major, then t_report order
  std::vector<EpsilonSummary> summaries;
  std::vector<std::vector<ReplicationRecord>> records;  // [epsilon][replication]
  double wall_seconds = 0.0;
};

// Replication i uses NoiseSource{base_seed, i} at every eps, so the eps
// comparison is paired. Throws ErrorKind::Divergence when more than
// max_failure_fraction of the replications at some eps fail.
ExperimentReport run_monte_carlo(const ExperimentConfig& config);

// Columns: epsilon, t, riskY, boundY, ratioY, riskZ, boundZ, ratioZ,
// var_ratio_theta, ks_p, n_clamped, n_diverged.
void write_report_csv(std::ostream& out, const ExperimentReport& report);
void write_summary(std::ostream& out, const ExperimentReport& report);

// E sup_t |X - x(theta0)|^p / eps^p for p = 1, 2, without the value function.
struct ConcentrationRow {
  double epsilon = 0.0;
  double sup_abs = 0.0;
  double sup_sq = 0.0;
  std::size_t n_ok = 0;
};
std::vector<ConcentrationRow> path_concentration(const ModelSpec& model, double theta0,
                                                 const std::vector<double>& epsilons,
                                                 const TimeGrid& grid, std::size_t n_replications,
                                                 std::uint64_t seed, std::size_t workers = 0);

// delta as a function of eps: "fixed", "eps2log" (eps^2 ln(1/eps)) or
// "power:k" (eps^k).
struct DeltaSchedule {
  std::string name;
  double power = 0.0;
  enum class Kind { Fixed, Eps2Log, Power } kind = Kind::Fixed;

  double delta(double epsilon, double fixed_delta) const;
};
DeltaSchedule parse_delta_schedule(const std::string& name);

struct DeltaStudyRow {
  std::string schedule;
  double epsilon = 0.0;
  double delta_requested = 0.0;
  double delta_used = 0.0;  // snapped to the nearest grid node
  std::size_t delta_steps = 0;
  bool skipped = false;     // window shorter than two grid steps
  double pilot_proxy = 0.0; // eps delta^{-1/2}
  double pilot_error_sd = 0.0;
  double sup_err_p95 = 0.0;
  std::size_t n_ok = 0;
  std::size_t n_failed = 0;
};

struct DeltaStudyVerdict {
  std::string schedule;
  bool sup_decreasing = false;  // p95 strictly decreasing over the evaluated eps
  bool proxy_flagged = false;   // eps delta^{-1/2} does not shrink with eps
};

struct DeltaStudyReport {
  std::vector<DeltaStudyRow> rows;
  std::vector<DeltaStudyVerdict> verdicts;
};

DeltaStudyReport delta_shrink_study(const ExperimentConfig& config,
                                    const std::vector<std::string>& schedules);
void write_delta_study_csv(std::ostream& out, const DeltaStudyReport& report);

}  // namespace bsde
