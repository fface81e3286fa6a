#include "bsde_cli/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "bsde/bsde_approx.hpp"
#include "bsde/errors.hpp"
#include "bsde/estimation.hpp"
#include "bsde/experiment.hpp"
#include "bsde/pde.hpp"
#include "bsde/random.hpp"
#include "bsde_cli/config_io.hpp"

namespace bsde::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string subcommand;
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::size_t workers = 0;
  std::string output_dir = "out";
  bool full = false;
};

std::ofstream open_output(const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  return f;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::Configuration, "config: cannot read '" + path + "'");
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

void write_path_csv(const fs::path& file, const Path& path) {
  auto f = open_output(file);
  f << "t,value\n" << std::setprecision(17);
  for (std::size_t k = 0; k < path.size(); ++k) f << path.grid().node(k) << ',' << path[k] << '\n';
}

ForwardPaths simulate_single(const RunConfig& rc, const ModelSpec& model) {
  const ExperimentConfig& c = rc.experiment;
  return simulate_forward(model, c.theta0, c.epsilon_list.front(), c.grid(),
                          NoiseSource{c.base_seed, rc.stream});
}

void cmd_simulate(const RunConfig& rc, const ModelSpec& model, const fs::path& dir,
                  std::ostream& out) {
  const ForwardPaths p = simulate_single(rc, model);
  write_path_csv(dir / "X.csv", p.X);
  write_path_csv(dir / "W.csv", p.W);
  out << "simulate: wrote X.csv and W.csv (" << p.X.size() << " nodes)\n";
}

void cmd_estimate(const RunConfig& rc, const ModelSpec& model, const fs::path& dir,
                  std::ostream& out) {
  const ExperimentConfig& c = rc.experiment;
  const double eps = c.epsilon_list.front();
  const ForwardPaths p = simulate_single(rc, model);
  const double pilot = mde_estimate(p.X, model, c.delta);
  const OneStepEstimator est(model, pilot, p.X, c.delta, eps);
  const EstimateTrace trace = make_trace(est, c.t_report);
  auto f = open_output(dir / "trace.csv");
  write_trace_csv(f, trace);
  out << std::setprecision(10) << "estimate: pilot " << pilot << ", delta head "
      << trace.delta_head << "\n";
  for (const auto& row : trace.rows) {
    out << "  t " << row.t << ": one-step " << row.theta_onestep
        << (row.clamped ? " (clamped)" : "") << ", full MLE "
        << full_mle(model, p.X, row.t, eps) << "\n";
  }
}

void cmd_approximate(const RunConfig& rc, const ModelSpec& model, const fs::path& dir,
                     std::ostream& out) {
  const ExperimentConfig& c = rc.experiment;
  const double eps = c.epsilon_list.front();
  const ForwardPaths p = simulate_single(rc, model);
  const auto vf = build_value_function(c, eps);
  const BsdeApproximation a =
      approximate_bsde(model, *vf, p.X, p.W, EstimationWindow{c.delta, c.t_report}, eps, c.theta0);
  auto f = open_output(dir / "approximation.csv");
  write_approximation_csv(f, a);
  out << "approximate: " << a.Y_hat.size() << " nodes, " << a.n_clamped << " clamped, "
      << a.failed_nodes.size() << " failed\n";
}

void cmd_pde_solve(const RunConfig& rc, const fs::path& dir, std::ostream& out) {
  const ExperimentConfig& c = rc.experiment;
  const PdeProblem problem = build_pde_problem(c);
  const PdeGrid grid = default_pde_grid(problem.model, c.pde_n_x, c.pde_n_t);
  const PdeSolution sol = solve_semilinear_pde(problem, c.theta0, c.epsilon_list.front(), grid);
  auto f = open_output(dir / "pde.csv");
  write_solution_csv(f, sol, rc.csv_x_stride, rc.csv_t_stride);
  out << "pde-solve: " << grid.n_x << " x " << (grid.n_t + 1) << " lattice on [" << grid.x_min
      << ", " << grid.x_max << "], " << sol.substeps << " substeps per row"
      << (sol.upwinded ? ", upwinded" : "") << "\n";
}

void cmd_experiment(const RunConfig& rc, const fs::path& dir, std::ostream& out) {
  const ExperimentReport report = run_monte_carlo(rc.experiment);
  {
    auto f = open_output(dir / "report.csv");
    write_report_csv(f, report);
  }
  std::ostringstream summary;
  write_summary(summary, report);
  auto f = open_output(dir / "summary.txt");
  f << summary.str();
  out << summary.str();
}

void cmd_delta_study(const RunConfig& rc, const fs::path& dir, std::ostream& out) {
  const DeltaStudyReport report = delta_shrink_study(rc.experiment, rc.delta_schedules);
  auto f = open_output(dir / "delta_study.csv");
  write_delta_study_csv(f, report);
  for (const auto& v : report.verdicts) {
    out << "schedule " << v.schedule << ": sup error "
        << (v.sup_decreasing ? "decreasing" : "not decreasing") << ", pilot proxy "
        << (v.proxy_flagged ? "FLAGGED (does not vanish)" : "vanishing") << "\n";
  }
}

int dispatch(const Options& opt, std::ostream& out) {
  RunConfig rc = default_run_config(opt.full);
  if (!opt.config_path.empty()) apply_config_text(rc, read_file(opt.config_path));
  for (const auto& o : opt.overrides) apply_override(rc, o);
  if (opt.seed) rc.experiment.base_seed = *opt.seed;
  rc.experiment.workers = opt.workers;
  rc.experiment.output_dir = opt.output_dir;
  rc.experiment.validate();
  for (const auto& s : rc.delta_schedules) parse_delta_schedule(s);

  const ModelSpec model = build_model(rc.experiment);
  ValidationOptions vopt;
  vopt.x_min = model.x0 - 5.0;
  vopt.x_max = model.x0 + 5.0;
  validate_model(model, vopt);

  const fs::path dir(opt.output_dir);
  fs::create_directories(dir);
  {
    auto f = open_output(dir / "config.effective.json");
    f << to_json(rc);
  }

  if (opt.subcommand == "simulate") cmd_simulate(rc, model, dir, out);
  else if (opt.subcommand == "estimate") cmd_estimate(rc, model, dir, out);
  else if (opt.subcommand == "approximate") cmd_approximate(rc, model, dir, out);
  else if (opt.subcommand == "pde-solve") cmd_pde_solve(rc, dir, out);
  else if (opt.subcommand == "experiment") cmd_experiment(rc, dir, out);
  else if (opt.subcommand == "delta-study") cmd_delta_study(rc, dir, out);
  return kSuccess;
}

bool is_validation(ErrorKind kind) {
  return kind == ErrorKind::Configuration || kind == ErrorKind::InvalidModel ||
         kind == ErrorKind::Domain;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Small-noise BSDE approximation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Options opt;
  app.add_option("--config", opt.config_path, "Config file (JSON or key = value lines)");
  app.add_option("--seed", opt.seed, "Base seed (overrides the config)");
  app.add_option("--workers", opt.workers, "Worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
  app.add_option("--output", opt.output_dir, "Output directory");
  app.add_flag("--full", opt.full, "Acceptance-scale defaults (M = 5000, three eps values)");
  app.add_option("--set", opt.overrides, "Override a config key: key=value (repeatable)");

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"simulate", "Simulate X and W; writes X.csv, W.csv"},
      {"estimate", "Pilot and one-step estimates; writes trace.csv"},
      {"approximate", "Y^ and Z^ along one path; writes approximation.csv"},
      {"pde-solve", "Solve the backward PDE; writes pde.csv"},
      {"experiment", "Monte Carlo risk study; writes report.csv, summary.txt"},
      {"delta-study", "Shrinking pilot window study; writes delta_study.csv"},
  };
  for (const auto& [name, help] : commands) {
    app.add_subcommand(name, help)->callback([&opt, name = name] { opt.subcommand = name; });
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kValidationError;
  }

  try {
    return dispatch(opt, out);
  } catch (const Error& e) {
    err << opt.subcommand << ": " << e.what() << "\n";
    return is_validation(e.kind()) ? kValidationError : kRuntimeFailure;
  } catch (const std::exception& e) {
    err << opt.subcommand << ": " << e.what() << "\n";
    return kRuntimeFailure;
  }
}

}  // namespace bsde::cli
