#pragma once

#include <string>
#include <vector>

#include "bsde/experiment.hpp"

namespace bsde::cli {

// Experiment configuration plus the settings only single-run subcommands read.
struct RunConfig {
  ExperimentConfig experiment;
  std::uint64_t stream = 0;                  // replication index for single runs
  std::vector<std::string> delta_schedules{"eps2log", "power:3"};
  std::size_t csv_x_stride = 4;              // pde-solve output thinning
  std::size_t csv_t_stride = 10;
};

// Quick mode: M = 200, eps = {0.1}. Full mode: M = 5000, eps = {0.1, 0.05, 0.02}.
RunConfig default_run_config(bool full);

// Applies a JSON document or a key = value text file. Keys are dotted paths
// ("model.sigma", "pde.n_x"); unknown keys throw ErrorKind::Configuration
// naming the key.
void apply_config_text(RunConfig& config, const std::string& text);
// One "key=value" override; the value is read as JSON when it parses,
// otherwise as a string.
void apply_override(RunConfig& config, const std::string& assignment);

// Every key with its effective value, as pretty-printed JSON.
std::string to_json(const RunConfig& config);

}  // namespace bsde::cli
