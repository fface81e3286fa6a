#include "bsde_cli/config_io.hpp"

#include <json.hpp>

#include <functional>
#include <map>
#include <sstream>

#include "bsde/errors.hpp"

namespace bsde::cli {

namespace {

using nlohmann::json;

struct Field {
  std::function<void(RunConfig&, const json&)> set;
  std::function<json(const RunConfig&)> get;
};

template <typename T>
T as(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorKind::Configuration, key + ": value " + v.dump() + " has the wrong type");
  }
}

// Accepts a scalar or a list for list-valued keys.
template <typename T>
std::vector<T> as_list(const json& v, const std::string& key) {
  if (v.is_array()) return as<std::vector<T>>(v, key);
  return {as<T>(v, key)};
}

std::uint64_t as_u64(const json& v, const std::string& key) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
  throw Error(ErrorKind::Configuration, key + ": expected a non-negative integer");
}

#define BSDE_FIELD(key, expr, type)                                                     \
  {                                                                                     \
    key, Field {                                                                        \
      [](RunConfig& c, const json& v) { c.expr = as<type>(v, key); },                   \
          [](const RunConfig& c) { return json(c.expr); }                               \
    }                                                                                   \
  }
#define BSDE_SIZE_FIELD(key, expr)                                                      \
  {                                                                                     \
    key, Field {                                                                        \
      [](RunConfig& c, const json& v) { c.expr = static_cast<std::size_t>(as_u64(v, key)); }, \
          [](const RunConfig& c) { return json(c.expr); }                               \
    }                                                                                   \
  }

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = {
      BSDE_FIELD("model.name", experiment.model.name, std::string),
      BSDE_FIELD("model.sigma", experiment.model.sigma, double),
      BSDE_FIELD("model.x0", experiment.model.x0, double),
      BSDE_FIELD("model.horizon", experiment.model.horizon, double),
      BSDE_FIELD("model.theta_lo", experiment.model.theta_interval.lo, double),
      BSDE_FIELD("model.theta_hi", experiment.model.theta_interval.hi, double),
      BSDE_FIELD("model.nonlinear.a", experiment.model.nonlinear.a, double),
      BSDE_FIELD("model.nonlinear.lambda", experiment.model.nonlinear.lambda, double),
      BSDE_FIELD("model.nonlinear.s0", experiment.model.nonlinear.s0, double),
      BSDE_FIELD("model.nonlinear.b", experiment.model.nonlinear.b, double),
      BSDE_FIELD("model.nonlinear.c", experiment.model.nonlinear.c, double),
      BSDE_FIELD("beta", experiment.beta, double),
      BSDE_FIELD("gamma", experiment.gamma, double),
      BSDE_FIELD("terminal", experiment.terminal, std::string),
      BSDE_FIELD("theta0", experiment.theta0, double),
      {"epsilon_list",
       {[](RunConfig& c, const json& v) {
          c.experiment.epsilon_list = as_list<double>(v, "epsilon_list");
        },
        [](const RunConfig& c) { return json(c.experiment.epsilon_list); }}},
      BSDE_FIELD("delta", experiment.delta, double),
      {"t_report",
       {[](RunConfig& c, const json& v) { c.experiment.t_report = as_list<double>(v, "t_report"); },
        [](const RunConfig& c) { return json(c.experiment.t_report); }}},
      BSDE_SIZE_FIELD("n_steps", experiment.n_steps),
      BSDE_SIZE_FIELD("n_replications", experiment.n_replications),
      {"seed",
       {[](RunConfig& c, const json& v) { c.experiment.base_seed = as_u64(v, "seed"); },
        [](const RunConfig& c) { return json(c.experiment.base_seed); }}},
      {"backend",
       {[](RunConfig& c, const json& v) {
          c.experiment.backend = backend_from_string(as<std::string>(v, "backend"));
        },
        [](const RunConfig& c) { return json(to_string(c.experiment.backend)); }}},
      BSDE_SIZE_FIELD("pde.n_x", experiment.pde_n_x),
      BSDE_SIZE_FIELD("pde.n_t", experiment.pde_n_t),
      BSDE_SIZE_FIELD("pde.n_theta", experiment.pde_n_theta),
      BSDE_SIZE_FIELD("pde.csv_x_stride", csv_x_stride),
      BSDE_SIZE_FIELD("pde.csv_t_stride", csv_t_stride),
      BSDE_FIELD("max_failure_fraction", experiment.max_failure_fraction, double),
      {"stream",
       {[](RunConfig& c, const json& v) { c.stream = as_u64(v, "stream"); },
        [](const RunConfig& c) { return json(c.stream); }}},
      {"delta_schedules",
       {[](RunConfig& c, const json& v) {
          c.delta_schedules = as_list<std::string>(v, "delta_schedules");
        },
        [](const RunConfig& c) { return json(c.delta_schedules); }}},
  };
  return table;
}

#undef BSDE_FIELD
#undef BSDE_SIZE_FIELD

void set_key(RunConfig& config, const std::string& key, const json& value) {
  const auto it = fields().find(key);
  if (it == fields().end()) {
    throw Error(ErrorKind::Configuration, "unknown config key '" + key + "'");
  }
  it->second.set(config, value);
}

void apply_object(RunConfig& config, const json& node, const std::string& prefix) {
  for (auto it = node.begin(); it != node.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it.value().is_object()) {
      apply_object(config, it.value(), key);
    } else {
      set_key(config, key, it.value());
    }
  }
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

json parse_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception&) {
    return json(text);
  }
}

}  // namespace

RunConfig default_run_config(bool full) {
  RunConfig c;
  if (full) {
    c.experiment.n_replications = 5000;
    c.experiment.epsilon_list = {0.1, 0.05, 0.02};
  } else {
    c.experiment.n_replications = 200;
    c.experiment.epsilon_list = {0.1};
  }
  return c;
}

void apply_config_text(RunConfig& config, const std::string& text) {
  const std::string body = trim(text);
  if (!body.empty() && body.front() == '{') {
    json doc;
    try {
      doc = json::parse(body);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::Configuration, std::string("config is not valid JSON: ") + e.what());
    }
    apply_object(config, doc, "");
    return;
  }
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::Configuration,
                  "config line " + std::to_string(number) + ": expected key = value");
    }
    set_key(config, trim(line.substr(0, eq)), parse_value(trim(line.substr(eq + 1))));
  }
}

void apply_override(RunConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw Error(ErrorKind::Configuration, "override '" + assignment + "' is not key=value");
  }
  set_key(config, trim(assignment.substr(0, eq)), parse_value(trim(assignment.substr(eq + 1))));
}

std::string to_json(const RunConfig& config) {
  json doc = json::object();
  for (const auto& [key, field] : fields()) {
    json* node = &doc;
    std::string rest = key;
    for (auto dot = rest.find('.'); dot != std::string::npos; dot = rest.find('.')) {
      node = &(*node)[rest.substr(0, dot)];
      rest = rest.substr(dot + 1);
    }
    (*node)[rest] = field.get(config);
  }
  return doc.dump(2) + "\n";
}

}  // namespace bsde::cli
