#include "bsde/errors.hpp"

namespace bsde {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidModel: return "invalid-model";
    case ErrorKind::Configuration: return "configuration";
    case ErrorKind::IntegrationDiverged: return "integration-diverged";
    case ErrorKind::SimulationDiverged: return "simulation-diverged";
    case ErrorKind::FlatObjective: return "flat-objective";
    case ErrorKind::SingularInformation: return "singular-information";
    case ErrorKind::Quadrature: return "quadrature";
    case ErrorKind::Evaluation: return "evaluation";
    case ErrorKind::Stability: return "stability";
    case ErrorKind::Divergence: return "divergence";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Diagnostic: return "diagnostic";
  }
  return "unknown";
}

namespace {

std::string decorate(ErrorKind kind, const std::string& message,
                     std::optional<std::size_t> index) {
  std::string out = std::string(to_string(kind)) + ": " + message;
  if (index) out += " (node " + std::to_string(*index) + ")";
  return out;
}

}  // namespace

Error::Error(ErrorKind kind, const std::string& message,
             std::optional<std::size_t> index)
    : std::runtime_error(decorate(kind, message, index)),
      kind_(kind),
      index_(index) {}

}  // namespace bsde
