#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace bsde {

enum class ErrorKind {
  InvalidModel,
  Configuration,
  IntegrationDiverged,
  SimulationDiverged,
  FlatObjective,
  SingularInformation,
  Quadrature,
  Evaluation,
  Stability,
  Divergence,
  Domain,
  Diagnostic,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message,
        std::optional<std::size_t> index = std::nullopt);

  ErrorKind kind() const noexcept { return kind_; }
  // Grid node at which the failure was detected, when meaningful.
  std::optional<std::size_t> index() const noexcept { return index_; }

 private:
  ErrorKind kind_;
  std::optional<std::size_t> index_;
};

}  // namespace bsde
