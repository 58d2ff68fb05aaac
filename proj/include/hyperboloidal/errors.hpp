#pragma once

#include <stdexcept>
#include <string>

namespace hyp {

/// Invalid argument to a library operation (bad N, non-positive θ, ...).
struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Frame or grid mismatch, or a physical-frame value requested where ρ = 0.
struct FrameError : std::logic_error {
  using std::logic_error::logic_error;
};

/// Linear or nonlinear solver failure (stagnation, divergence, floor violation).
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Weight outside the Fredholm window of the requested operator.
struct WeightWindowError : DomainError {
  using DomainError::DomainError;
};

/// Malformed or inconsistent run configuration.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace hyp
