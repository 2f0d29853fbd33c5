#pragma once

#include <stdexcept>
#include <string>

namespace krgs {

/// Malformed input files, bad config keys/values, inconsistent datasets.
/// The CLI maps this to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A linear solve that could not be completed even after jitter recovery.
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Raised when more than the tolerated share of Monte Carlo trials failed.
/// The CLI maps this to exit code 2.
class SolverThresholdError : public SolverError {
 public:
  explicit SolverThresholdError(const std::string& msg) : SolverError(msg) {}
};

}  // namespace krgs
