#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace flea {

// Precondition violated by a caller-supplied value (bounds, sizes, shapes).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An iterative solver did not reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, std::size_t iterations, double worst_residual)
      : std::runtime_error(what), iterations_(iterations), worst_residual_(worst_residual) {}

  std::size_t iterations() const { return iterations_; }
  double worst_residual() const { return worst_residual_; }

 private:
  std::size_t iterations_;
  double worst_residual_;
};

// Norm drift of a propagated state exceeded the stability budget.
class StabilityError : public std::runtime_error {
 public:
  StabilityError(const std::string& what, double time, double drift)
      : std::runtime_error(what), time_(time), drift_(drift) {}
  double time() const { return time_; }
  double drift() const { return drift_; }

 private:
  double time_;
  double drift_;
};

// Phase-space grid failed to capture enough probability mass.
class CoverageError : public std::runtime_error {
 public:
  CoverageError(const std::string& what, double captured)
      : std::runtime_error(what), captured_(captured) {}
  double captured() const { return captured_; }

 private:
  double captured_;
};

// A random construction could not be certified against its bounds.
class ConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ReplayMismatch : public std::runtime_error {
 public:
  ReplayMismatch(const std::string& what, std::vector<std::string> files)
      : std::runtime_error(what), files_(std::move(files)) {}
  const std::vector<std::string>& files() const { return files_; }

 private:
  std::vector<std::string> files_;
};

}  // namespace flea
