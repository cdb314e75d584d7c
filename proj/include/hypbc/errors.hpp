#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace hypbc {

// Boundaries crossed or met: x_R(t) <= x_L(t).
class DomainCollapseError : public std::runtime_error {
 public:
  explicit DomainCollapseError(const std::string& what) : std::runtime_error(what) {}
};

// Density transform singular or badly conditioned.
class TransformError : public std::runtime_error {
 public:
  explicit TransformError(const std::string& what) : std::runtime_error(what) {}
};

class RankDeficiencyError : public std::runtime_error {
 public:
  RankDeficiencyError(const std::string& what, std::vector<int> rows)
      : std::runtime_error(what), rows_(std::move(rows)) {}
  const std::vector<int>& rows() const { return rows_; }

 private:
  std::vector<int> rows_;
};

class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

class StencilError : public std::runtime_error {
 public:
  explicit StencilError(const std::string& what) : std::runtime_error(what) {}
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class InitializationError : public std::runtime_error {
 public:
  InitializationError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// Raised by the simulation driver when a value exceeds the blow-up threshold.
class InstabilityError : public std::runtime_error {
 public:
  InstabilityError(const std::string& what, double time)
      : std::runtime_error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

// State outside the admissible set of a system (e.g. non-positive depth).
class DegenerateStateError : public std::domain_error {
 public:
  explicit DegenerateStateError(const std::string& what) : std::domain_error(what) {}
};

// Closed-form solution requested outside the region where it holds.
class OutOfValidityError : public std::domain_error {
 public:
  explicit OutOfValidityError(const std::string& what) : std::domain_error(what) {}
};

}  // namespace hypbc
