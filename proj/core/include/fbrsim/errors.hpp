#pragma once

#include <stdexcept>
#include <string>

namespace fbrsim {

// Invalid model input: inconsistent geometry, malformed tables, bad options.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Property evaluation outside the domain of the fluid model (no gas root,
// non-positive temperature or pressure, non-finite values).
class ThermoError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A residual or Jacobian evaluation failed. Carries the location of the
// offending equation.
class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(const std::string& what, int volume, int cell, std::string equation)
      : std::runtime_error(what + " [volume " + std::to_string(volume) + ", cell " +
                           std::to_string(cell) + ", " + equation + "]"),
        volume_(volume),
        cell_(cell),
        equation_(std::move(equation)) {}

  int volume() const { return volume_; }
  int cell() const { return cell_; }
  const std::string& equation() const { return equation_; }

 private:
  int volume_;
  int cell_;
  std::string equation_;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fbrsim
