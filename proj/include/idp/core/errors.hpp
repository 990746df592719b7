#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace idp {

/// A state left the admissible set, or a thermodynamic quantity was requested
/// for a state where it is undefined.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input: mesh counts, config keys, file syntax.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mesh file or topology is malformed.
class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operator assembly failed (degenerate cell, strict acute-angle check).
class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterative solver did not reach the requested tolerance.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), residual_history(std::move(history)) {}
  std::vector<double> residual_history;
};

/// Requested time step exceeds the explicit stability limit dt0.
class CflViolation : public std::runtime_error {
 public:
  CflViolation(const std::string& what, double dt, double dt0)
      : std::runtime_error(what), dt(dt), dt0(dt0) {}
  double dt;
  double dt0;
};

/// An invariant guaranteed by construction was found broken. Always a bug.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace idp
