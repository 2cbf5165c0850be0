#pragma once

#include <stdexcept>
#include <string>

namespace diamond {

/// Precondition violation on a public entry point.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The requested operation needs data the problem does not provide
/// (e.g. an exact solution or second derivatives of the Cauchy data).
class UnsupportedOperation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The object is in a state that does not admit the operation.
class InvalidState : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Newton failed to reach the residual tolerance.
class SolverDivergence : public std::runtime_error {
 public:
  SolverDivergence(const std::string& what, double last_residual)
      : std::runtime_error(what), last_residual_(last_residual) {}
  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

/// The Newton matrix could not be factorized.
class SingularSystem : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parallel worker failed; carries the worker id and the step it was on.
class AbortedRun : public std::runtime_error {
 public:
  AbortedRun(const std::string& what, int worker, long step)
      : std::runtime_error(what), worker_(worker), step_(step) {}
  int worker() const noexcept { return worker_; }
  long step() const noexcept { return step_; }

 private:
  int worker_;
  long step_;
};

}  // namespace diamond
