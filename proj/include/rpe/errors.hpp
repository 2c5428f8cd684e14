#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rpe {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument violated an operation precondition (bad floor, empty list, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Unknown type id, action name, edge id, path, ...
class LookupError : public Error {
 public:
  using Error::Error;
};

/// A loaded model is structurally invalid (no o->t path, non-monotone cost, ...).
class ModelError : public Error {
 public:
  using Error::Error;
};

/// A configurable resource cap was exceeded (e.g. path enumeration).
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// Malformed input text. `context` names the file/field/position involved.
class ParseError : public Error {
 public:
  ParseError(const std::string& context, const std::string& message)
      : Error(context.empty() ? message : context + ": " + message),
        context_(context) {}

  const std::string& context() const noexcept { return context_; }

 private:
  std::string context_;
};

/// An iterative solver stopped without meeting its tolerance. Carries the best
/// iterate seen and the residual history so callers can diagnose the failure.
class SolverError : public Error {
 public:
  SolverError(const std::string& message, std::vector<double> best_iterate,
              double residual, std::vector<double> history = {})
      : Error(message),
        best_iterate_(std::move(best_iterate)),
        residual_(residual),
        history_(std::move(history)) {}

  const std::vector<double>& best_iterate() const noexcept {
    return best_iterate_;
  }
  double residual() const noexcept { return residual_; }
  const std::vector<double>& history() const noexcept { return history_; }

 private:
  std::vector<double> best_iterate_;
  double residual_;
  std::vector<double> history_;
};

}  // namespace rpe
