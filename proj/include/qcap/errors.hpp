#pragma once

#include <stdexcept>
#include <string>

namespace qcap {

/// Failure categories. The command-line runner maps these onto exit codes.
enum class ErrorKind {
  InvalidArgument,
  GridMismatch,
  Config,
  PreconditionViolated,
  BlowUpOrInstability,
  NoContraction,
  IllConditioned,
  Inconsistent,
  NotAsymptotic,
  DegenerateProbe,
  BadData,
  IllPosed,
  ShapeMismatch,
  LinearSolve,
  StiffFailure,
  NonMonotoneConvergence,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised when the state stops being finite; carries the last time at which it was.
class BlowUpError : public Error {
 public:
  BlowUpError(double last_good_time, const std::string& what)
      : Error(ErrorKind::BlowUpOrInstability, what), last_good_time_(last_good_time) {}

  double last_good_time() const noexcept { return last_good_time_; }

 private:
  double last_good_time_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace qcap
