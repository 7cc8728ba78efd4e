#pragma once

#include <stdexcept>
#include <string>

namespace sdwave {

enum class ErrorCode {
  invalid_argument,
  singular_system,
  degenerate_constraint,
  empty_basis,
  io,
  config,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class SingularSystemError : public Error {
 public:
  SingularSystemError(long pivot, const std::string& what)
      : Error(ErrorCode::singular_system, what), pivot_(pivot) {}

  /// Row/column index (original ordering) of the offending pivot.
  long pivot() const noexcept { return pivot_; }

 private:
  long pivot_;
};

[[noreturn]] inline void throw_invalid(const std::string& what) {
  throw Error(ErrorCode::invalid_argument, what);
}

inline void require(bool cond, const std::string& what) {
  if (!cond) throw_invalid(what);
}

}  // namespace sdwave
