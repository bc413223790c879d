#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rws {

enum class ErrorKind {
  InvalidParameter,
  InvalidPrecondition,
  NumericalFailure,
  InsufficientData,
  NoDivergenceSequence,
  PlacementInfeasible,
  UnsupportedFamily,
};

std::string_view error_tag(ErrorKind kind) noexcept;

/// Exception carrying a stable machine-readable tag; the CLI maps tags onto
/// exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(error_tag(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::string_view tag() const noexcept { return error_tag(kind_); }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace rws
