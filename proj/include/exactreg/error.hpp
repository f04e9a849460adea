#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace exactreg {

enum class ErrorKind {
  InvalidDimension,
  InvalidInput,
  NotInscribed,
  Degeneracy,
  Unbounded,
  Infeasible,
  NumericalFailure,
  Precondition,
  Tie,
  Contract,
  MissingInput,
  Config,
  Io,
};

std::string_view to_string(ErrorKind kind);

// Every failure surfaced by the library carries a kind so callers (the CLI,
// the trial runner's resampling loop) can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace exactreg
