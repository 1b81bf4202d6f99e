#pragma once

#include <stdexcept>
#include <string>

namespace synth {

enum class ErrorKind {
  invalid_argument,
  non_finite,
  singular,
  no_convergence,
  infeasible,
  config,
  internal,
};

class SynthError : public std::runtime_error {
 public:
  SynthError(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace synth
