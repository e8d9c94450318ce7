#pragma once

#include <stdexcept>
#include <string>

namespace wbrom {

/// Broad failure category; the CLI maps each one to a distinct exit code.
enum class ErrorKind {
  Domain,          // argument outside the mathematical domain of an operation
  SizeMismatch,
  Singular,        // linear system cannot be solved
  CflViolation,    // explicit update left the admissible saturation range
  ZeroMass,
  TooFewSnapshots,
  NonTensorGrid,
  OutOfRange,      // parameter outside the training box, or index out of range
  Config,
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

const char* to_string(ErrorKind kind) noexcept;

}  // namespace wbrom
