#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace handpose {

// Common base so callers can catch everything thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A value outside an operation's domain (non-finite coordinate, bad K, ...).
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

// Mismatched shapes or sizes between containers that must agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A solve whose input configuration is rank-deficient.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

// An iterative solver that ran out of iterations without meeting its tolerance.
class NonConvergenceError : public Error {
 public:
  using Error::Error;
};

// A malformed binary or text file (bad magic, truncation, bad header).
class FormatError : public Error {
 public:
  using Error::Error;
};

// A malformed manifest; carries the 1-based line where parsing failed.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line)
      : Error(message + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Incompatible configuration (e.g. checkpoint does not match the variant).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Training aborted (non-finite gradients and the like).
class TrainingError : public Error {
 public:
  using Error::Error;
};

// Evaluation preconditions unmet (missing ground truth, empty manifest).
class EvalError : public Error {
 public:
  using Error::Error;
};

}  // namespace handpose
