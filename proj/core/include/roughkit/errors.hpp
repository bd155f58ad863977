#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace roughkit {

/// Time or index outside the domain of a path.
class DomainError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Invalid argument: bad exponent, shape mismatch, misaligned grid, level overflow.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Inverse requested for an element with zero scalar part.
class SingularityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numerical march produced a non-finite state.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::size_t step)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// Malformed textual input. Line is 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Model coefficients violate an admissibility condition.
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace roughkit
