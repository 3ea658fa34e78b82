#pragma once

#include <stdexcept>
#include <string>

namespace infops {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition on the arguments of an operation does not hold.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Input text could not be parsed. `line()` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// An iterative solver hit its iteration cap before reaching tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// A linear system is singular or a simulation regime is unstable.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace infops
