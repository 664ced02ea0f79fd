#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace colcomplete {

// Base of every error raised by the library. The message can be prefixed with
// context (e.g. the solver stage) while the dynamic type is preserved on rethrow.
class Error : public std::exception {
 public:
  explicit Error(std::string message) : message_(std::move(message)) {}

  const char* what() const noexcept override { return message_.c_str(); }

  void add_context(const std::string& context) { message_ = context + ": " + message_; }

 private:
  std::string message_;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class RankError : public Error {
 public:
  using Error::Error;
};

class SizeError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& message, std::size_t iterations)
      : Error(message + " (after " + std::to_string(iterations) + " iterations)"),
        iterations_(iterations) {}

  std::size_t iterations() const noexcept { return iterations_; }

 private:
  std::size_t iterations_;
};

class OrthonormalityError : public Error {
 public:
  OrthonormalityError(const std::string& message, double deviation)
      : Error(message + " (deviation " + std::to_string(deviation) + ")"), deviation_(deviation) {}

  double deviation() const noexcept { return deviation_; }

 private:
  double deviation_;
};

// Raised when a gradient step increases the objective beyond round-off.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& message, std::size_t iteration)
      : Error(message + " (iteration " + std::to_string(iteration) + ")"), iteration_(iteration) {}

  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

class AssumptionViolation : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class DegenerateMetricError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace colcomplete
