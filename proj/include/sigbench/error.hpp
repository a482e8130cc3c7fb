#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sigbench {

// Base for every error this library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A generation parameter or configuration value violates its constraints.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

// Caller-supplied data is inconsistent (length mismatch, duplicate objects).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// A metric is not defined for the given input (fewer than two items).
class UndefinedMetric : public Error {
 public:
  using Error::Error;
};

// A sweep specification cannot be expanded.
class InvalidSpec : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed file content. line() is 1-based; 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class UnsupportedVersion : public Error {
 public:
  using Error::Error;
};

}  // namespace sigbench
