#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace skepxel {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text. line() is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Input that parsed but contains no frames.
class EmptyInputError : public ParseError {
 public:
  using ParseError::ParseError;
};

// Structurally valid input that breaks a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace skepxel
