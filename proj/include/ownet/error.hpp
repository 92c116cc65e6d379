#pragma once

#include <stdexcept>
#include <string>

namespace ownet {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file; carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A quantity whose denominator vanishes (e.g. a subtree with no in-links).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

}  // namespace ownet
