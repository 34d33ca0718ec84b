#pragma once

#include <stdexcept>
#include <string>

namespace swedge {

/// Invalid user input: bad design parameters, malformed files, schema errors.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input that parsed but cannot be read as the documented format. Carries the
/// 1-based line number when the source is a text file.
class ParseError : public InvalidArgument {
 public:
  ParseError(const std::string& what, long line = 0)
      : InvalidArgument(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  long line() const noexcept { return line_; }

 private:
  long line_;
};

/// A requested model is not estimable on the given layout.
class IdentifiabilityError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Singular systems, degenerate closed forms, optimizer failures.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace swedge
