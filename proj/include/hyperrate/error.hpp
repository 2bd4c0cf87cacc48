#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hyperrate {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed instance document. line is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::string field)
      : Error(format(what, line, field)), line_(line), field_(std::move(field)) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  static std::string format(const std::string& what, std::size_t line,
                            const std::string& field) {
    std::string out = "parse error";
    if (line > 0) out += " at line " + std::to_string(line);
    if (!field.empty()) out += " (field '" + field + "')";
    return out + ": " + what;
  }

  std::size_t line_;
  std::string field_;
};

// Well-formed input that breaks an invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Enumeration or alphabet cap exceeded.
class CapError : public Error {
 public:
  using Error::Error;
};

// Operation called outside its precondition (e.g. separation without Condition 1).
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace hyperrate
