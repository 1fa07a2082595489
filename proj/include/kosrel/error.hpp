#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kosrel {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised by every line-oriented reader; `line()` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace kosrel
