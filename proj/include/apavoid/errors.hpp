#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace apavoid {

/// Input outside an operation's mathematical domain (maps to exit status 2).
class domain_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Parameter combination the toolkit deliberately refuses to interpret.
class unsupported_mode : public domain_error {
 public:
  using domain_error::domain_error;
};

/// Search would exceed a configured size limit (maps to exit status 3).
class resource_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed textual input. Line and column are 1-based; 0 means unknown.
class parse_error : public std::invalid_argument {
 public:
  parse_error(const std::string& what, std::size_t line = 0, std::size_t column = 0)
      : std::invalid_argument(format(what, line, column)), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& what, std::size_t line, std::size_t column) {
    if (line == 0) return what;
    return what + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")";
  }

  std::size_t line_;
  std::size_t column_;
};

}  // namespace apavoid

namespace apavoid {

/// Unknown subcommand or parameter (maps to exit status 64).
class usage_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace apavoid
