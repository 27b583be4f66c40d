#pragma once

#include <stdexcept>
#include <string>

namespace sbl {

// Base for all recoverable front-end errors (parsing, sorting, arity).
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct SyntaxError : Error {
  int line = 0;
  SyntaxError(const std::string& what, int line_no = 0)
      : Error(line_no > 0 ? "line " + std::to_string(line_no) + ": " + what : what),
        line(line_no) {}
};

struct SortError : Error {
  using Error::Error;
};

// The requested sort has no Boolean layer (it is outside logic_sorts).
struct LogicNotEnabledError : SortError {
  using SortError::SortError;
};

struct ArityError : Error {
  using Error::Error;
};

struct UnknownBuiltinError : Error {
  using Error::Error;
};

struct MacroError : Error {
  using Error::Error;
};

struct ReplayError : Error {
  using Error::Error;
};

}  // namespace sbl
