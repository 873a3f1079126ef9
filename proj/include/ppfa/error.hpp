#pragma once

#include <stdexcept>
#include <string>

namespace ppfa {

/// Failure classes, numbered as the CLI exit codes.
enum class ErrorCategory
{
  io = 1,
  config = 2,
  numeric = 3,
  convergence = 4
};

inline const char* category_name(ErrorCategory c)
{
  switch (c) {
    case ErrorCategory::io: return "io";
    case ErrorCategory::config: return "config";
    case ErrorCategory::numeric: return "numeric";
    case ErrorCategory::convergence: return "convergence";
  }
  return "unknown";
}

class Error : public std::runtime_error
{
public:
  Error(ErrorCategory category, const std::string& what)
    : std::runtime_error(what)
    , category_(category)
  {}

  ErrorCategory category() const noexcept { return category_; }

private:
  ErrorCategory category_;
};

inline Error numeric_error(const std::string& what)
{
  return Error(ErrorCategory::numeric, what);
}

inline Error config_error(const std::string& what)
{
  return Error(ErrorCategory::config, what);
}

} // namespace ppfa
