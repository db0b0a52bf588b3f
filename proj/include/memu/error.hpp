#pragma once

#include <stdexcept>
#include <string>

namespace memu {

/// Base class for all library errors that are caused by bad runtime state
/// (non-finite returns, failed file writes, ...).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for malformed or inconsistent experiment configuration. The message
/// is already anchored to a source location (`file:line: ...`) when one exists.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Argument checks shared by all modules.
void require_finite(double value, const char* what);
void require(bool condition, const std::string& message);

}  // namespace memu
