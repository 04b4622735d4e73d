#pragma once

#include <stdexcept>
#include <string>

namespace latticeblocks {

/// Error categories reported by the CLI as distinct exit codes.
enum class ErrorCategory {
  Configuration = 2,
  Dispatch = 3,
  Protocol = 4,
  Transport = 5,
  Measurement = 6,
  Usage = 7,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }
  const char* category_name() const noexcept;

 private:
  ErrorCategory category_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCategory::Configuration, what) {}
};

class DispatchError : public Error {
 public:
  explicit DispatchError(const std::string& what) : Error(ErrorCategory::Dispatch, what) {}
};

class ProtocolError : public Error {
 public:
  explicit ProtocolError(const std::string& what) : Error(ErrorCategory::Protocol, what) {}
};

class TransportError : public Error {
 public:
  explicit TransportError(const std::string& what) : Error(ErrorCategory::Transport, what) {}
};

class MeasurementError : public Error {
 public:
  explicit MeasurementError(const std::string& what) : Error(ErrorCategory::Measurement, what) {}
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorCategory::Usage, what) {}
};

inline const char* Error::category_name() const noexcept {
  switch (category_) {
    case ErrorCategory::Configuration: return "configuration";
    case ErrorCategory::Dispatch: return "dispatch";
    case ErrorCategory::Protocol: return "protocol";
    case ErrorCategory::Transport: return "transport";
    case ErrorCategory::Measurement: return "measurement";
    case ErrorCategory::Usage: return "usage";
  }
  return "unknown";
}

/// Rethrows an error reconstructed from its category, e.g. after it crossed a
/// process boundary as text.
[[noreturn]] inline void throw_error(ErrorCategory category, const std::string& what) {
  switch (category) {
    case ErrorCategory::Configuration: throw ConfigError(what);
    case ErrorCategory::Dispatch: throw DispatchError(what);
    case ErrorCategory::Protocol: throw ProtocolError(what);
    case ErrorCategory::Transport: throw TransportError(what);
    case ErrorCategory::Measurement: throw MeasurementError(what);
    case ErrorCategory::Usage: break;
  }
  throw UsageError(what);
}

}  // namespace latticeblocks
