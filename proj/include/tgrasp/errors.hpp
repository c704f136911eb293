#pragma once

#include <stdexcept>
#include <string>

namespace tgrasp {

enum class ErrorCategory {
  Structural,
  Calibration,
  Format,
  Io,
  Argument,
  Config,
  Reconciliation,
};

/// Base of every exception thrown by the library. The category drives the
/// CLI's exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

#define TGRASP_DEFINE_ERROR(Name, Cat)                                  \
  class Name : public Error {                                           \
   public:                                                              \
    explicit Name(const std::string& what) : Error(ErrorCategory::Cat, what) {} \
  };

TGRASP_DEFINE_ERROR(StructuralError, Structural)
TGRASP_DEFINE_ERROR(CalibrationError, Calibration)
TGRASP_DEFINE_ERROR(FormatError, Format)
TGRASP_DEFINE_ERROR(ArgumentError, Argument)
TGRASP_DEFINE_ERROR(ConfigError, Config)
TGRASP_DEFINE_ERROR(ReconciliationError, Reconciliation)

#undef TGRASP_DEFINE_ERROR

/// I/O failure; carries the frame index when a payload is truncated.
class IoError : public Error {
 public:
  explicit IoError(const std::string& what, long frame_index = -1)
      : Error(ErrorCategory::Io, what), frame_index_(frame_index) {}

  long frame_index() const noexcept { return frame_index_; }

 private:
  long frame_index_;
};

}  // namespace tgrasp
