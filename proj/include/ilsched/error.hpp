#pragma once

#include <stdexcept>
#include <string>

namespace ilsched {

// Base for every error raised by the library. Each subclass names one failure
// mode so callers (and the CLI exit-code mapping) can tell them apart.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual const char* kind() const noexcept { return "Error"; }
};

#define ILSCHED_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                        \
   public:                                                           \
    explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
    const char* kind() const noexcept override { return #Name; }     \
  };

ILSCHED_DEFINE_ERROR(ParseError)
ILSCHED_DEFINE_ERROR(ValidationError)
ILSCHED_DEFINE_ERROR(UnknownConfig)
ILSCHED_DEFINE_ERROR(UnknownPe)
ILSCHED_DEFINE_ERROR(UnknownApp)
ILSCHED_DEFINE_ERROR(UnknownTask)
ILSCHED_DEFINE_ERROR(NoCapablePe)
ILSCHED_DEFINE_ERROR(UnsupportedTask)
ILSCHED_DEFINE_ERROR(SchedulerError)
ILSCHED_DEFINE_ERROR(TraceMismatch)
ILSCHED_DEFINE_ERROR(TaskNotReady)
ILSCHED_DEFINE_ERROR(EmptyDataset)
ILSCHED_DEFINE_ERROR(SchemaMismatch)
ILSCHED_DEFINE_ERROR(InsufficientData)
ILSCHED_DEFINE_ERROR(IoError)

#undef ILSCHED_DEFINE_ERROR

}  // namespace ilsched
