#pragma once

#include <stdexcept>
#include <string>

namespace bayinv {

/// Process exit codes used by the CLI.
enum class ExitCode : int
{
  success = 0,
  config_error = 2,
  numerical_failure = 3,
  inference_failure = 4
};

/// Base class for every error raised by the library.
class Error : public std::runtime_error
{
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual ExitCode exit_code() const noexcept = 0;
  virtual const char* kind() const noexcept = 0;
  /// Throws an error of the same dynamic type carrying a new message.
  [[noreturn]] virtual void rethrow_as(const std::string& what) const = 0;
};

#define BAYINV_DEFINE_ERROR(Name, Kind, Code)                                 \
  class Name : public Error                                                   \
  {                                                                           \
  public:                                                                     \
    explicit Name(const std::string& what) : Error(what) {}                   \
    ExitCode exit_code() const noexcept override { return ExitCode::Code; }   \
    const char* kind() const noexcept override { return Kind; }               \
    [[noreturn]] void rethrow_as(const std::string& what) const override      \
    {                                                                         \
      throw Name(what);                                                       \
    }                                                                         \
  };

// Invalid settings or malformed configuration input.
BAYINV_DEFINE_ERROR(ConfigError, "config", config_error)
// A point outside the admissible box.
BAYINV_DEFINE_ERROR(DomainError, "domain", config_error)
// Dimension mismatch between a point and a model.
BAYINV_DEFINE_ERROR(ShapeError, "shape", config_error)
// Data that cannot support the requested fit (duplicates, too few points).
BAYINV_DEFINE_ERROR(DegenerateDataError, "degenerate_data", numerical_failure)
// Factorization or other floating-point breakdown.
BAYINV_DEFINE_ERROR(NumericalError, "numerical", numerical_failure)
// Posterior exploration failed (optimizer divergence, sampler init).
BAYINV_DEFINE_ERROR(InferenceError, "inference", inference_failure)

#undef BAYINV_DEFINE_ERROR

} // namespace bayinv
