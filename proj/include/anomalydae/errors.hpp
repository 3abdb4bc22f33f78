#pragma once

#include <stdexcept>
#include <string>

namespace anomalydae {

enum class ErrorKind {
  invalid_shape,
  invalid_config,
  parse,
  capacity,
  isolated_node,
  numeric_failure,
  undefined_metric,
  io,
};

/// Base class for every error raised by the library. The kind drives the
/// CLI exit code mapping.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define ANOMALYDAE_DEFINE_ERROR(Name, Kind)                                 \
  class Name : public Error {                                               \
   public:                                                                  \
    explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
  };

ANOMALYDAE_DEFINE_ERROR(ShapeError, invalid_shape)
ANOMALYDAE_DEFINE_ERROR(ConfigError, invalid_config)
ANOMALYDAE_DEFINE_ERROR(CapacityError, capacity)
ANOMALYDAE_DEFINE_ERROR(IsolatedNodeError, isolated_node)
ANOMALYDAE_DEFINE_ERROR(UndefinedMetricError, undefined_metric)
ANOMALYDAE_DEFINE_ERROR(IoError, io)

#undef ANOMALYDAE_DEFINE_ERROR

/// Parse failure; carries the 1-based line number when one applies.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(ErrorKind::parse, source + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Non-finite value encountered. `iteration` is set by the trainer.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what, long iteration = -1)
      : Error(ErrorKind::numeric_failure,
              iteration >= 0 ? what + " (iteration " + std::to_string(iteration) + ")" : what),
        iteration_(iteration) {}
  long iteration() const noexcept { return iteration_; }

 private:
  long iteration_;
};

}  // namespace anomalydae
