#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace frsid {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Non-finite or otherwise invalid numeric input.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Malformed file content; carries the offending location in the message.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent configuration (bad shape parameters, invalid flags, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Operand dimensions do not match the operation's contract.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Not enough samples for the requested block structure.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// Cholesky pivot failure; `pivot` is the failing pivot (1-based).
class DefinitenessError : public Error {
 public:
  DefinitenessError(const std::string& msg, std::int64_t pivot)
      : Error(msg), pivot(pivot) {}
  std::int64_t pivot = 0;
};

/// Input is not persistently exciting (singular input-block factor).
class ExcitationError : public Error {
 public:
  using Error::Error;
};

/// A matrix that must be inverted is numerically rank-deficient.
class IllConditionedError : public Error {
 public:
  IllConditionedError(const std::string& msg, double condition)
      : Error(msg), condition(condition) {}
  double condition = 0.0;
};

/// State/output magnitude diverged during simulation.
class InstabilityError : public Error {
 public:
  using Error::Error;
};

/// Predicted working-set size exceeds the configured memory cap.
class MemoryCapError : public Error {
 public:
  MemoryCapError(const std::string& msg, std::uint64_t predicted_bytes,
                 std::uint64_t cap_bytes)
      : Error(msg), predicted_bytes(predicted_bytes), cap_bytes(cap_bytes) {}
  std::uint64_t predicted_bytes = 0;
  std::uint64_t cap_bytes = 0;
};

/// Estimated model order is zero.
class EmptyModelError : public Error {
 public:
  using Error::Error;
};

/// Subspace distance requested for an all-zero matrix.
class UndefinedSubspaceError : public Error {
 public:
  using Error::Error;
};

/// Random system generation failed after bounded retries.
class GenerationError : public Error {
 public:
  using Error::Error;
};

}  // namespace frsid
