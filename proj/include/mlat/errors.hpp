#pragma once

#include <stdexcept>
#include <string>

namespace mlat {

// Error families map one-to-one onto CLI exit codes (see mlat/cli.hpp).

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration, malformed input, or a violated structural precondition.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Mismatched dimensions between vectors, layouts and configurations.
class StructuralError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Reference to a station or point id that does not exist.
class LookupError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Math domain violations and out-of-range physical inputs.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Degenerate measurement geometry (coincident point and station, negative lengths).
class GeometryError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Failure of the least-squares machinery itself.
class SolverError : public Error {
 public:
  using Error::Error;
};

class RankDeficiencyError : public SolverError {
 public:
  RankDeficiencyError(int iteration, const std::string& what)
      : SolverError(what), iteration_(iteration) {}

  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

/// Unreadable or unwritable files.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace mlat
