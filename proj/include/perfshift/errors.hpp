#pragma once

#include <stdexcept>
#include <string>

namespace perfshift {

/// Invalid user-supplied spec, config, sample, or table contents.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// A predictor is not constant on some cell of the active cell grid.
class PartitionMismatchError : public std::runtime_error {
 public:
  explicit PartitionMismatchError(const std::string& what) : std::runtime_error(what) {}
};

/// Plug-in fitting failed (empty stratum, unobserved training rows).
class FitError : public std::runtime_error {
 public:
  explicit FitError(const std::string& what) : std::runtime_error(what) {}
};

/// File read/write failure, annotated with the offending path.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace perfshift
