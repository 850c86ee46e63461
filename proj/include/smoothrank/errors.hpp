#pragma once

#include <stdexcept>
#include <string>

namespace smoothrank {

/// Bad input data: malformed files, violated invariants, inconsistent
/// judgments. The CLI maps these to exit code 1.
class DataError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Invalid arguments or configuration (exit code 2).
class UsageError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Filesystem failures: missing, unreadable or unwritable paths (exit code 2).
class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class CheckpointVersionError : public DataError {
  public:
    using DataError::DataError;
};

class CheckpointDimError : public DataError {
  public:
    using DataError::DataError;
};

class CheckpointCorruptError : public DataError {
  public:
    using DataError::DataError;
};

}  // namespace smoothrank
