#pragma once

#include <stdexcept>
#include <string>

namespace g2p {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Command line misuse. Mapped to exit code 1 by the CLI.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Invalid input data or arguments. Mapped to exit code 2 by the CLI.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Unexpected internal state. Mapped to exit code 3 by the CLI.
class InternalError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  using DataError::DataError;
};

class ArgumentError : public DataError {
 public:
  using DataError::DataError;
};

class AlignmentError : public DataError {
 public:
  using DataError::DataError;
};

class PairingError : public DataError {
 public:
  using DataError::DataError;
};

class ScoringError : public DataError {
 public:
  using DataError::DataError;
};

class TrainingError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace g2p
