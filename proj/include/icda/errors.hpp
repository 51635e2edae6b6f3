#pragma once

#include <stdexcept>
#include <string>

namespace icda {

// Dimension mismatch between matrices, layers or partitions.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain of an operation (tau <= 0, empty slice, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A batch lacks the old or new side required by a coupled loss term.
class InsufficientPartition : public DomainError {
 public:
  using DomainError::DomainError;
};

// Non-finite value met during training or optimisation.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file; message carries the line number.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid run configuration or missing referenced file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace icda
