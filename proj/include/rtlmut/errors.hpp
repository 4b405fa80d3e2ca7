#pragma once

#include <stdexcept>
#include <string>

namespace rtlmut {

// Root of the error taxonomy. Every failure the pipeline can signal derives
// from this so callers can catch at whatever granularity they need.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Configuration / input validation
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Mutation catalog
class IndexMalformed : public Error {
 public:
  using Error::Error;
};
class UnknownClass : public Error {
 public:
  using Error::Error;
};

// Agent backends
class BackendError : public Error {
 public:
  using Error::Error;
};
class SchemaViolation : public Error {
 public:
  using Error::Error;
};

// Agent post-validation
class InvalidChoice : public Error {
 public:
  using Error::Error;
};
class NoOpMutation : public Error {
 public:
  using Error::Error;
};
class NoMutableRegion : public Error {
 public:
  using Error::Error;
};

// Partitioning
class PartitionInvalid : public Error {
 public:
  using Error::Error;
};

// Mutation cache
class StorageError : public Error {
 public:
  using Error::Error;
};
class AlreadyFinalized : public Error {
 public:
  using Error::Error;
};
class UnknownEntry : public Error {
 public:
  using Error::Error;
};

// Patch engine
class StaleContent : public Error {
 public:
  using Error::Error;
};
class IoError : public Error {
 public:
  using Error::Error;
};
class DigestMismatch : public Error {
 public:
  using Error::Error;
};

// Evaluation harness. Infrastructure problems (hung simulator, spawn
// failure) are deliberately distinct from the three evaluation outcomes:
// they annul the attempt instead of mislabeling it.
class InfraError : public Error {
 public:
  using Error::Error;
};

// Campaign
class BaselineGateFailed : public Error {
 public:
  using Error::Error;
};

}  // namespace rtlmut
