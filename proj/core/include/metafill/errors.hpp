#pragma once

#include <stdexcept>
#include <string>

namespace metafill {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (graph files, artifacts, labels).
class DataError : public Error {
 public:
  using Error::Error;
};

// Invalid arguments or configuration values.
class UsageError : public Error {
 public:
  using Error::Error;
};

// The scorer backend could not be reached or returned a protocol error.
class TransportError : public Error {
 public:
  using Error::Error;
};

// No schema-valid edge type exists at some step of path sampling.
class SamplingDeadEnd : public Error {
 public:
  using Error::Error;
};

}  // namespace metafill
