#pragma once

#include <stdexcept>
#include <string>

namespace dssalloc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parameters that are malformed or violate a documented precondition.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Parameters that are individually valid but describe no allocation.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// The (access, service) pair has no closed form for the requested quantity.
class NoClosedFormError : public Error {
 public:
  using Error::Error;
};

// Exact integer result does not fit; use the log-space variant.
class OverflowError : public Error {
 public:
  using Error::Error;
};

class InsufficientTrialsError : public Error {
 public:
  using Error::Error;
};

}  // namespace dssalloc
