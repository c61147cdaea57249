#pragma once

#include <stdexcept>
#include <string>

namespace pathflux {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed model, dataset, configuration or argument. The CLI maps this to exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Enumeration grid larger than the configured cell budget.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// Overlap or truncation-floor violation. The CLI maps this to exit code 3.
class NumericalGuardError : public Error {
 public:
  using Error::Error;
};

// A cell needed by an identification functional is undefined (zero mass).
class IdentificationError : public NumericalGuardError {
 public:
  using NumericalGuardError::NumericalGuardError;
};

// Contrast requested outside its domain, e.g. KL with mismatched supports.
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace pathflux
