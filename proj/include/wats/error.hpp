#pragma once

#include <stdexcept>
#include <string>

namespace wats {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid basis/scenario/config specification.
struct SpecError : Error {
  using Error::Error;
};

// Argument outside the supported domain (e.g. time outside the grid).
struct DomainError : Error {
  using Error::Error;
};

// Caller violated an interface precondition (dimension mismatch, M < 2, ...).
struct ContractError : Error {
  using Error::Error;
};

// Input data unusable for the requested operation.
struct DataError : Error {
  using Error::Error;
};

// Numerical failure: singular system, degenerate test, rank deficiency.
struct NumericError : Error {
  using Error::Error;
};

}  // namespace wats
