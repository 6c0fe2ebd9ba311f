#pragma once

#include <stdexcept>
#include <string>

namespace gllrss {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input failed a structural check (shape, symmetry, sign, range).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unreadable external data (files, CSV, JSON).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine failed to produce a usable result.
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace gllrss
