#pragma once

#include <stdexcept>

namespace convexcheck {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input vector length does not match the network or box dimension.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A network (or a derived object) violates a structural invariant.
class StructureError : public Error {
 public:
  using Error::Error;
};

class CycleError : public StructureError {
 public:
  using StructureError::StructureError;
};

/// Malformed JSON or an unknown/missing field.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// File could not be opened.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A size limit (dimension, neuron count, path count, region count) was exceeded.
class GuardRailError : public Error {
 public:
  using Error::Error;
};

/// The LP solver or a post-solve validation failed.
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace convexcheck
