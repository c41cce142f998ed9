#pragma once

#include <stdexcept>
#include <string>

namespace majorant {

// Invalid distribution or process parameters (nonpositive slope, bad dimension, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed inputs: unsorted grids, empty samples, mismatched arrays.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A query falls outside the simulated time range.
class HorizonError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// A generation cap was exceeded (segment count, horizon doublings, draw budget).
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Quadrature failed to converge, or a numerical safeguard tripped.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace majorant
