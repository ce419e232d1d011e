#pragma once

#include <stdexcept>
#include <string>

namespace ssvep {

// Malformed or inconsistent input data (files, manifests, wire messages,
// labels). The CLI maps these to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numerical routine could not produce a meaningful result (singular
// systems, recursion breakdown, zero-variance input). CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition violations use std::invalid_argument / std::out_of_range.

}  // namespace ssvep
