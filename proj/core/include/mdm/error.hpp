#pragma once

#include <stdexcept>
#include <string>

namespace mdm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed graphs, activities, configs or parameters outside a domain.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

/// An exact (exponential-cost) routine was asked to exceed its size cap.
class SizeCapError : public Error {
 public:
  using Error::Error;
};

/// Root finding, bracketing or quadrature failed to meet its tolerance.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace mdm
