#pragma once

#include <stdexcept>
#include <string>

namespace dsq {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user input or configuration. The CLI maps this to exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Norm drift beyond tolerance during propagation (exit code 2).
class IntegrationError : public Error {
 public:
  using Error::Error;
};

/// Curve fit did not converge or residuals exceeded the bound (exit code 2).
class FitError : public Error {
 public:
  using Error::Error;
};

/// A state was handed to a basis change in the wrong basis.
class BasisError : public Error {
 public:
  using Error::Error;
};

}  // namespace dsq
