#pragma once

#include <stdexcept>
#include <string>

namespace trapdet {

//! Base of every error thrown by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

//! Bad user input: inconsistent configuration, invalid parameters.
class ConfigError : public Error {
  public:
    using Error::Error;
};

//! A numerical procedure (quadrature, ODE, root finding) failed.
class NumericError : public Error {
  public:
    using Error::Error;
};

//! Adaptive quadrature did not reach the requested tolerance.
class QuadratureError : public NumericError {
  public:
    QuadratureError(std::string const& what, double partial, double error_estimate)
        : NumericError(what), partial_(partial), error_estimate_(error_estimate) {}

    double partial() const { return partial_; }
    double error_estimate() const { return error_estimate_; }

  private:
    double partial_;
    double error_estimate_;
};

//! Reading or writing a file failed.
class IoError : public Error {
  public:
    using Error::Error;
};

//! No detectable rate: the configuration is kinematically dead.
class NoSensitivityError : public NumericError {
  public:
    using NumericError::NumericError;
};

}  // namespace trapdet
