#pragma once

#include <stdexcept>
#include <string>

namespace retasa {

//! Base class for every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

//! Invalid parameter values (bandwidths, alpha, grids, shift parameters).
class ConfigError : public Error
{
public:
  using Error::Error;
};

//! Inputs whose shape or content is unusable (dimension/length mismatch,
//! unsorted samples, bad CSV cells, degenerate samples).
class DataError : public Error
{
public:
  using Error::Error;
};

//! Failures of a numerical step on otherwise valid inputs.
class NumericalError : public Error
{
public:
  using Error::Error;
};

} // namespace retasa
