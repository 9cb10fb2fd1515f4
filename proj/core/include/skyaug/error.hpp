#pragma once

#include <stdexcept>
#include <string>

namespace skyaug {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments or configuration supplied by the caller.
class UsageError : public Error {
public:
  using Error::Error;
};

/// Malformed, missing, or numerically degenerate data.
class DataError : public Error {
public:
  using Error::Error;
};

/// A pipeline stage was run before the artifacts it depends on exist.
class StageOrderError : public Error {
public:
  using Error::Error;
};

} // namespace skyaug
