#pragma once

#include <stdexcept>
#include <string>

namespace recipemem {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller violated a documented precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Malformed input data (records, configuration, fixtures).
class FormatError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// A pipeline stage could not produce its output for one unit of work.
class StageError : public Error {
 public:
  using Error::Error;
};

}  // namespace recipemem
