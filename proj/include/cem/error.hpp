#pragma once

#include <stdexcept>
#include <string>

namespace cem {

// Base for everything thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad or inconsistent run configuration (detected before any data work).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Column/shape mismatches between data and a schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Malformed cell or record in an input file; message carries the row index.
class ParseError : public Error {
 public:
  using Error::Error;
};

class DuplicateKeyError : public Error {
 public:
  using Error::Error;
};

class EmptyInputError : public Error {
 public:
  using Error::Error;
};

// Invalid k, invalid hyperparameter, invalid cluster assignment, ...
class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

// Unresolvable community, unknown tract, bad input values.
class DataError : public Error {
 public:
  using Error::Error;
};

// Iterative fit failed to converge or diverged.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// No candidate model could be fitted during model selection.
class SelectionError : public Error {
 public:
  using Error::Error;
};

}  // namespace cem
