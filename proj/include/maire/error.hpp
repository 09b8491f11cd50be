#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace maire {

// Base for every error the library raises on bad input or a failed contract.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LoadError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Raised when a box that should contain the query is decoded into a rule
// that admits no value of some attribute.
class InconsistencyError : public Error {
 public:
  using Error::Error;
};

// Exact precision of a box containing no points.
class UndefinedPrecisionError : public Error {
 public:
  UndefinedPrecisionError()
      : Error("precision is undefined: no points lie inside the box") {}
};

class ProviderError : public Error {
 public:
  ProviderError(const std::string& what, std::size_t point_index)
      : Error(what + " (point " + std::to_string(point_index) + ")"),
        point_index_(point_index) {}

  std::size_t point_index() const { return point_index_; }

 private:
  std::size_t point_index_;
};

}  // namespace maire
