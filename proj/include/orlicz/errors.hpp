#pragma once

#include <stdexcept>
#include <string>

namespace orlicz {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside a tabulated or representable range.
class RangeError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  DomainError(const std::string& what, double bound = 0.0) : Error(what), bound_(bound) {}
  double bound() const { return bound_; }

 private:
  double bound_;
};

// Result not representable as a double. log_value carries the natural log of
// the true result when it is known; partial marks a truncated computation.
class OverflowError : public Error {
 public:
  OverflowError(const std::string& what, double log_value, bool partial = false)
      : Error(what), log_value_(log_value), partial_(partial) {}
  double log_value() const { return log_value_; }
  bool partial() const { return partial_; }

 private:
  double log_value_;
  bool partial_;
};

class EvaluationError : public Error {
 public:
  EvaluationError(const std::string& what, double where) : Error(what), where_(where) {}
  double where() const { return where_; }

 private:
  double where_;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace orlicz
