#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qml {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CycleError : public Error {
 public:
  using Error::Error;
};

class UnknownVertex : public Error {
 public:
  explicit UnknownVertex(int id)
      : Error("unknown vertex id " + std::to_string(id)), id_(id) {}
  int id() const { return id_; }

 private:
  int id_;
};

class UnknownArrow : public Error {
 public:
  explicit UnknownArrow(int id) : Error("unknown arrow id " + std::to_string(id)) {}
};

class PathLimitExceeded : public Error {
 public:
  using Error::Error;
};

class EmptyModuli : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class SingularGauge : public Error {
 public:
  using Error::Error;
};

class SingularBasisPart : public Error {
 public:
  using Error::Error;
};

class DomainSamplingFailed : public Error {
 public:
  using Error::Error;
};

/// The quadratic form at `vertex` cannot be inverted.
class SingularForm : public Error {
 public:
  SingularForm(int vertex, const std::string& what)
      : Error(what), vertex_(vertex) {}
  int vertex() const { return vertex_; }

 private:
  int vertex_;
};

class OutOfDomain : public Error {
 public:
  using Error::Error;
};

class NonPositive : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

class NonDifferentiable : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t position, const std::string& what)
      : Error(what + " at position " + std::to_string(position)),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

class TypeError : public Error {
 public:
  using Error::Error;
};

class UnknownSymbol : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace qml
