#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace akm {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression text. `offset` is the byte offset of the offending token.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// An expression was evaluated outside its natural domain.
class DomainError : public Error {
 public:
  DomainError(const std::string& what, std::string subexpr)
      : Error(what + " in '" + subexpr + "'"), subexpr_(std::move(subexpr)) {}
  const std::string& subexpression() const noexcept { return subexpr_; }

 private:
  std::string subexpr_;
};

/// A finite-difference stencil does not fit inside the chart domain.
class BoundaryError : public Error {
 public:
  using Error::Error;
};

/// Metric is singular or too badly conditioned to invert.
class DegenerateMetricError : public Error {
 public:
  using Error::Error;
};

/// Two vectors do not span a plane.
class DegeneratePlaneError : public Error {
 public:
  using Error::Error;
};

/// Numerical procedure failed (non-finite state, eigen-solver failure).
class NumericError : public Error {
 public:
  using Error::Error;
};

/// An invariant that must hold by construction was violated.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// Invalid model parameters, sample plans or command-line configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace akm
