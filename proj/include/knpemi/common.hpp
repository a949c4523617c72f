#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace knpemi {

using Index = std::int32_t;

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(const Point2&, const Point2&) = default;
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }

/// Base for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input: scenario files, geometry, parameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Solver non-convergence, integrator failure, unphysical states.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// File system failures; the message names the path.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A physical law evaluated outside its domain (e.g. log of a nonpositive
/// concentration).
class DomainError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace knpemi
