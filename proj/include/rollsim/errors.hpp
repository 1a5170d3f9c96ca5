#pragma once

#include <stdexcept>
#include <string>

namespace rollsim {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point or path left the valid domain of a chart (e.g. y <= 0 on the half-plane).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what, double time = -1.0)
      : Error(what), time_(time) {}
  /// Integration time at which the violation happened, or -1 when not applicable.
  double time() const noexcept { return time_; }

 private:
  double time_;
};

class UnsupportedBackend : public Error {
 public:
  using Error::Error;
};

class DegenerateFrame : public Error {
 public:
  using Error::Error;
};

/// Invalid numeric parameter (non-positive window, bad dimension, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Query time outside the sampled grid.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Stieltjes integration requested against an integrator with a martingale part.
class WrongIntegralKind : public Error {
 public:
  using Error::Error;
};

/// Horizontal lift could not invert the one-step development map.
class StepSizeError : public Error {
 public:
  using Error::Error;
};

/// Jump intensity overflows double precision for the requested scale.
class SaturationError : public Error {
 public:
  SaturationError(const std::string& what, double eps_floor)
      : Error(what), eps_floor_(eps_floor) {}
  double eps_floor() const noexcept { return eps_floor_; }

 private:
  double eps_floor_;
};

class NonIntegrable : public Error {
 public:
  using Error::Error;
};

/// Configuration or I/O problem (maps to CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace rollsim
