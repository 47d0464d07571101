#pragma once

#include <stdexcept>
#include <string>

namespace resonomatch {

// Base of every error raised by the library. The CLI maps the concrete
// types onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Violated geometry invariant, interval outside a family's support, or a
// malformed argument.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Frequency outside the single-mode band (sqrt(lambda_1), sqrt(lambda_2)).
class BandError : public Error {
 public:
  using Error::Error;
};

// Resonator axial coefficient tau_n = beta cot(beta a) hit a pole, i.e. k is
// an eigenfrequency of the closed resonator.
class SingularFrequencyError : public Error {
 public:
  SingularFrequencyError(const std::string& what, int mode)
      : Error(what), mode_(mode) {}

  // 1-based resonator mode index whose coefficient is singular.
  int mode() const noexcept { return mode_; }

 private:
  int mode_;
};

class NotSpdError : public Error {
 public:
  using Error::Error;
};

// Channel reduction matrix I + S G is numerically singular.
class NearSingularReductionError : public Error {
 public:
  using Error::Error;
};

class NoResonanceError : public Error {
 public:
  using Error::Error;
};

// Finite-difference grid too coarse for the aperture.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

// Truncated guide too short for the omitted radiation modes to be negligible.
class GuideLengthError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace resonomatch
