#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace tiltlat {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class WindowTooNarrow : public Error {
 public:
  using Error::Error;
};

class ZeroTilt : public Error {
 public:
  ZeroTilt() : Error("operation requires a nonzero static tilt (dF > 0)") {}
  using Error::Error;
};

class OutOfRange : public Error {
 public:
  using Error::Error;
};

class BadTruncation : public Error {
 public:
  using Error::Error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class NotNormalized : public Error {
 public:
  using Error::Error;
};

class WindowTooShort : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class UnknownPreset : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Raised by the integrator's runtime guards. When the failing run belongs to
/// an ensemble the realization index is attached.
class NumericalGuard : public Error {
 public:
  explicit NumericalGuard(const std::string& what, std::optional<int> realization = std::nullopt)
      : Error(what), realization_(realization) {}

  [[nodiscard]] std::optional<int> realization() const noexcept { return realization_; }

 private:
  std::optional<int> realization_;
};

class EdgeContamination : public NumericalGuard {
 public:
  using NumericalGuard::NumericalGuard;
};

class StepUnstable : public NumericalGuard {
 public:
  using NumericalGuard::NumericalGuard;
};

}  // namespace tiltlat
