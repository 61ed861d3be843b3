#pragma once

#include <stdexcept>
#include <string>

namespace fiberpeel {

/// Base class of all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or invalid model input. `field` holds the config path when known.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message, std::string field = {})
      : Error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Degenerate geometry (zero tangent, non-positive separation, ...).
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// A force provider produced NaN or inf.
class NonFiniteError : public Error {
 public:
  NonFiniteError(const std::string& provider, const std::string& detail)
      : Error("non-finite contribution from '" + provider + "'" + (detail.empty() ? "" : ": " + detail)),
        provider_(provider) {}
  const std::string& provider() const noexcept { return provider_; }

 private:
  std::string provider_;
};

class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& message, double last_residual)
      : Error(message), last_residual_(last_residual) {}
  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

class SingularTangent : public Error {
 public:
  using Error::Error;
};

class MaxTimeExceeded : public Error {
 public:
  using Error::Error;
};

}  // namespace fiberpeel
