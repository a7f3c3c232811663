#pragma once

#include <stdexcept>
#include <string>

namespace berry {

// Base class for every error raised by the library. Subclasses mirror the
// failure categories callers need to distinguish (bad input vs. bad config
// vs. numerical trouble).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

class ResourceError : public Error {
 public:
  using Error::Error;
};

class NormalizationError : public Error {
 public:
  using Error::Error;
};

class DiagnosticError : public Error {
 public:
  using Error::Error;
};

// Adaptive quadrature failed to reach its tolerance; carries the achieved
// error estimate.
class AccuracyError : public Error {
 public:
  AccuracyError(const std::string& what, double achieved)
      : Error(what + " (achieved error estimate " + std::to_string(achieved) + ")"),
        achieved_(achieved) {}

  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

}  // namespace berry
