#pragma once

#include <stdexcept>
#include <string>

namespace mfglq {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent problem description.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An operation was called outside the hypotheses it is defined for.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A positivity hypothesis (the 𝓡-type matrices must be positive definite)
/// failed while integrating. `time()` is the grid node where it was detected.
class SolvabilityError : public Error {
 public:
  SolvabilityError(const std::string& what, double time, std::string clause)
      : Error(what), time_(time), clause_(std::move(clause)) {}
  double time() const noexcept { return time_; }
  const std::string& clause() const noexcept { return clause_; }

 private:
  double time_;
  std::string clause_;
};

/// Non-finite values appeared in an integration.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, double time) : Error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace mfglq
