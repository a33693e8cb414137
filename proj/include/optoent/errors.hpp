#pragma once

#include <stdexcept>
#include <string>

namespace optoent {

/// Scenario or parameter set violates a physical or schema invariant.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Drift matrix has no stable steady state, or a trajectory blew up.
class UnstableError : public std::runtime_error {
 public:
  UnstableError(const std::string& what, double margin, double time = 0.0)
      : std::runtime_error(what), margin_(margin), time_(time) {}
  double margin() const noexcept { return margin_; }
  double time() const noexcept { return time_; }

 private:
  double margin_;
  double time_;
};

/// Iterative solve or step-size control failed to reach tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace optoent
