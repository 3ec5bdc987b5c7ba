// Exception hierarchy shared by all lensqed modules. The C API maps each
// family onto an lq_status code.
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace lensqed {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation (negative time,
// nonpositive frequency, emitter inside the slab, ...).
class DomainError : public Error {
public:
  using Error::Error;
};

// Invalid user configuration. Carries every violation found, not just the first.
class ConfigError : public Error {
public:
  explicit ConfigError(std::vector<std::string> violations);
  explicit ConfigError(const std::string& violation)
      : ConfigError(std::vector<std::string>{violation}) {}

  const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
  std::vector<std::string> violations_;
};

class NumericalError : public Error {
public:
  using Error::Error;
};

class QuadratureError : public NumericalError {
public:
  QuadratureError(const std::string& what, double achieved, double requested)
      : NumericalError(what), achieved_(achieved), requested_(requested) {}
  double achieved() const noexcept { return achieved_; }
  double requested() const noexcept { return requested_; }

private:
  double achieved_;
  double requested_;
};

// Evanescent integrand still above the truncation floor at the k_perp cap.
class TruncationError : public NumericalError {
public:
  TruncationError(const std::string& what, double kperp_cap)
      : NumericalError(what), kperp_cap_(kperp_cap) {}
  double kperp_cap() const noexcept { return kperp_cap_; }

private:
  double kperp_cap_;
};

// Vanishing Fresnel or slab denominator.
class PoleError : public NumericalError {
public:
  PoleError(const std::string& what, double kperp)
      : NumericalError(what), kperp_(kperp) {}
  double kperp() const noexcept { return kperp_; }

private:
  double kperp_;
};

class FitError : public NumericalError {
public:
  FitError(const std::string& what, double residual)
      : NumericalError(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

private:
  double residual_;
};

class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace lensqed
