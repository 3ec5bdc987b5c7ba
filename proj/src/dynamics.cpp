#include "lensqed/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "lensqed/errors.hpp"
#include "numfmt.hpp"

namespace lensqed::dynamics {

namespace {

// (exp(-a t) - exp(-b t)) / (b - a), finite as b -> a
double cascade(double a, double b, double t) {
  const double x = (b - a) * t;
  const double phi = std::abs(x) < 1e-300 ? 1.0 : -std::expm1(-x) / x;
  return t * std::exp(-a * t) * phi;
}

}  // namespace

void TwoAtomState::validate(double tol) const {
  for (double p : {rho22, rho_ss, rho_aa, rho11})
    if (!(p >= -tol && p <= 1.0 + tol)) throw DomainError("population outside [0, 1]: " + format_g(p));
  if (!(std::abs(trace() - 1.0) <= tol)) throw DomainError("populations do not sum to 1 (" + format_exact(trace()) + ")");
}

void check_rates(const CollectiveRates& rates) {
  if (!(std::abs(rates.gamma22 - rates.gamma11) <= 1e-6 * std::abs(rates.gamma11)))
    throw DomainError("population equations need gamma22 == gamma11 (got " + format_g(rates.gamma11) + ", " +
                      format_g(rates.gamma22) + ")");
  if (!rates.positive_semidefinite(1e-12)) throw DomainError("rate matrix is not positive semidefinite");
}

CollectiveModes collective_modes(const CollectiveRates& rates) {
  check_rates(rates);
  CollectiveModes m;
  m.gamma_s = rates.gamma11 + rates.gamma12;
  m.gamma_a = std::max(0.0, rates.gamma11 - rates.gamma12);
  m.shift_s = -rates.delta_omega;
  m.shift_a = rates.delta_omega;
  return m;
}

TwoAtomState evolve(const TwoAtomState& initial, const CollectiveRates& rates, double t) {
  if (!(t >= 0.0)) throw DomainError("evolution time must be >= 0");
  initial.validate(1e-9);
  const auto m = collective_modes(rates);
  const double g2 = 2.0 * rates.gamma11;
  TwoAtomState s;
  s.rho22 = initial.rho22 * std::exp(-g2 * t);
  s.rho_ss = initial.rho_ss * std::exp(-m.gamma_s * t) + m.gamma_s * initial.rho22 * cascade(m.gamma_s, g2, t);
  s.rho_aa = initial.rho_aa * std::exp(-m.gamma_a * t) + m.gamma_a * initial.rho22 * cascade(m.gamma_a, g2, t);
  s.rho11 = 1.0 - s.rho22 - s.rho_ss - s.rho_aa;
  return s;
}

TwoAtomState steady_state(const CollectiveRates& rates, const TwoAtomState& initial) {
  initial.validate(1e-9);
  const auto m = collective_modes(rates);
  TwoAtomState s{0.0, 0.0, 0.0, 1.0};
  if (m.gamma_s == 0.0) s.rho_ss = initial.rho_ss;
  if (m.gamma_a == 0.0) s.rho_aa = initial.rho_aa;
  s.rho11 = 1.0 - s.rho_ss - s.rho_aa;
  return s;
}

ProtocolOutcome entanglement_protocol(const CollectiveRates& rates, double t_wait) {
  if (!(t_wait >= 0.0)) throw DomainError("protocol waiting time must be >= 0");
  ProtocolOutcome out;
  out.state = evolve(TwoAtomState::one_excited(), rates, t_wait);
  out.success_probability = out.state.rho_aa;
  const double excited = out.state.rho_aa + out.state.rho_ss;
  out.fidelity = excited > 0.0 ? out.state.rho_aa / excited : 0.0;
  return out;
}

}  // namespace lensqed::dynamics
