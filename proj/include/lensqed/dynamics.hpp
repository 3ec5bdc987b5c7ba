// Population dynamics of two emitters in the symmetric/antisymmetric basis.
#pragma once

#include "lensqed/collective.hpp"

namespace lensqed::dynamics {

using collective::CollectiveRates;

struct TwoAtomState {
  double rho22 = 0.0;  // |22>, both excited
  double rho_ss = 0.0;
  double rho_aa = 0.0;
  double rho11 = 1.0;  // |11>, both in the ground state

  static TwoAtomState doubly_excited() { return {1.0, 0.0, 0.0, 0.0}; }
  // |21> = (|s> + |a>)/sqrt(2)
  static TwoAtomState one_excited() { return {0.0, 0.5, 0.5, 0.0}; }
  static TwoAtomState ground() { return {}; }

  double trace() const { return rho22 + rho_ss + rho_aa + rho11; }
  void validate(double tol = 1e-12) const;
};

struct CollectiveModes {
  double gamma_s = 0.0;
  double gamma_a = 0.0;
  double shift_s = 0.0;  // -delta_omega
  double shift_a = 0.0;  // +delta_omega
};

// Throws DomainError unless gamma22 == gamma11 (relative 1e-6) and the rate
// matrix is positive semidefinite.
void check_rates(const CollectiveRates& rates);

CollectiveModes collective_modes(const CollectiveRates& rates);

// Closed-form solution at time t (units 1/Gamma0).
TwoAtomState evolve(const TwoAtomState& initial, const CollectiveRates& rates, double t);

TwoAtomState steady_state(const CollectiveRates& rates, const TwoAtomState& initial);

struct ProtocolOutcome {
  double success_probability = 0.0;  // rho_aa(t_wait)
  double fidelity = 0.0;             // rho_aa / (rho_aa + rho_ss)
  TwoAtomState state;
};

// Starts from |21>, waits t_wait, postselects on the antisymmetric state.
ProtocolOutcome entanglement_protocol(const CollectiveRates& rates, double t_wait);

}  // namespace lensqed::dynamics
