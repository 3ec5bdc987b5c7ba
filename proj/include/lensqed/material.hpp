#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lensqed/types.hpp"

namespace lensqed::material {

// One Lorentz oscillator: strength f (dimensionless), resonance omega_r and
// damping gamma, both in units of omega0.
struct LorentzTerm {
  double strength = 0.0;
  double resonance = 1.0;
  double damping = 0.0;

  bool operator==(const LorentzTerm&) const = default;
};

// background + sum_j f_j w_j^2 / (w_j^2 - w^2 - i g_j w)
//
// Every term is passive (f >= 0, g >= 0) and analytic in the upper half
// plane, so the model is causal by construction.
class LorentzModel {
public:
  LorentzModel() = default;
  explicit LorentzModel(std::vector<LorentzTerm> terms, double background = 1.0);

  static LorentzModel vacuum() { return {}; }

  const std::vector<LorentzTerm>& terms() const noexcept { return terms_; }
  double background() const noexcept { return background_; }
  bool empty() const noexcept { return terms_.empty(); }

  bool operator==(const LorentzModel&) const = default;

private:
  std::vector<LorentzTerm> terms_;
  double background_ = 1.0;
};

cplx evaluate_response(const LorentzModel& model, double omega);

// sqrt(eps*mu) on the causal branch: Im n >= 0, and for a lossless
// left-handed point (Re eps < 0 and Re mu < 0) the negative root.
cplx refractive_index(cplx eps, cplx mu);

bool is_left_handed(cplx eps, cplx mu);

// Response of the slab medium at a single frequency.
struct MaterialPoint {
  cplx eps{1.0, 0.0};
  cplx mu{1.0, 0.0};

  bool lossless() const noexcept { return eps.imag() == 0.0 && mu.imag() == 0.0; }
  bool left_handed() const noexcept { return is_left_handed(eps, mu); }
  cplx index() const { return refractive_index(eps, mu); }
  bool is_vacuum() const noexcept { return eps == cplx{1.0} && mu == cplx{1.0}; }
};

// Slab medium: either a fixed (eps, mu) pair, used as the response at every
// frequency, or a dispersive Lorentz pair.
class SlabMaterial {
public:
  static SlabMaterial constant(cplx eps, cplx mu);
  // eps = mu = n: impedance matched to vacuum at normal incidence.
  static SlabMaterial index_matched(cplx n);
  static SlabMaterial ideal_lens() { return index_matched(cplx{-1.0, 0.0}); }
  static SlabMaterial vacuum() { return constant(1.0, 1.0); }
  static SlabMaterial dispersive(LorentzModel eps, LorentzModel mu);

  MaterialPoint at(double omega) const;
  bool is_dispersive() const noexcept { return dispersive_; }
  const LorentzModel& eps_model() const noexcept { return eps_model_; }
  const LorentzModel& mu_model() const noexcept { return mu_model_; }
  const MaterialPoint& fixed_point() const noexcept { return fixed_; }

private:
  bool dispersive_ = false;
  MaterialPoint fixed_;
  LorentzModel eps_model_;
  LorentzModel mu_model_;
};

using ResponseFunction = std::function<cplx(double)>;

struct PositivityReport {
  bool pass = false;
  // min over the grid of d(omega Re eps)/d omega and d(omega Re mu)/d omega
  double margin = 0.0;
  double omega_at_margin = 0.0;
};

// Centered-difference sweep of d(omega Re eps)/d omega and the same for mu on
// [omega_lo, omega_hi]. step > 1e-3 is rejected as too coarse.
PositivityReport energy_positivity_check(const ResponseFunction& eps, const ResponseFunction& mu,
                                         double omega_lo, double omega_hi, double step = 1e-3);
PositivityReport energy_positivity_check(const LorentzModel& eps, const LorentzModel& mu,
                                         double omega_lo, double omega_hi, double step = 1e-3);

struct IndexPoint {
  cplx n;
  double slope = 0.0;  // Re dn/d omega, units 1/omega0
};

// Re dn/d omega at omega by centered differences with step h, checked against
// h/2 (relative agreement 1e-3) and Richardson-extrapolated.
double dispersion_slope(const LorentzModel& eps, const LorentzModel& mu, double omega = omega0,
                        double h = 1e-4);
IndexPoint index_point(const LorentzModel& eps, const LorentzModel& mu, double omega = omega0);

struct FitOptions {
  // Used when the target index is real; a lossy target solves for damping.
  double damping = 1e-6;
  double background = 1.0;
  int max_iterations = 100;
};

struct LensFit {
  LorentzModel eps;
  LorentzModel mu;
  int iterations = 0;
  double residual = 0.0;
};

// Symmetric single-resonance models (eps = mu) with n(omega0) = n_target and
// Re dn/d omega = alpha_target, resonance below omega0. n_target = 1 with
// alpha_target = 0 returns the vacuum pair.
LensFit fit_lens_material(cplx n_target, double alpha_target, const FitOptions& options = {});

// Key/value block:
//   eps_background = 1
//   eps_terms = f,w,g; f,w,g
//   mu_background = 1
//   mu_terms = ...
std::map<std::string, std::string> to_config_block(const LorentzModel& eps, const LorentzModel& mu);
std::pair<LorentzModel, LorentzModel> from_config_block(const std::map<std::string, std::string>& block);

std::string format_terms(const std::vector<LorentzTerm>& terms);
std::vector<LorentzTerm> parse_terms(const std::string& text);

}  // namespace lensqed::material
