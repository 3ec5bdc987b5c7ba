// Two-emitter collective decay rates and dipole-dipole shift around a slab.
#pragma once

#include "lensqed/greens.hpp"

namespace lensqed::collective {

struct DipoleEmitter {
  Vec3 position = Vec3::Zero();
  Vec3 orientation = Vec3::UnitX();  // unit vector; the dipole magnitude is normalized out

  void validate() const;
};

// All rates in units of the free-space single-emitter rate.
struct CollectiveRates {
  double gamma11 = 1.0;
  double gamma22 = 1.0;
  double gamma12 = 0.0;
  double delta_omega = 0.0;

  // |gamma12| <= sqrt(gamma11 gamma22), gamma11, gamma22 > 0
  bool positive_semidefinite(double tol = 1e-12) const;
  bool operator==(const CollectiveRates&) const = default;
};

struct LensSetup {
  greens::SlabGeometry geometry;
  material::SlabMaterial material = material::SlabMaterial::ideal_lens();
  greens::QuadratureSpec quadrature;
};

// Emitter pair at the two foci of an n = -1 lens: (x, y, d/2) and its image
// (x, y, -3d/2).
std::pair<DipoleEmitter, DipoleEmitter> focal_pair(double thickness, const Vec3& orientation = Vec3::UnitX());

// Gamma_kl = d_k . Im G(r_k, r_l, omega0) . d_l / (k0 / 6 pi); delta_omega is left at 0.
CollectiveRates decay_rates(const DipoleEmitter& e1, const DipoleEmitter& e2, const LensSetup& lens);

// Gamma12/Gamma11 for two parallel dipoles in vacuum at the given separation.
double free_space_cross_rate(const Vec3& separation, const Vec3& orientation);

struct ShiftSpec {
  double omega_max = 10.0;  // frequency cutoff, units of omega0
  double window = 0.1;      // half-width of the subtraction window around omega0
  int initial_panels = 16;  // initial partition of each frequency segment
  double rel_tol = 1e-4;
  double abs_tol = 1e-7;
  greens::QuadratureSpec greens_quadrature{};

  void validate() const;
  ShiftSpec refined() const;
  bool operator==(const ShiftSpec&) const = default;
};

struct ShiftResult {
  double delta_omega = 0.0;  // units of the free-space rate
  double error = 0.0;
  double tail_bound = 0.0;   // estimate of the neglected omega > omega_max contribution
  int frequency_evaluations = 0;
};

// Principal value int_0^omega_max d omega omega^2 Im[d1 . dG(omega) . d2] / (omega - omega0)
// with dG the scattered tensor, normalized to the free-space rate.
ShiftResult dipole_dipole_shift(const DipoleEmitter& e1, const DipoleEmitter& e2, const greens::SlabGeometry& geom,
                                const material::SlabMaterial& material, const ShiftSpec& spec = {});

struct MarkovValidity {
  double ratio = 0.0;  // photon travel time d/c over the radiative lifetime 1/Gamma11
  bool valid = true;
};

MarkovValidity markov_validity(double distance, double gamma11, double threshold = 0.1);

// Gamma12/Gamma11 at the foci of an ideal lens of radius a and thickness d,
// from the restricted propagating range xi = k_z/k in [xi_min, 1].
double aperture_rate_ratio(double radius, double thickness);

}  // namespace lensqed::collective
