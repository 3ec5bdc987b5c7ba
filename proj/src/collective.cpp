#include "lensqed/collective.hpp"

#include <algorithm>
#include <cmath>

#include "lensqed/errors.hpp"
#include "numfmt.hpp"

namespace lensqed::collective {

using greens::GreensTensor;
using greens::Region;

namespace {

constexpr double kFreeSpaceSelf = 1.0 / (6.0 * pi);  // Im G0(r, r) at k0 = 1

double contract(const Vec3& a, const Eigen::Matrix3d& m, const Vec3& b) { return a.dot(m * b); }

bool vacuum_at_all_frequencies(const material::SlabMaterial& m) {
  if (!m.is_dispersive()) return m.fixed_point().is_vacuum();
  const auto trivial = [](const material::LorentzModel& l) { return l.empty() && l.background() == 1.0; };
  return trivial(m.eps_model()) && trivial(m.mu_model());
}

}  // namespace

void DipoleEmitter::validate() const {
  if (!position.allFinite()) throw DomainError("emitter position must be finite");
  if (!(std::abs(orientation.norm() - 1.0) < 1e-9)) throw DomainError("emitter orientation must be a unit vector");
}

bool CollectiveRates::positive_semidefinite(double tol) const {
  if (!(gamma11 > 0.0) || !(gamma22 > 0.0)) return false;
  return std::abs(gamma12) <= std::sqrt(gamma11 * gamma22) * (1.0 + tol);
}

std::pair<DipoleEmitter, DipoleEmitter> focal_pair(double thickness, const Vec3& orientation) {
  return {DipoleEmitter{Vec3(0.0, 0.0, 0.5 * thickness), orientation},
          DipoleEmitter{Vec3(0.0, 0.0, -1.5 * thickness), orientation}};
}

CollectiveRates decay_rates(const DipoleEmitter& e1, const DipoleEmitter& e2, const LensSetup& lens) {
  e1.validate();
  e2.validate();
  const auto& geom = lens.geometry;
  geom.validate();
  for (const auto* e : {&e1, &e2})
    if (geom.region_of(e->position.z()) == Region::slab)
      throw DomainError("emitter inside the slab region (z = " + format_g(e->position.z()) + ")");

  auto im = [&](const Vec3& r, const Vec3& rp) {
    return greens::greens_tensor(geom, lens.material, r, rp, omega0, lens.quadrature).imag();
  };
  CollectiveRates rates;
  rates.gamma11 = contract(e1.orientation, im(e1.position, e1.position), e1.orientation) / kFreeSpaceSelf;
  rates.gamma22 = contract(e2.orientation, im(e2.position, e2.position), e2.orientation) / kFreeSpaceSelf;
  rates.gamma12 = contract(e1.orientation, im(e1.position, e2.position), e2.orientation) / kFreeSpaceSelf;
  return rates;
}

double free_space_cross_rate(const Vec3& separation, const Vec3& orientation) {
  if (!(std::abs(orientation.norm() - 1.0) < 1e-9)) throw DomainError("orientation must be a unit vector");
  const auto g = greens::greens_free_space(separation, Vec3::Zero(), omega0, greens::FreeSpacePart::imaginary_only);
  return contract(orientation, g.imag(), orientation) / kFreeSpaceSelf;
}

void ShiftSpec::validate() const {
  if (!(omega_max > omega0 + window)) throw ConfigError("shift omega_max must exceed omega0 + window");
  if (!(window > 0.0) || !(window < omega0)) throw ConfigError("shift window must lie in (0, omega0)");
  if (initial_panels < 1) throw ConfigError("shift initial_panels must be >= 1");
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw ConfigError("shift tolerances must be > 0");
  greens_quadrature.validate();
}

ShiftSpec ShiftSpec::refined() const {
  ShiftSpec s = *this;
  s.initial_panels *= 2;
  s.rel_tol *= 0.5;
  s.abs_tol *= 0.5;
  return s;
}

ShiftResult dipole_dipole_shift(const DipoleEmitter& e1, const DipoleEmitter& e2, const greens::SlabGeometry& geom,
                                const material::SlabMaterial& material, const ShiftSpec& spec) {
  e1.validate();
  e2.validate();
  geom.validate();
  spec.validate();
  for (const auto* e : {&e1, &e2})
    if (geom.region_of(e->position.z()) == Region::slab)
      throw DomainError("emitter inside the slab region (z = " + format_g(e->position.z()) + ")");

  ShiftResult out;
  if (vacuum_at_all_frequencies(material)) return out;

  // 3 omega^2 Im[d1 . dG . d2]; the factor 3 converts to units of the free-space rate.
  auto weight = [&](double omega) {
    ++out.frequency_evaluations;
    const auto dg = greens::greens_scattered(geom, material, e1.position, e2.position, omega, spec.greens_quadrature);
    return 3.0 * omega * omega * contract(e1.orientation, dg.imag(), e2.orientation);
  };
  const double f0 = weight(omega0);

  std::vector<double> resonances;
  if (material.is_dispersive())
    for (const auto* m : {&material.eps_model(), &material.mu_model()})
      for (const auto& t : m->terms()) resonances.push_back(t.resonance);

  greens::QuadratureSpec q;
  q.rel_tol = spec.rel_tol;
  q.abs_tol = spec.abs_tol;
  q.max_intervals = 4000;

  auto segment = [&](double a, double b, auto&& f) {
    std::vector<double> breaks;
    for (int i = 0; i <= spec.initial_panels; ++i)
      breaks.push_back(a + (b - a) * static_cast<double>(i) / spec.initial_panels);
    for (double w : resonances)
      if (w > a && w < b) breaks.push_back(w);
    std::sort(breaks.begin(), breaks.end());
    const auto r = greens::integrate_adaptive(f, std::span<const double>(breaks), q);
    out.error += r.error;
    return r.value;
  };

  const double lo = omega0 - spec.window;
  const double hi = omega0 + spec.window;
  auto outer = [&](double w) { return weight(w) / (w - omega0); };
  // Inside the window F(omega0)/(omega - omega0) integrates to zero in the
  // principal-value sense, leaving a removable singularity.
  auto inner = [&](double w) { return (weight(w) - f0) / (w - omega0); };

  double total = segment(0.0, lo, outer);
  total += segment(lo, omega0, inner);
  total += segment(omega0, hi, inner);
  total += segment(hi, spec.omega_max, outer);
  out.delta_omega = total;

  const double f_end = weight(spec.omega_max);
  out.tail_bound = std::abs(f_end) * spec.omega_max / (spec.omega_max - omega0);
  if (out.tail_bound > std::max(10.0 * spec.abs_tol, 0.05 * std::abs(total)))
    throw NumericalError("shift integrand not converged at omega_max = " + format_g(spec.omega_max) +
                         " (tail estimate " + format_g(out.tail_bound) + ")");
  return out;
}

MarkovValidity markov_validity(double distance, double gamma11, double threshold) {
  if (!(distance > 0.0)) throw DomainError("Markov check needs distance > 0");
  if (!(gamma11 >= 0.0)) throw DomainError("Markov check needs gamma11 >= 0");
  const double ratio = distance * gamma11;  // c = 1
  return {ratio, ratio < threshold};
}

double aperture_rate_ratio(double radius, double thickness) {
  if (!(radius > 0.0) || !(thickness > 0.0)) throw DomainError("aperture ratio needs a > 0 and d > 0");
  if (std::isinf(radius)) return 1.0;
  const double r = radius / thickness;
  const double xi_min = 1.0 / std::sqrt(1.0 + 4.0 * r * r);
  return 0.75 * ((1.0 - xi_min) + (1.0 - xi_min * xi_min * xi_min) / 3.0);
}

}  // namespace lensqed::collective
