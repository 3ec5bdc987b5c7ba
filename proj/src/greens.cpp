#include "lensqed/greens.hpp"

#include <cmath>

#include "lensqed/errors.hpp"
#include "numfmt.hpp"

namespace lensqed::greens {

using material::MaterialPoint;
using material::SlabMaterial;

void SlabGeometry::validate() const {
  if (!(thickness > 0.0) || !std::isfinite(thickness)) throw DomainError("slab thickness must be finite and > 0");
  if (aperture_radius && !(*aperture_radius > 0.0)) throw DomainError("aperture radius must be > 0");
}

Region SlabGeometry::region_of(double z) const noexcept {
  if (z > 0.0) return Region::above;
  if (z < -thickness) return Region::below;
  return Region::slab;
}

cplx longitudinal_wavenumber(cplx k2, double kperp, bool left_handed) {
  cplx kz = std::sqrt(k2 - kperp * kperp);
  if (kz.imag() < 0.0) kz = -kz;
  if (kz.imag() == 0.0) {
    if ((left_handed && kz.real() > 0.0) || (!left_handed && kz.real() < 0.0)) kz = -kz;
  }
  return kz;
}

PlaneWaveMode plane_wave_mode(double k, const MaterialPoint& slab, double kperp, Polarization pol) {
  if (kperp < 0.0) throw DomainError("k_perp must be >= 0");
  const bool lh = slab.left_handed();
  return {kperp, longitudinal_wavenumber(cplx{k * k}, kperp, false),
          longitudinal_wavenumber(slab.eps * slab.mu * (k * k), kperp, lh), pol, lh ? -1 : +1};
}

std::pair<Eigen::Vector3cd, Eigen::Vector3cd> polarization_vectors(double kx, double ky, cplx kz, double k,
                                                                   int handedness) {
  const double kp = std::hypot(kx, ky);
  if (kp == 0.0) throw DomainError("polarization vectors undefined at k_perp = 0");
  Eigen::Vector3cd e(ky / kp, -kx / kp, 0.0);
  const Eigen::Vector3cd kvec(kx, ky, kz);
  // e x k
  Eigen::Vector3cd h(e[1] * kvec[2] - e[2] * kvec[1], e[2] * kvec[0] - e[0] * kvec[2],
                     e[0] * kvec[1] - e[1] * kvec[0]);
  h *= static_cast<double>(handedness) / k;
  return {e, h};
}

InterfaceCoefficients fresnel_interface(cplx eps_i, cplx mu_i, cplx eps_j, cplx mu_j, cplx kiz, cplx kjz,
                                        double kperp) {
  auto ratio = [&](cplx ai, cplx aj) {
    const cplx num = aj * kiz - ai * kjz;
    const cplx den = aj * kiz + ai * kjz;
    const double scale = std::abs(aj * kiz) + std::abs(ai * kjz);
    if (std::abs(den) <= 1e-14 * scale || scale == 0.0)
      throw PoleError("interface denominator vanishes at k_perp = " + format_g(kperp, 12), kperp);
    return num / den;
  };
  return {ratio(mu_i, mu_j), ratio(eps_i, eps_j)};
}

namespace {

// Slab response written with the interface numerators N = a kz - k1z and
// denominators D = a kz + k1z (a = mu for TE, eps for TM), which stays finite
// where a single interface is singular (D = 0 on the evanescent branch of the
// ideal lens). For a slab in vacuum N12 = -N01 and D12 = D01, so
//   R      = N D (1 - E) / (D^2 - N^2 E)
//   T e^{-i k1z d} e^{i kz d} = (D^2 - N^2) / (D^2 - N^2 E),   E = e^{2 i k1z d}.
struct PolarizedSlab {
  cplx reflection;
  cplx transmission_reduced;
  double denominator;  // |D^2 - N^2 E| / (|D|^2 + |N|^2 |E|)
};

PolarizedSlab polarized_slab(cplx a, cplx kz, cplx k1z, cplx e2) {
  const cplx num = a * kz - k1z;
  const cplx den = a * kz + k1z;
  const cplx slab_den = den * den - num * num * e2;
  const double scale = std::norm(den) + std::norm(num) * std::abs(e2);
  PolarizedSlab out;
  out.denominator = scale > 0.0 ? std::abs(slab_den) / scale : 0.0;
  out.reflection = num * den * (1.0 - e2) / slab_den;
  out.transmission_reduced = (den * den - num * num) / slab_den;
  return out;
}

struct SlabAtKperp {
  PolarizedSlab te, tm;
  cplx k1z;
};

SlabAtKperp slab_at(const MaterialPoint& slab, double k, double d, double kperp, cplx kz) {
  const cplx k1z = longitudinal_wavenumber(slab.eps * slab.mu * (k * k), kperp, slab.left_handed());
  const cplx e2 = std::exp(cplx{0.0, 2.0} * k1z * d);
  return {polarized_slab(slab.mu, kz, k1z, e2), polarized_slab(slab.eps, kz, k1z, e2), k1z};
}

double pole_measure(const MaterialPoint& slab, double k, double d, double kperp) {
  const cplx kz = longitudinal_wavenumber(cplx{k * k}, kperp);
  const auto s = slab_at(slab, k, d, kperp, kz);
  return std::min(s.te.denominator, s.tm.denominator);
}

constexpr double kPoleThreshold = 1e-12;

}  // namespace

SlabCoefficients slab_coefficients(const SlabGeometry& geom, const MaterialPoint& slab, double omega,
                                   double kperp) {
  geom.validate();
  if (!(omega > 0.0)) throw DomainError("frequency must be > 0");
  if (kperp < 0.0) throw DomainError("k_perp must be >= 0");
  const double k = omega;
  const double d = geom.thickness;
  const cplx kz = longitudinal_wavenumber(cplx{k * k}, kperp);
  const auto s = slab_at(slab, k, d, kperp, kz);
  if (!(std::min(s.te.denominator, s.tm.denominator) >= kPoleThreshold))
    throw PoleError("slab denominator 1 + R01 R12 exp(2 i k1z d) vanishes at k_perp = " + format_g(kperp, 12),
                    kperp);
  const cplx phase = std::exp(cplx{0.0, 1.0} * (s.k1z - kz) * d);
  return {s.te.reflection, s.tm.reflection, s.te.transmission_reduced * phase, s.tm.transmission_reduced * phase};
}

double aperture_cutoff(double radius, double thickness, double k) {
  if (!(radius > 0.0) || !(thickness > 0.0)) throw DomainError("aperture radius and thickness must be > 0");
  if (std::isinf(radius)) return k;
  const double ratio = radius / thickness;
  return k * ratio / std::sqrt(0.25 + ratio * ratio);
}

namespace detail {

Tensor3 azimuthal_tensor(double kperp, cplx kz, double k, double rho, double phi0, int s_field, int s_source,
                         cplx a_te, cplx a_tm) {
  const double x = kperp * rho;
  const double j0 = std::cyl_bessel_j(0.0, x);
  const double j1 = x == 0.0 ? 0.0 : std::cyl_bessel_j(1.0, x);
  const double j2 = x == 0.0 ? 0.0 : std::cyl_bessel_j(2.0, x);
  const double c2 = std::cos(2.0 * phi0), s2 = std::sin(2.0 * phi0);
  const double c1 = std::cos(phi0), s1 = std::sin(phi0);

  const double i_cc = pi * (j0 - j2 * c2);
  const double i_ss = pi * (j0 + j2 * c2);
  const double i_cs = -pi * j2 * s2;
  const cplx i_c{0.0, 2.0 * pi * j1 * c1};
  const cplx i_s{0.0, 2.0 * pi * j1 * s1};
  const double i_1 = 2.0 * pi * j0;

  const double sf = s_field, ss = s_source;
  const cplx tm = a_tm / (k * k);
  const cplx kz2 = sf * ss * kz * kz;

  Tensor3 t;
  t(0, 0) = a_te * i_ss + tm * kz2 * i_cc;
  t(1, 1) = a_te * i_cc + tm * kz2 * i_ss;
  t(0, 1) = t(1, 0) = -a_te * i_cs + tm * kz2 * i_cs;
  t(0, 2) = -tm * sf * kz * kperp * i_c;
  t(2, 0) = -tm * ss * kz * kperp * i_c;
  t(1, 2) = -tm * sf * kz * kperp * i_s;
  t(2, 1) = -tm * ss * kz * kperp * i_s;
  t(2, 2) = tm * kperp * kperp * i_1;
  return t;
}

}  // namespace detail

namespace {

const cplx kPrefactor{0.0, 1.0 / (8.0 * pi * pi)};

struct Transverse {
  double rho;
  double phi0;
};

Transverse transverse_offset(const Vec3& r, const Vec3& rp) {
  const double dx = r.x() - rp.x(), dy = r.y() - rp.y();
  const double rho = std::hypot(dx, dy);
  return {rho, rho == 0.0 ? 0.0 : std::atan2(dy, dx)};
}

void require_frequency(double omega) {
  if (!(omega > 0.0) || !std::isfinite(omega)) throw DomainError("frequency must be finite and > 0");
}

SommerfeldSetup setup_for(double k, const QuadratureSpec& quad) {
  SommerfeldSetup s;
  s.k = k;
  s.propagating_limit = k;
  s.evanescent = true;
  s.evanescent_cap = quad.evanescent_cap * std::max(k, 1.0);
  return s;
}

// The ideal-lens (lossless left-handed) evanescent spectrum carries no
// imaginary part but grows like exp(2 q d); it is excluded.
bool lossless_lens(const MaterialPoint& m) { return m.lossless() && m.left_handed(); }

}  // namespace

GreensTensor greens_free_space(const Vec3& r, const Vec3& rp, double omega, FreeSpacePart part) {
  require_frequency(omega);
  const double k = omega;
  const Vec3 sep = r - rp;
  const double dist = sep.norm();
  const double u = k * dist;

  GreensTensor g;
  g.field = r;
  g.source = rp;
  g.omega = omega;
  g.regions = RegionPair::free_space;

  double tr, lo;  // normalized transverse and longitudinal Im parts
  if (u < 1e-2) {
    const double u2 = u * u;
    tr = 1.0 - u2 / 5.0 + 3.0 * u2 * u2 / 280.0 - u2 * u2 * u2 / 3780.0;
    lo = 1.0 - u2 / 10.0 + u2 * u2 / 280.0 - u2 * u2 * u2 / 15120.0;
  } else {
    const double su = std::sin(u), cu = std::cos(u);
    tr = 1.5 * (su / u + cu / (u * u) - su / (u * u * u));
    lo = 3.0 * (-cu / (u * u) + su / (u * u * u));
  }
  Eigen::Matrix3d rr = Eigen::Matrix3d::Zero();
  if (dist > 0.0) {
    const Vec3 n = sep / dist;
    rr = n * n.transpose();
  }
  const Eigen::Matrix3d im = (k / (6.0 * pi)) * (tr * Eigen::Matrix3d::Identity() + (lo - tr) * rr);

  if (dist == 0.0) {
    if (part == FreeSpacePart::full)
      throw DomainError("real part of the free-space Green's tensor is singular at coincident points");
    g.value = im.cast<cplx>() * cplx{0.0, 1.0};
    g.real_part_complete = false;
    return g;
  }
  if (part == FreeSpacePart::imaginary_only) {
    g.value = im.cast<cplx>() * cplx{0.0, 1.0};
    g.real_part_complete = false;
    return g;
  }
  const cplx ph = std::exp(cplx{0.0, u}) / (4.0 * pi * dist);
  const cplx a = ph * (1.0 + cplx{0.0, 1.0} / u - 1.0 / (u * u));
  const cplx b = ph * (-1.0 - cplx{0.0, 3.0} / u + 3.0 / (u * u));
  Eigen::Matrix3d re = a.real() * Eigen::Matrix3d::Identity() + b.real() * rr;
  g.value.real() = re;
  g.value.imag() = im;
  return g;
}

GreensTensor greens_same_side(const SlabGeometry& geom, const SlabMaterial& material, const Vec3& r,
                              const Vec3& rp, double omega, const QuadratureSpec& quad) {
  geom.validate();
  require_frequency(omega);
  if (geom.region_of(r.z()) != Region::above || geom.region_of(rp.z()) != Region::above)
    throw DomainError("greens_same_side needs both points above the slab (z > 0)");

  const double k = omega;
  const double d = geom.thickness;
  const MaterialPoint slab = material.at(omega);
  const auto tr = transverse_offset(r, rp);
  const double zsum = r.z() + rp.z();

  const bool coincident = (r - rp).norm() == 0.0;
  GreensTensor g = greens_free_space(r, rp, omega, coincident ? FreeSpacePart::imaginary_only : FreeSpacePart::full);
  g.regions = RegionPair::same_side;
  if (slab.is_vacuum()) return g;

  auto kernel = [&](double kperp, cplx kz) -> Tensor3 {
    const auto s = slab_at(slab, k, d, kperp, kz);
    const cplx phase = std::exp(cplx{0.0, 1.0} * kz * zsum);
    return (kPrefactor * kperp / kz * phase) *
           detail::azimuthal_tensor(kperp, kz, k, tr.rho, tr.phi0, +1, -1, s.te.reflection, s.tm.reflection);
  };
  auto setup = setup_for(k, quad);
  if (quad.propagating_only || lossless_lens(slab)) {
    setup.evanescent = false;
    g.real_part_complete = false;
  } else {
    setup.pole_probe = [&](double kperp) { return pole_measure(slab, k, d, kperp); };
  }
  const auto reflected = sommerfeld_integrate(kernel, setup, quad);
  g.value += reflected.value;
  g.error += reflected.error;
  return g;
}

GreensTensor greens_transmitted(const SlabGeometry& geom, const SlabMaterial& material, const Vec3& r_below,
                                const Vec3& rp_above, double omega, const QuadratureSpec& quad) {
  geom.validate();
  require_frequency(omega);
  if (geom.region_of(r_below.z()) != Region::below || geom.region_of(rp_above.z()) != Region::above)
    throw DomainError("greens_transmitted needs the field point below (z < -d) and the source above (z > 0)");

  const double k = omega;
  const double d = geom.thickness;
  const MaterialPoint slab = material.at(omega);
  const auto tr = transverse_offset(r_below, rp_above);
  const double gap = rp_above.z() - r_below.z() - d;  // vacuum path length

  auto kernel = [&](double kperp, cplx kz) -> Tensor3 {
    const auto s = slab_at(slab, k, d, kperp, kz);
    const cplx phase = std::exp(cplx{0.0, 1.0} * (s.k1z * d + kz * gap));
    return (kPrefactor * kperp / kz * phase) *
           detail::azimuthal_tensor(kperp, kz, k, tr.rho, tr.phi0, -1, -1, s.te.transmission_reduced,
                                    s.tm.transmission_reduced);
  };
  auto setup = setup_for(k, quad);
  GreensTensor g;
  g.field = r_below;
  g.source = rp_above;
  g.omega = omega;
  g.regions = RegionPair::cross;
  if (geom.aperture_radius) {
    setup.propagating_limit = aperture_cutoff(*geom.aperture_radius, d, k);
    setup.evanescent = false;
    g.real_part_complete = false;
  } else if (quad.propagating_only || lossless_lens(slab)) {
    setup.evanescent = false;
    g.real_part_complete = false;
  } else {
    setup.pole_probe = [&](double kperp) { return pole_measure(slab, k, d, kperp); };
  }
  const auto res = sommerfeld_integrate(kernel, setup, quad);
  g.value = res.value;
  g.error = res.error;
  return g;
}

GreensTensor greens_cross(const SlabGeometry& geom, const SlabMaterial& material, const Vec3& r_above,
                          const Vec3& rp_below, double omega, const QuadratureSpec& quad) {
  geom.validate();
  if (geom.region_of(r_above.z()) != Region::above || geom.region_of(rp_below.z()) != Region::below)
    throw DomainError("greens_cross needs r above the slab (z > 0) and r' below (z < -d)");
  GreensTensor g = greens_transmitted(geom, material, geom.mirror(r_above), geom.mirror(rp_below), omega, quad);
  const Eigen::Vector3cd m(1.0, 1.0, -1.0);
  g.value = m.asDiagonal() * g.value * m.asDiagonal();
  g.field = r_above;
  g.source = rp_below;
  return g;
}

GreensTensor greens_tensor(const SlabGeometry& geom, const SlabMaterial& material, const Vec3& r, const Vec3& rp,
                           double omega, const QuadratureSpec& quad) {
  geom.validate();
  const Region a = geom.region_of(r.z());
  const Region b = geom.region_of(rp.z());
  if (a == Region::slab || b == Region::slab)
    throw DomainError("Green's tensor requested for a point inside the slab");
  if (a == Region::above && b == Region::above) return greens_same_side(geom, material, r, rp, omega, quad);
  if (a == Region::below && b == Region::below) {
    GreensTensor g = greens_same_side(geom, material, geom.mirror(r), geom.mirror(rp), omega, quad);
    const Eigen::Vector3cd m(1.0, 1.0, -1.0);
    g.value = m.asDiagonal() * g.value * m.asDiagonal();
    g.field = r;
    g.source = rp;
    return g;
  }
  if (a == Region::below) return greens_transmitted(geom, material, r, rp, omega, quad);
  return greens_cross(geom, material, r, rp, omega, quad);
}

GreensTensor greens_scattered(const SlabGeometry& geom, const SlabMaterial& material, const Vec3& r, const Vec3& rp,
                              double omega, const QuadratureSpec& quad) {
  GreensTensor g = greens_tensor(geom, material, r, rp, omega, quad);
  const bool coincident = (r - rp).norm() == 0.0;
  const GreensTensor g0 =
      greens_free_space(r, rp, omega, coincident ? FreeSpacePart::imaginary_only : FreeSpacePart::full);
  if (coincident) {
    // Same-side tensors at coincident points carry only Im of the homogeneous part.
    g.value.imag() -= g0.value.imag();
  } else {
    g.value -= g0.value;
  }
  return g;
}

namespace detail {

GreensTensor homogeneous_plane_wave(const Vec3& r, const Vec3& rp, double omega, const QuadratureSpec& quad,
                                    bool evanescent) {
  require_frequency(omega);
  const double k = omega;
  const auto tr = transverse_offset(r, rp);
  const double dz = r.z() - rp.z();
  const int s = dz > 0.0 ? +1 : -1;  // upward or downward propagation
  auto kernel = [&](double kperp, cplx kz) -> Tensor3 {
    const cplx phase = std::exp(cplx{0.0, 1.0} * kz * std::abs(dz));
    return (kPrefactor * kperp / kz * phase) * azimuthal_tensor(kperp, kz, k, tr.rho, tr.phi0, s, s, 1.0, 1.0);
  };
  auto setup = setup_for(k, quad);
  setup.evanescent = evanescent;
  const auto res = sommerfeld_integrate(kernel, setup, quad);
  GreensTensor g;
  g.field = r;
  g.source = rp;
  g.omega = omega;
  g.value = res.value;
  g.error = res.error;
  g.real_part_complete = evanescent;
  return g;
}

}  // namespace detail

}  // namespace lensqed::greens
