// Dyadic Green's tensors for a single homogeneous slab (-d <= z <= 0) in
// vacuum. Regions: 0 above the slab (z > 0), 1 inside, 2 below (z < -d).
#pragma once

#include <optional>
#include <utility>

#include <Eigen/Core>

#include "lensqed/material.hpp"
#include "lensqed/quadrature.hpp"
#include "lensqed/types.hpp"

namespace lensqed::greens {

enum class Region { above = 0, slab = 1, below = 2 };
enum class Polarization { te, tm };

struct SlabGeometry {
  double thickness = 1.0;
  // Lens radius for the ray-optics aperture model; nullopt is an infinite lens.
  std::optional<double> aperture_radius;

  void validate() const;
  Region region_of(double z) const noexcept;
  // Reflection through the slab mid-plane, z -> -d - z.
  Vec3 mirror(const Vec3& r) const { return {r.x(), r.y(), -thickness - r.z()}; }
  bool operator==(const SlabGeometry&) const = default;
};

// k_z = sqrt(k2 - kperp^2) with Im k_z >= 0. On the real axis the root is
// non-negative, or non-positive for a left-handed medium.
cplx longitudinal_wavenumber(cplx k2, double kperp, bool left_handed = false);

struct PlaneWaveMode {
  double kperp = 0.0;
  cplx kz;   // vacuum
  cplx k1z;  // slab
  Polarization polarization = Polarization::te;
  int handedness = +1;  // -1 inside a left-handed slab
};

PlaneWaveMode plane_wave_mode(double k, const material::MaterialPoint& slab, double kperp, Polarization pol);

// TE/TM unit vectors e = (k x z)/|k x z| and h = p e x k / k for wavevector
// (kx, ky, kz); kz may be complex (bilinear, not Hermitian, normalization).
std::pair<Eigen::Vector3cd, Eigen::Vector3cd> polarization_vectors(double kx, double ky, cplx kz, double k,
                                                                   int handedness = +1);

struct InterfaceCoefficients {
  cplx r_te;  // R_ij
  cplx r_tm;  // S_ij
};

// Reflection at the boundary between media i and j; throws PoleError (with
// kperp, when given) if a denominator vanishes.
InterfaceCoefficients fresnel_interface(cplx eps_i, cplx mu_i, cplx eps_j, cplx mu_j, cplx kiz, cplx kjz,
                                        double kperp = -1.0);

struct SlabCoefficients {
  cplx r_te, r_tm;
  cplx t_te, t_tm;
};

// Reflection and transmission of the whole slab for a plane wave incident
// from region 0; transmission includes the vacuum phase e^{-i k_z d}.
SlabCoefficients slab_coefficients(const SlabGeometry& geom, const material::MaterialPoint& slab, double omega,
                                   double kperp);

// Largest transverse wavenumber passed by a lens of radius a (ray optics).
double aperture_cutoff(double radius, double thickness, double k);

enum class RegionPair { free_space, same_side, cross };

struct GreensTensor {
  Tensor3 value = Tensor3::Zero();
  Vec3 field = Vec3::Zero();
  Vec3 source = Vec3::Zero();
  RegionPair regions = RegionPair::free_space;
  double omega = omega0;
  // False when a contribution to Re G was intentionally dropped: the
  // divergent homogeneous term at coincident points, or the evanescent
  // spectrum of a lossless left-handed slab.
  bool real_part_complete = true;
  double error = 0.0;

  Eigen::Matrix3d imag() const { return value.imag(); }
};

enum class FreeSpacePart { full, imaginary_only };

GreensTensor greens_free_space(const Vec3& r, const Vec3& rp, double omega,
                               FreeSpacePart part = FreeSpacePart::full);

// Both points above the slab: homogeneous part in closed form plus the
// reflected plane-wave spectrum.
GreensTensor greens_same_side(const SlabGeometry& geom, const material::SlabMaterial& material, const Vec3& r,
                              const Vec3& rp, double omega, const QuadratureSpec& quad = {});

// Field point below the slab, source above: the transmitted spectrum directly.
GreensTensor greens_transmitted(const SlabGeometry& geom, const material::SlabMaterial& material,
                                const Vec3& r_below, const Vec3& rp_above, double omega,
                                const QuadratureSpec& quad = {});

// G(r, r') with r above and r' below, obtained by mirroring the transmitted
// tensor through the slab mid-plane.
GreensTensor greens_cross(const SlabGeometry& geom, const material::SlabMaterial& material, const Vec3& r_above,
                          const Vec3& rp_below, double omega, const QuadratureSpec& quad = {});

// Dispatch on the regions of r and r'. Points inside the slab are rejected.
GreensTensor greens_tensor(const SlabGeometry& geom, const material::SlabMaterial& material, const Vec3& r,
                           const Vec3& rp, double omega, const QuadratureSpec& quad = {});

// Scattered part G - G0 (the free-space tensor at the same points removed).
GreensTensor greens_scattered(const SlabGeometry& geom, const material::SlabMaterial& material, const Vec3& r,
                              const Vec3& rp, double omega, const QuadratureSpec& quad = {});

namespace detail {

// int dphi [a_te e e + a_tm h(s1 kz) h(s2 kz)] exp(i kperp . drho)
Tensor3 azimuthal_tensor(double kperp, cplx kz, double k, double rho, double phi0, int s_field, int s_source,
                         cplx a_te, cplx a_tm);

// Plane-wave (Weyl) route to the homogeneous tensor, for z != z' or for the
// imaginary part. Used as an independent check of the closed form.
GreensTensor homogeneous_plane_wave(const Vec3& r, const Vec3& rp, double omega, const QuadratureSpec& quad,
                                    bool evanescent = true);

}  // namespace detail

}  // namespace lensqed::greens
