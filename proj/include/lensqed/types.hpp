#pragma once

#include <complex>
#include <numbers>

#include <Eigen/Core>

namespace lensqed {

// Units throughout: hbar = c = eps0 = 1, omega0 = 1, so k0 = 1 and lengths
// are in c/omega0. Rates are reported as ratios to the free-space rate.
using cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using Tensor3 = Eigen::Matrix3cd;

inline constexpr double pi = std::numbers::pi;
inline constexpr double omega0 = 1.0;
inline constexpr double wavelength0 = 2.0 * pi;  // lambda at omega0

}  // namespace lensqed
