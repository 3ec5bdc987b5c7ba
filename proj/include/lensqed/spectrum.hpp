// Frequency dependence of Im G between the foci of a dispersive lens.
#pragma once

#include <span>
#include <vector>

#include "lensqed/greens.hpp"

namespace lensqed::greens {

enum class SpectrumModel { linear_dispersion, material };

struct DispersionSpectrum {
  std::vector<double> detuning;  // omega - omega0, units of omega0
  std::vector<double> value;     // Im G / (k0 / 6 pi), one diagonal component
  SpectrumModel model = SpectrumModel::linear_dispersion;
  double thickness = 0.0;
  double alpha = 0.0;
};

// (3/4) Re int_0^1 dxi (1 + xi^2) exp(i beta / xi): the focal Im G of a lens
// with n = -1 + alpha (omega - omega0) in the exponent only, normalized to
// the free-space value, as a function of beta = d k0 alpha (omega - omega0).
double linear_dispersion_response(double beta);

DispersionSpectrum ideal_lens_spectrum(double thickness, double alpha, std::span<const double> detuning);

// Full plane-wave evaluation between the foci (0,0,d/2) and (0,0,-3d/2) for
// a dispersive slab material, xx component.
DispersionSpectrum material_lens_spectrum(double thickness, const material::SlabMaterial& material,
                                          std::span<const double> detuning, const QuadratureSpec& quad = {});

// Full width at half of the zero-detuning value, linear interpolation
// between grid points.
double spectral_width(const DispersionSpectrum& spectrum);

}  // namespace lensqed::greens
