#include "lensqed/spectrum.hpp"

#include <algorithm>
#include <cmath>

#include "lensqed/errors.hpp"

namespace lensqed::greens {

namespace {

// Tail int_S^inf (s^-2 + s^-4) cos(beta s) ds by repeated integration by parts.
double oscillatory_tail(double beta, double start) {
  cplx sum{0.0, 0.0};
  const cplx ib{0.0, beta};
  cplx ib_pow = ib;
  // m-th derivative of s^-p is (-1)^m p (p+1) ... (p+m-1) s^{-p-m}
  double c2 = 1.0, c4 = 1.0;
  for (int m = 0; m <= 8; ++m) {
    const double deriv = c2 * std::pow(start, -2.0 - m) + c4 * std::pow(start, -4.0 - m);
    sum += (m % 2 == 0 ? 1.0 : -1.0) * deriv / ib_pow;
    ib_pow *= ib;
    c2 *= -(2.0 + m);
    c4 *= -(4.0 + m);
  }
  return (-std::exp(cplx{0.0, beta * start}) * sum).real();
}

}  // namespace

double linear_dispersion_response(double beta) {
  beta = std::abs(beta);
  if (beta == 0.0) return 1.0;
  const double start = std::max(1.0, 100.0 / beta);
  double head = 0.0;
  if (start > 1.0) {
    // s = exp(u): int (s^-1 + s^-3) cos(beta s) du
    auto f = [beta](double u) {
      const double s = std::exp(u);
      return (1.0 / s + 1.0 / (s * s * s)) * std::cos(beta * s);
    };
    QuadratureSpec spec;
    spec.rel_tol = 1e-13;
    spec.abs_tol = 1e-15;
    const double u_end = std::log(start);
    const int pieces = std::max(1, static_cast<int>(std::ceil(beta * (start - 1.0) / pi)));
    std::vector<double> breaks;
    for (int i = 0; i <= pieces; ++i)
      breaks.push_back(std::log(1.0 + (start - 1.0) * static_cast<double>(i) / pieces));
    breaks.back() = u_end;
    head = integrate_adaptive(f, std::span<const double>(breaks), spec).value;
  }
  return 0.75 * (head + oscillatory_tail(beta, start));
}

DispersionSpectrum ideal_lens_spectrum(double thickness, double alpha, std::span<const double> detuning) {
  if (!(thickness > 0.0)) throw DomainError("spectrum thickness must be > 0");
  if (!(alpha > 0.0)) throw DomainError("spectrum dispersion slope alpha must be > 0");
  DispersionSpectrum s;
  s.model = SpectrumModel::linear_dispersion;
  s.thickness = thickness;
  s.alpha = alpha;
  for (double dw : detuning) {
    s.detuning.push_back(dw);
    s.value.push_back(linear_dispersion_response(thickness * alpha * dw));  // k0 = 1
  }
  return s;
}

DispersionSpectrum material_lens_spectrum(double thickness, const material::SlabMaterial& material,
                                          std::span<const double> detuning, const QuadratureSpec& quad) {
  if (!(thickness > 0.0)) throw DomainError("spectrum thickness must be > 0");
  const SlabGeometry geom{thickness, std::nullopt};
  const Vec3 source(0.0, 0.0, 0.5 * thickness);
  const Vec3 image(0.0, 0.0, -1.5 * thickness);
  DispersionSpectrum s;
  s.model = SpectrumModel::material;
  s.thickness = thickness;
  for (double dw : detuning) {
    const double omega = omega0 + dw;
    const auto g = greens_transmitted(geom, material, image, source, omega, quad);
    s.detuning.push_back(dw);
    s.value.push_back(g.value(0, 0).imag() / (1.0 / (6.0 * pi)));
  }
  return s;
}

double spectral_width(const DispersionSpectrum& spectrum) {
  const auto& x = spectrum.detuning;
  const auto& y = spectrum.value;
  if (x.size() != y.size() || x.size() < 3) throw DomainError("spectrum needs at least three grid points");
  for (std::size_t i = 1; i < x.size(); ++i)
    if (!(x[i] > x[i - 1])) throw DomainError("spectrum detuning grid must be strictly increasing");
  if (!(x.front() < 0.0 && x.back() > 0.0)) throw DomainError("spectrum grid must bracket zero detuning");

  const auto upper = std::upper_bound(x.begin(), x.end(), 0.0);
  std::size_t hi = static_cast<std::size_t>(upper - x.begin());
  std::size_t lo = hi - 1;
  double peak = y[lo];
  if (x[lo] != 0.0) peak = y[lo] + (y[hi] - y[lo]) * (0.0 - x[lo]) / (x[hi] - x[lo]);
  if (!(peak > 0.0)) throw DomainError("spectrum is not peaked at zero detuning");
  const double half = 0.5 * peak;

  auto crossing = [&](std::size_t a, std::size_t b) {
    return x[a] + (half - y[a]) * (x[b] - x[a]) / (y[b] - y[a]);
  };
  double right = NAN, left = NAN;
  for (std::size_t i = hi; i < x.size(); ++i) {
    const std::size_t prev = i == hi ? lo : i - 1;
    if (y[i] <= half && y[prev] > half) {
      right = crossing(prev, i);
      break;
    }
  }
  for (std::size_t i = lo + 1; i-- > 0;) {
    const std::size_t next = i == lo ? hi : i + 1;
    if (y[i] <= half && y[next] > half) {
      left = crossing(i, next);
      break;
    }
  }
  if (std::isnan(right) || std::isnan(left))
    throw DomainError("half-maximum level not crossed within the detuning grid");
  return right - left;
}

}  // namespace lensqed::greens
