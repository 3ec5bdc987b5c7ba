#include "lensqed/quadrature.hpp"

#include <algorithm>

#include "numfmt.hpp"

namespace lensqed::greens {

void QuadratureSpec::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw ConfigError("quadrature tolerances must be > 0");
  if (!(evanescent_floor > 0.0)) throw ConfigError("quadrature evanescent_floor must be > 0");
  if (!(evanescent_cap > 1.0)) throw ConfigError("quadrature evanescent_cap must be > 1");
  if (max_depth < 1 || max_depth > 60) throw ConfigError("quadrature max_depth must be in [1, 60]");
  if (max_intervals < 1) throw ConfigError("quadrature max_intervals must be >= 1");
  if (scan_points < 16) throw ConfigError("quadrature scan_points must be >= 16");
}

QuadratureSpec QuadratureSpec::refined(double factor) const {
  QuadratureSpec s = *this;
  s.rel_tol *= factor;
  s.abs_tol *= factor;
  s.evanescent_floor *= factor;
  return s;
}

namespace detail {

EvanescentScan scan_evanescent(const std::function<double(double)>& magnitude_at, const SommerfeldSetup& setup,
                               const QuadratureSpec& spec, int& evaluations) {
  const double k = setup.k;
  const double t_cap = std::acosh(setup.evanescent_cap / k);
  const int n = spec.scan_points;
  std::vector<double> t(n + 1), mag(n + 1, 0.0), probe;
  for (int i = 0; i <= n; ++i) {
    const double s = static_cast<double>(i) / n;
    t[i] = t_cap * s * s;
  }
  for (int i = 1; i <= n; ++i) mag[i] = magnitude_at(t[i]);
  evaluations += n;
  mag[0] = mag[1];
  const double peak = *std::max_element(mag.begin(), mag.end());
  const double floor = spec.evanescent_floor * peak;

  int last = -1;
  for (int i = n; i >= 1 && peak > 0.0; --i)
    if (!(mag[i] < floor)) {
      last = i;
      break;
    }
  if (last == n)
    throw TruncationError("evanescent integrand above " + format_g(spec.evanescent_floor) + " of its peak at k_perp cap " +
                              format_g(setup.evanescent_cap) + " (ratio " + format_g(mag[n] / peak) + ")",
                          setup.evanescent_cap);
  const int end = std::max(last + 1, 1);

  if (setup.pole_probe) {
    probe.resize(end + 1);
    for (int i = 1; i <= end; ++i) {
      probe[i] = setup.pole_probe(k * std::cosh(t[i]));
      if (probe[i] < 1e-12)
        throw PoleError("slab denominator vanishes near k_perp = " + format_g(k * std::cosh(t[i]), 12),
                        k * std::cosh(t[i]));
    }
  }

  EvanescentScan scan;
  scan.t_end = t[end];
  scan.breaks.push_back(0.0);
  for (int i = 2; i < end; ++i) {
    const bool peak = mag[i] > mag[i - 1] && mag[i] >= mag[i + 1];
    const bool dip = !probe.empty() && probe[i] < 1e-2 && probe[i] < probe[i - 1] && probe[i] <= probe[i + 1];
    if (peak || dip) scan.breaks.push_back(t[i]);
  }
  scan.breaks.push_back(scan.t_end);
  // Keep the partition bounded for highly oscillatory kernels.
  while (scan.breaks.size() > 400) {
    std::vector<double> thinned;
    for (std::size_t i = 0; i < scan.breaks.size(); i += 2) thinned.push_back(scan.breaks[i]);
    if (thinned.back() != scan.t_end) thinned.push_back(scan.t_end);
    scan.breaks = std::move(thinned);
  }
  return scan;
}

}  // namespace detail
}  // namespace lensqed::greens
