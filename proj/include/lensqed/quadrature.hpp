// Adaptive Gauss-Kronrod engine for scalar, complex and small Eigen-valued
// integrands, plus the Sommerfeld (transverse wavenumber) integrator used by
// the slab Green's tensors.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <queue>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "lensqed/errors.hpp"
#include "lensqed/types.hpp"

namespace lensqed::greens {

struct QuadratureSpec {
  double rel_tol = 1e-10;
  double abs_tol = 1e-13;
  // Evanescent integration stops once the integrand magnitude (per unit of
  // the hyperbolic variable) stays below this fraction of its scanned peak.
  double evanescent_floor = 1e-13;
  // Hard cap on k_perp, in units of max(k, k0).
  double evanescent_cap = 50.0;
  int max_depth = 50;
  int max_intervals = 20000;
  int scan_points = 1500;
  // Far-field approximation: drop the evanescent spectrum of the scattered
  // tensor (k_perp > k) for every material.
  bool propagating_only = false;

  void validate() const;
  QuadratureSpec refined(double factor = 0.5) const;
  bool operator==(const QuadratureSpec&) const = default;
};

template <class V>
struct QuadratureResult {
  V value;
  double error = 0.0;
  int evaluations = 0;
  int intervals = 0;
};

namespace detail {

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(cplx v) { return std::abs(v); }
template <class Derived>
double magnitude(const Eigen::MatrixBase<Derived>& m) {
  return m.cwiseAbs().maxCoeff();
}

template <class V>
V zero_like() {
  if constexpr (requires { V::Zero(); })
    return V::Zero();
  else
    return V{};
}

// 7-point Gauss / 15-point Kronrod, abscissae in descending order; the Gauss
// nodes are the odd-indexed Kronrod nodes.
inline constexpr std::array<double, 8> kronrod_x = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kronrod_w = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> gauss_w = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class V, class F>
std::pair<V, double> gauss_kronrod_15(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const V fc = f(c);
  V kronrod = kronrod_w[7] * fc;
  V gauss = gauss_w[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kronrod_x[j];
    const V sum = V(f(c - dx)) + V(f(c + dx));
    kronrod += kronrod_w[j] * sum;
    if (j % 2 == 1) gauss += gauss_w[j / 2] * sum;
  }
  kronrod *= h;
  gauss *= h;
  return {kronrod, magnitude(V(kronrod - gauss))};
}

}  // namespace detail

// Globally adaptive bisection over the partition given by `breaks` (sorted,
// at least two points). Converged when the summed error estimate is below
// max(abs_tol, rel_tol * |I|).
template <class F>
auto integrate_adaptive(F&& f, std::span<const double> breaks, const QuadratureSpec& spec)
    -> QuadratureResult<std::decay_t<decltype(f(0.0))>> {
  using V = std::decay_t<decltype(f(0.0))>;
  struct Piece {
    double a, b;
    V value;
    double error;
    int depth;
  };
  auto by_error = [](const Piece& x, const Piece& y) { return x.error < y.error; };
  std::priority_queue<Piece, std::vector<Piece>, decltype(by_error)> active(by_error);
  std::vector<Piece> frozen;

  QuadratureResult<V> out{detail::zero_like<V>(), 0.0, 0, 0};
  V total = detail::zero_like<V>();
  double error = 0.0;
  auto evaluate = [&](double a, double b, int depth) {
    auto [v, e] = detail::gauss_kronrod_15<V>(f, a, b);
    out.evaluations += 15;
    if (!std::isfinite(detail::magnitude(v)))
      throw QuadratureError("non-finite integrand on [" + std::to_string(a) + ", " + std::to_string(b) + "]",
                            INFINITY, spec.rel_tol);
    total += v;
    error += e;
    Piece p{a, b, v, e, depth};
    if (depth >= spec.max_depth)
      frozen.push_back(p);
    else
      active.push(p);
  };
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
    if (breaks[i + 1] > breaks[i]) evaluate(breaks[i], breaks[i + 1], 0);

  int pieces = static_cast<int>(active.size() + frozen.size());
  int since_resum = 0;
  while (true) {
    const double tol = std::max(spec.abs_tol, spec.rel_tol * detail::magnitude(total));
    if (error <= tol) break;
    if (active.empty() || pieces >= spec.max_intervals)
      throw QuadratureError("adaptive quadrature did not reach tolerance (error " + std::to_string(error) +
                                ", requested " + std::to_string(tol) + ")",
                            error, tol);
    Piece worst = active.top();
    active.pop();
    total -= worst.value;
    error -= worst.error;
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      frozen.push_back(worst);
      total += worst.value;
      error += worst.error;
      continue;
    }
    evaluate(worst.a, mid, worst.depth + 1);
    evaluate(mid, worst.b, worst.depth + 1);
    ++pieces;
    if (++since_resum == 64) {
      // Running sums drift; rebuild them from the pieces.
      since_resum = 0;
      std::vector<Piece> all(frozen);
      auto copy = active;
      while (!copy.empty()) {
        all.push_back(copy.top());
        copy.pop();
      }
      total = detail::zero_like<V>();
      error = 0.0;
      for (const auto& p : all) {
        total += p.value;
        error += p.error;
      }
    }
  }

  std::vector<Piece> all(std::move(frozen));
  while (!active.empty()) {
    all.push_back(active.top());
    active.pop();
  }
  std::sort(all.begin(), all.end(), [](const Piece& x, const Piece& y) { return x.a < y.a; });
  out.value = detail::zero_like<V>();
  out.error = 0.0;
  for (const auto& p : all) {
    out.value += p.value;
    out.error += p.error;
  }
  out.intervals = static_cast<int>(all.size());
  return out;
}

template <class F>
auto integrate_adaptive(F&& f, double a, double b, const QuadratureSpec& spec) {
  const std::array<double, 2> breaks{a, b};
  return integrate_adaptive(std::forward<F>(f), std::span<const double>(breaks), spec);
}

// Transverse-wavenumber integral int_0^cap dk_perp g(k_perp, k_z) split at the
// branch point k_perp = k. The propagating part uses k_perp = k sin(theta)
// and the evanescent part k_perp = k cosh(t); both Jacobians cancel the
// 1/k_z branch-point singularity of the usual kernels.
struct SommerfeldSetup {
  double k = 1.0;
  // Upper k_perp limit on the propagating branch, in (0, k].
  double propagating_limit = 1.0;
  bool evanescent = true;
  // Absolute k_perp cap for the evanescent branch (> k).
  double evanescent_cap = 50.0;
  // Optional normalized denominator modulus |D(k_perp)| used to find poles
  // near the real axis; minima become breakpoints, exact zeros are errors.
  std::function<double(double)> pole_probe;
};

template <class V>
struct SommerfeldResult {
  V value;
  double error = 0.0;
  double truncation_kperp = 0.0;
  int evaluations = 0;
};

namespace detail {

// Scan of the evanescent integrand magnitude on a grid in t, quadratic near t = 0.
struct EvanescentScan {
  std::vector<double> breaks;
  double t_end = 0.0;
};

EvanescentScan scan_evanescent(const std::function<double(double)>& magnitude_at, const SommerfeldSetup& setup,
                               const QuadratureSpec& spec, int& evaluations);

}  // namespace detail

template <class G>
auto sommerfeld_integrate(G&& g, const SommerfeldSetup& setup, const QuadratureSpec& spec)
    -> SommerfeldResult<std::decay_t<decltype(g(0.0, cplx{}))>> {
  using V = std::decay_t<decltype(g(0.0, cplx{}))>;
  spec.validate();
  const double k = setup.k;
  if (!(k > 0.0)) throw DomainError("Sommerfeld integral needs k > 0");
  if (!(setup.propagating_limit > 0.0) || setup.propagating_limit > k)
    throw DomainError("propagating k_perp limit must lie in (0, k]");

  SommerfeldResult<V> out{detail::zero_like<V>(), 0.0, setup.propagating_limit, 0};

  const double theta_max =
      setup.propagating_limit >= k ? 0.5 * pi : std::asin(setup.propagating_limit / k);
  auto propagating = [&](double theta) -> V {
    const double c = std::cos(theta);
    return V(g(k * std::sin(theta), cplx{k * c, 0.0})) * (k * c);
  };
  auto prop = integrate_adaptive(propagating, 0.0, theta_max, spec);
  out.value = prop.value;
  out.error = prop.error;
  out.evaluations = prop.evaluations;
  if (!setup.evanescent) return out;
  if (!(setup.evanescent_cap > k)) throw DomainError("evanescent cap must exceed k");

  auto evanescent = [&](double t) -> V {
    const double q = k * std::sinh(t);
    return V(g(k * std::cosh(t), cplx{0.0, q})) * q;
  };
  int scan_evals = 0;
  const auto scan = detail::scan_evanescent(
      [&](double t) { return detail::magnitude(evanescent(t)); }, setup, spec, scan_evals);
  QuadratureSpec tail_spec = spec;
  tail_spec.abs_tol = std::max(spec.abs_tol, spec.rel_tol * detail::magnitude(prop.value));
  auto ev = integrate_adaptive(evanescent, std::span<const double>(scan.breaks), tail_spec);
  out.value += ev.value;
  out.error += ev.error;
  out.evaluations += ev.evaluations + scan_evals;
  out.truncation_kperp = k * std::cosh(scan.t_end);
  return out;
}

}  // namespace lensqed::greens
