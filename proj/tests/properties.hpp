// Randomized property suites shared by test_properties and acceptance.
#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>

#include "lensqed/collective.hpp"
#include "lensqed/dynamics.hpp"
#include "lensqed/greens.hpp"

namespace lensqed::props {

struct SuiteResult {
  std::string name;
  int total = 0;
  int passed = 0;
  double worst = 0.0;  // largest violation relative to its tolerance
  std::string first_failure;

  bool ok() const { return total > 0 && passed == total; }

  void record(bool pass, double score, const std::string& what) {
    ++total;
    if (pass) ++passed;
    else if (first_failure.empty()) first_failure = what;
    if (std::isfinite(score)) worst = std::max(worst, score);
    else worst = INFINITY;
  }
};

class Draw {
public:
  explicit Draw(unsigned seed) : rng_(seed) {}

  double uniform(double a, double b) { return a + (b - a) * u_(rng_); }
  double log_uniform(double a, double b) { return std::exp(uniform(std::log(a), std::log(b))); }
  bool coin(double p = 0.5) { return u_(rng_) < p; }
  int pick(int n) { return std::min(n - 1, static_cast<int>(n * u_(rng_))); }

  Vec3 unit() {
    std::normal_distribution<double> n(0.0, 1.0);
    Vec3 v(n(rng_), n(rng_), n(rng_));
    return v.normalized();
  }
  Vec3 above(double reach = 3.0) { return {uniform(-2, 2), uniform(-2, 2), uniform(0.2, reach)}; }
  Vec3 below(double d, double reach = 3.0) { return {uniform(-2, 2), uniform(-2, 2), -d - uniform(0.2, reach)}; }

  // eps, mu of one handedness with Im > 0
  material::MaterialPoint lossy() {
    const double s = coin() ? -1.0 : 1.0;
    return {cplx{s * uniform(0.3, 2.0), log_uniform(1e-2, 0.5)}, cplx{s * uniform(0.3, 2.0), log_uniform(1e-2, 0.5)}};
  }

  // lossless media without real poles on the integration path
  material::MaterialPoint lossless() {
    switch (pick(3)) {
      case 0: return {cplx{-1.0, 0.0}, cplx{-1.0, 0.0}};
      case 1: return {cplx{-uniform(0.3, 2.0), 0.0}, cplx{-uniform(0.3, 2.0), 0.0}};
      default: return {cplx{uniform(0.3, 1.0), 0.0}, cplx{uniform(0.3, 1.0), 0.0}};
    }
  }

private:
  std::mt19937_64 rng_;
  std::uniform_real_distribution<double> u_{0.0, 1.0};
};

inline std::string describe(double d, const material::MaterialPoint& m, const Vec3& r, const Vec3& rp) {
  std::ostringstream s;
  s.precision(6);
  s << "d=" << d << " eps=" << m.eps << " mu=" << m.mu << " r=(" << r.transpose() << ") r'=(" << rp.transpose()
    << ")";
  return s.str();
}

// emitters sit as close as 0.2 to the slab
inline greens::QuadratureSpec near_field_spec() {
  greens::QuadratureSpec q;
  q.evanescent_cap = 200.0;
  return q;
}

template <class D>
double max_abs(const Eigen::MatrixBase<D>& m) {
  return m.cwiseAbs().maxCoeff();
}

// G(r, r') = G(r', r)^T for lossy slabs: cross, above-above and below-below pairs.
inline SuiteResult reciprocity(unsigned seed, int configs) {
  SuiteResult out{"reciprocity"};
  Draw dr(seed);
  const greens::QuadratureSpec q = near_field_spec();
  for (int i = 0; i < configs; ++i) {
    const double d = dr.uniform(0.3, 5.0);
    const auto m = dr.lossy();
    const auto slab = material::SlabMaterial::constant(m.eps, m.mu);
    const greens::SlabGeometry g{d, std::nullopt};
    Vec3 r = dr.above(), rp = dr.below(d);
    if (i % 3 == 1) rp = dr.above();
    if (i % 3 == 2) r = dr.below(d);
    const Tensor3 a = greens::greens_tensor(g, slab, r, rp, omega0, q).value;
    const Tensor3 b = greens::greens_tensor(g, slab, rp, r, omega0, q).value;
    const double tol = 10.0 * (q.rel_tol * max_abs(a) + q.abs_tol);
    const double err = max_abs(Tensor3(a - b.transpose()));
    out.record(err <= tol, err / tol, describe(d, m, r, rp));
  }
  return out;
}

// |R|^2 + |T|^2 = 1 for real eps, mu and propagating kperp, TE and TM.
inline SuiteResult unitarity(unsigned seed, int configs) {
  SuiteResult out{"lossless |R|^2+|T|^2"};
  Draw dr(seed);
  for (int i = 0; i < configs; ++i) {
    const double d = dr.uniform(0.05, 10.0);
    material::MaterialPoint m;
    const double se = dr.coin() ? -1.0 : 1.0;
    const double sm = dr.coin(0.8) ? se : -se;  // some single-negative slabs
    m.eps = se * dr.uniform(0.2, 3.0);
    m.mu = sm * dr.uniform(0.2, 3.0);
    if (se != sm) m.eps *= std::min(1.0, 2.0 / d);  // keeps e^{2 q d} within double range
    const double kp = dr.uniform(0.0, 0.999);
    const auto c = greens::slab_coefficients({d, std::nullopt}, m, omega0, kp);
    const double te = std::abs(std::norm(c.r_te) + std::norm(c.t_te) - 1.0);
    const double tm = std::abs(std::norm(c.r_tm) + std::norm(c.t_tm) - 1.0);
    const double err = std::max(te, tm);
    out.record(err <= 1e-10, err / 1e-10, describe(d, m, Vec3(kp, 0, 0), Vec3::Zero()));
  }
  return out;
}

// Collective rates and the 6x6 matrix [Im G(ri, rj)] are positive semidefinite.
inline SuiteResult rate_matrix_psd(unsigned seed, int configs) {
  SuiteResult out{"rate matrix PSD"};
  Draw dr(seed);
  for (int i = 0; i < configs; ++i) {
    const double d = dr.uniform(0.3, 5.0);
    const auto m = dr.coin(0.6) ? dr.lossy() : dr.lossless();
    collective::LensSetup lens{{d, std::nullopt}, material::SlabMaterial::constant(m.eps, m.mu), near_field_spec()};
    const Vec3 o = dr.unit();
    const collective::DipoleEmitter e1{dr.above(), o};
    const collective::DipoleEmitter e2{dr.coin() ? dr.below(d) : dr.above(), dr.coin() ? o : dr.unit()};
    const auto rates = collective::decay_rates(e1, e2, lens);

    auto im = [&](const Vec3& r, const Vec3& rp) {
      return greens::greens_tensor(lens.geometry, lens.material, r, rp, omega0, lens.quadrature).imag();
    };
    Eigen::Matrix<double, 6, 6> block;
    block.topLeftCorner<3, 3>() = im(e1.position, e1.position);
    block.topRightCorner<3, 3>() = im(e1.position, e2.position);
    block.bottomLeftCorner<3, 3>() = im(e2.position, e1.position);
    block.bottomRightCorner<3, 3>() = im(e2.position, e2.position);
    const Eigen::Matrix<double, 6, 6> sym = 0.5 * (block + block.transpose());
    const double lowest = Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>>(sym).eigenvalues().minCoeff();
    const double tol = 1e-8 * max_abs(sym);
    const double score = std::max(0.0, -lowest) / tol;

    const bool pass = rates.positive_semidefinite(1e-9) && lowest >= -tol;
    out.record(pass, score, describe(d, m, e1.position, e2.position));
  }
  return out;
}

// Trace, positivity, semigroup, monotone rho22 and the subradiant freeze.
inline SuiteResult population_dynamics(unsigned seed, int configs) {
  SuiteResult out{"trace preservation and positivity"};
  Draw dr(seed);
  for (int i = 0; i < configs; ++i) {
    const double g11 = dr.log_uniform(0.05, 5.0);
    double g12 = g11 * dr.uniform(-1.0, 1.0);
    if (i % 10 == 0) g12 = g11;
    if (i % 10 == 1) g12 = -g11;
    const collective::CollectiveRates rates{g11, g11, g12, dr.uniform(-1.0, 1.0)};
    double p[4] = {dr.uniform(0, 1), dr.uniform(0, 1), dr.uniform(0, 1), dr.uniform(0, 1)};
    if (i % 10 == 0) p[0] = 0.0;
    const double sum = p[0] + p[1] + p[2] + p[3];
    const dynamics::TwoAtomState s0{p[0] / sum, p[1] / sum, p[2] / sum, p[3] / sum};

    double worst = 0.0;
    bool pass = true;
    for (int k = 1; k <= 12; ++k) {
      const double t = dr.uniform(0.0, 25.0 / g11);
      const double t1 = dr.uniform(0.0, t);
      const auto s = dynamics::evolve(s0, rates, t);
      const double trace_err = std::abs(s.trace() - 1.0);
      worst = std::max(worst, trace_err / 1e-12);
      pass &= trace_err <= 1e-12;
      for (double v : {s.rho22, s.rho_ss, s.rho_aa, s.rho11}) pass &= v >= 0.0 && v <= 1.0;

      const auto two = dynamics::evolve(dynamics::evolve(s0, rates, t1), rates, t - t1);
      const double semi = std::max({std::abs(two.rho22 - s.rho22), std::abs(two.rho_ss - s.rho_ss),
                                    std::abs(two.rho_aa - s.rho_aa), std::abs(two.rho11 - s.rho11)});
      worst = std::max(worst, semi / 1e-10);
      pass &= semi <= 1e-10;

      const auto later = dynamics::evolve(s0, rates, t + dr.uniform(0.0, 1.0 / g11));
      pass &= later.rho22 <= s.rho22;
      if (g12 == g11 && s0.rho22 == 0.0) pass &= std::abs(s.rho_aa - s0.rho_aa) <= 1e-14;
    }
    std::ostringstream w;
    w << "g11=" << g11 << " g12=" << g12;
    out.record(pass, worst, w.str());
  }
  return out;
}

// Halving both tolerances moves every tensor component by less than the
// original tolerance.
inline SuiteResult quadrature_self_consistency(unsigned seed, int configs) {
  SuiteResult out{"quadrature self-consistency"};
  Draw dr(seed);
  for (int i = 0; i < configs; ++i) {
    const double d = dr.uniform(0.3, 10.0);
    const auto m = dr.coin(0.7) ? dr.lossy() : dr.lossless();
    const auto slab = material::SlabMaterial::constant(m.eps, m.mu);
    const greens::SlabGeometry g{d, std::nullopt};
    greens::QuadratureSpec q = near_field_spec();
    q.rel_tol = dr.log_uniform(1e-10, 1e-6);
    q.abs_tol = 1e-3 * q.rel_tol;
    const Vec3 r = dr.above();
    const Vec3 rp = dr.coin() ? dr.below(d) : dr.above();
    const Tensor3 a = greens::greens_tensor(g, slab, r, rp, omega0, q).value;
    const Tensor3 b = greens::greens_tensor(g, slab, r, rp, omega0, q.refined()).value;
    const double tol = q.rel_tol * max_abs(a) + q.abs_tol;
    const double err = max_abs(Tensor3(a - b));
    out.record(err < tol, err / tol, describe(d, m, r, rp));
  }
  return out;
}

// eps = mu = 1 reproduces the free-space tensor.
inline SuiteResult vacuum_reduction(unsigned seed, int configs) {
  SuiteResult out{"vacuum reduction"};
  Draw dr(seed);
  const auto vac = material::SlabMaterial::vacuum();
  const greens::QuadratureSpec q;
  for (int i = 0; i < configs; ++i) {
    const double d = dr.uniform(0.3, 5.0);
    const greens::SlabGeometry g{d, std::nullopt};
    const Vec3 r = dr.above();
    Vec3 rp = dr.coin() ? dr.below(d) : dr.above();
    if ((r - rp).norm() < 0.05) rp.z() += 0.5;
    const Tensor3 a = greens::greens_tensor(g, vac, r, rp, omega0, q).value;
    const Tensor3 b = greens::greens_free_space(r, rp, omega0).value;
    const double tol = 1e-8 * max_abs(b);
    const double err = max_abs(Tensor3(a - b));
    out.record(err <= tol, err / tol, describe(d, {}, r, rp));
  }
  return out;
}

// Ideal lens: Im G(r', r) = Im G0(r' + 2d z, r) for r' near the image of r.
inline SuiteResult image_identity(unsigned seed, int configs) {
  SuiteResult out{"image identity"};
  Draw dr(seed);
  const auto lens = material::SlabMaterial::ideal_lens();
  const greens::QuadratureSpec q;
  for (int i = 0; i < configs; ++i) {
    const double d = dr.uniform(0.5, 10.0);
    const greens::SlabGeometry g{d, std::nullopt};
    const Vec3 r(dr.uniform(-1, 1), dr.uniform(-1, 1), dr.uniform(0.05, 0.95) * d);
    Vec3 rp;
    do {
      const Vec3 delta = dr.unit() * dr.uniform(0.0, 2.0 * wavelength0);
      rp = r - Vec3(0, 0, 2.0 * d) + delta;
    } while (g.region_of(rp.z()) != greens::Region::below);
    const Eigen::Matrix3d a = greens::greens_tensor(g, lens, rp, r, omega0, q).imag();
    const Eigen::Matrix3d b =
        greens::greens_free_space(rp + Vec3(0, 0, 2.0 * d), r, omega0, greens::FreeSpacePart::imaginary_only).imag();
    const double tol = 1e-8 / (6.0 * pi);
    const double err = max_abs(Eigen::Matrix3d(a - b));
    out.record(err <= tol, err / tol, describe(d, lens.fixed_point(), r, rp));
  }
  return out;
}

}  // namespace lensqed::props
