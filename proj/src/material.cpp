#include "lensqed/material.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "lensqed/errors.hpp"
#include "numfmt.hpp"

namespace lensqed::material {

LorentzModel::LorentzModel(std::vector<LorentzTerm> terms, double background)
    : terms_(std::move(terms)), background_(background) {
  if (!(background_ >= 1.0) || !std::isfinite(background_))
    throw DomainError("Lorentz background must be finite and >= 1");
  for (const auto& t : terms_) {
    if (!(t.strength >= 0.0) || !std::isfinite(t.strength))
      throw DomainError("Lorentz strength must be finite and >= 0");
    if (!(t.resonance > 0.0) || !std::isfinite(t.resonance))
      throw DomainError("Lorentz resonance must be finite and > 0");
    if (!(t.damping >= 0.0) || !std::isfinite(t.damping))
      throw DomainError("Lorentz damping must be finite and >= 0");
  }
}

cplx evaluate_response(const LorentzModel& model, double omega) {
  if (!(omega > 0.0)) throw DomainError("response evaluated at nonpositive frequency");
  cplx value{model.background(), 0.0};
  for (const auto& t : model.terms()) {
    const double wr2 = t.resonance * t.resonance;
    value += t.strength * wr2 / cplx{wr2 - omega * omega, -t.damping * omega};
  }
  return value;
}

bool is_left_handed(cplx eps, cplx mu) { return eps.real() < 0.0 && mu.real() < 0.0; }

cplx refractive_index(cplx eps, cplx mu) {
  cplx n = std::sqrt(eps * mu);
  if (n.imag() < 0.0) n = -n;
  if (n.imag() == 0.0) {
    const bool lh = is_left_handed(eps, mu);
    if ((lh && n.real() > 0.0) || (!lh && n.real() < 0.0)) n = -n;
  }
  return n;
}

SlabMaterial SlabMaterial::constant(cplx eps, cplx mu) {
  SlabMaterial m;
  m.fixed_ = {eps, mu};
  return m;
}

SlabMaterial SlabMaterial::index_matched(cplx n) { return constant(n, n); }

SlabMaterial SlabMaterial::dispersive(LorentzModel eps, LorentzModel mu) {
  SlabMaterial m;
  m.dispersive_ = true;
  m.eps_model_ = std::move(eps);
  m.mu_model_ = std::move(mu);
  m.fixed_ = {evaluate_response(m.eps_model_, omega0), evaluate_response(m.mu_model_, omega0)};
  return m;
}

MaterialPoint SlabMaterial::at(double omega) const {
  if (!dispersive_) return fixed_;
  return {evaluate_response(eps_model_, omega), evaluate_response(mu_model_, omega)};
}

PositivityReport energy_positivity_check(const ResponseFunction& eps, const ResponseFunction& mu,
                                         double omega_lo, double omega_hi, double step) {
  if (!(step > 0.0) || step > 1e-3)
    throw ConfigError("positivity grid step must be in (0, 1e-3]");
  if (!(omega_lo > step) || !(omega_hi > omega_lo))
    throw ConfigError("positivity range must satisfy step < omega_lo < omega_hi");

  const auto n = static_cast<long>(std::ceil((omega_hi - omega_lo) / step));
  PositivityReport report{true, std::numeric_limits<double>::infinity(), omega_lo};
  auto energy_slope = [&](const ResponseFunction& f, double w) {
    const double up = (w + step) * f(w + step).real();
    const double dn = (w - step) * f(w - step).real();
    return (up - dn) / (2.0 * step);
  };
  for (long i = 0; i <= n; ++i) {
    const double w = std::min(omega_lo + static_cast<double>(i) * step, omega_hi);
    const double m = std::min(energy_slope(eps, w), energy_slope(mu, w));
    if (m < report.margin) {
      report.margin = m;
      report.omega_at_margin = w;
    }
  }
  // Difference quotients of exactly linear functions carry ~1e-12 roundoff.
  report.pass = report.margin >= -1e-9;
  return report;
}

PositivityReport energy_positivity_check(const LorentzModel& eps, const LorentzModel& mu,
                                         double omega_lo, double omega_hi, double step) {
  return energy_positivity_check([&](double w) { return evaluate_response(eps, w); },
                                 [&](double w) { return evaluate_response(mu, w); }, omega_lo,
                                 omega_hi, step);
}

namespace {

cplx index_at(const LorentzModel& eps, const LorentzModel& mu, double omega) {
  return refractive_index(evaluate_response(eps, omega), evaluate_response(mu, omega));
}

double slope_quotient(const LorentzModel& eps, const LorentzModel& mu, double omega, double h) {
  return (index_at(eps, mu, omega + h) - index_at(eps, mu, omega - h)).real() / (2.0 * h);
}

}  // namespace

double dispersion_slope(const LorentzModel& eps, const LorentzModel& mu, double omega, double h) {
  if (!(h > 0.0) || !(omega - h > 0.0)) throw DomainError("slope step must satisfy 0 < h < omega");
  const double coarse = slope_quotient(eps, mu, omega, h);
  const double fine = slope_quotient(eps, mu, omega, 0.5 * h);
  const double scale = std::max({std::abs(coarse), std::abs(fine), 1e-8});
  if (!std::isfinite(coarse) || !std::isfinite(fine) || std::abs(coarse - fine) > 1e-3 * scale)
    throw NumericalError("dispersion slope difference quotient did not converge (h=" +
                         format_g(h) + ": " + format_g(coarse) + " vs " + format_g(fine) + ")");
  return (4.0 * fine - coarse) / 3.0;
}

IndexPoint index_point(const LorentzModel& eps, const LorentzModel& mu, double omega) {
  return {index_at(eps, mu, omega), dispersion_slope(eps, mu, omega)};
}

namespace {

// Single symmetric resonance, eps = mu, so n = eps on the left-handed branch.
struct SingleResonance {
  double strength;
  double resonance;
  double damping;
  double background;

  cplx eps(double w) const {
    const double wr2 = resonance * resonance;
    return background + strength * wr2 / cplx{wr2 - w * w, -damping * w};
  }
  cplx deps(double w) const {
    const double wr2 = resonance * resonance;
    const cplx den{wr2 - w * w, -damping * w};
    return strength * wr2 * cplx{2.0 * w, damping} / (den * den);
  }
};

}  // namespace

LensFit fit_lens_material(cplx n_target, double alpha_target, const FitOptions& options) {
  if (n_target == cplx{1.0, 0.0} && alpha_target == 0.0)
    return {LorentzModel::vacuum(), LorentzModel::vacuum(), 0, 0.0};
  if (!(n_target.real() < 0.0)) throw DomainError("lens fit requires Re n_target < 0");
  if (n_target.imag() < 0.0) throw DomainError("lens fit requires Im n_target >= 0");
  if (n_target.imag() == 0.0 && !(alpha_target >= 1.0 / omega0))
    throw DomainError("lossless lens fit requires alpha_target >= 1/omega0");
  if (!(options.damping >= 0.0)) throw DomainError("fit damping must be >= 0");

  const double bg = options.background;
  const double nr = n_target.real();
  const double gap = 2.0 * (bg - nr) / alpha_target;  // 1 - w_r^2 in the lossless limit
  if (!(gap < 1.0))
    throw FitError("no single-resonance lens below omega0 reaches this slope (need alpha > " +
                       format_g(2.0 * (bg - nr)) + ")",
                   gap);

  const bool lossy = n_target.imag() > 0.0;
  SingleResonance m{(bg - nr) * gap / (1.0 - gap), std::sqrt(1.0 - gap), options.damping, bg};
  if (lossy) m.damping = n_target.imag() * gap * gap / (m.strength * (1.0 - gap));

  const int dim = lossy ? 3 : 2;
  auto residual = [&](const SingleResonance& s) {
    Eigen::Vector3d r;
    const cplx e = s.eps(omega0);
    r[0] = e.real() - nr;
    r[1] = (s.deps(omega0).real() - alpha_target) / alpha_target;
    r[2] = lossy ? e.imag() - n_target.imag() : 0.0;
    return r;
  };
  auto params = [&](const SingleResonance& s) { return Eigen::Vector3d{s.strength, s.resonance, s.damping}; };
  auto from = [&](const Eigen::Vector3d& p) { return SingleResonance{p[0], p[1], p[2], bg}; };

  Eigen::Vector3d r = residual(m);
  int it = 0;
  for (; it < options.max_iterations && r.head(dim).norm() > 1e-13; ++it) {
    const Eigen::Vector3d p = params(m);
    Eigen::Matrix3d jac = Eigen::Matrix3d::Identity();
    for (int j = 0; j < dim; ++j) {
      const double h = 1e-7 * std::max(std::abs(p[j]), 1e-9);
      Eigen::Vector3d pp = p, pm = p;
      pp[j] += h;
      pm[j] -= h;
      jac.col(j) = (residual(from(pp)) - residual(from(pm))) / (2.0 * h);
    }
    Eigen::Vector3d step = Eigen::Vector3d::Zero();
    step.head(dim) = jac.topLeftCorner(dim, dim).fullPivLu().solve(-r.head(dim));
    double lambda = 1.0;
    bool accepted = false;
    for (int k = 0; k < 40; ++k, lambda *= 0.5) {
      const Eigen::Vector3d trial = p + lambda * step;
      if (!(trial[0] > 0.0) || !(trial[1] > 0.0) || !(trial[1] < omega0) || trial[2] < 0.0) continue;
      const Eigen::Vector3d rt = residual(from(trial));
      if (rt.head(dim).norm() < r.head(dim).norm()) {
        m = from(trial);
        r = rt;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }

  const double res = r.head(dim).norm();
  if (!(res < 1e-9))
    throw FitError("lens fit did not converge (residual " + format_g(res) + ")", res);

  LorentzModel model({{m.strength, m.resonance, m.damping}}, bg);
  return {model, model, it, res};
}

std::string format_terms(const std::vector<LorentzTerm>& terms) {
  std::string out;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i) out += "; ";
    out += format_exact(terms[i].strength) + "," + format_exact(terms[i].resonance) + "," +
           format_exact(terms[i].damping);
  }
  return out;
}

std::vector<LorentzTerm> parse_terms(const std::string& text) {
  std::vector<LorentzTerm> terms;
  std::stringstream groups(text);
  std::string group;
  while (std::getline(groups, group, ';')) {
    if (trim(group).empty()) continue;
    const auto fields = split(group, ',');
    if (fields.size() != 3)
      throw ConfigError("Lorentz term '" + trim(group) + "' must be 'strength,resonance,damping'");
    terms.push_back({parse_double(fields[0]), parse_double(fields[1]), parse_double(fields[2])});
  }
  return terms;
}

std::map<std::string, std::string> to_config_block(const LorentzModel& eps, const LorentzModel& mu) {
  return {{"eps_background", format_exact(eps.background())},
          {"eps_terms", format_terms(eps.terms())},
          {"mu_background", format_exact(mu.background())},
          {"mu_terms", format_terms(mu.terms())}};
}

std::pair<LorentzModel, LorentzModel> from_config_block(const std::map<std::string, std::string>& block) {
  auto get = [&](const std::string& key, const std::string& fallback) {
    auto it = block.find(key);
    return it == block.end() ? fallback : it->second;
  };
  try {
    LorentzModel eps(parse_terms(get("eps_terms", "")), parse_double(get("eps_background", "1")));
    LorentzModel mu(parse_terms(get("mu_terms", "")), parse_double(get("mu_background", "1")));
    return {std::move(eps), std::move(mu)};
  } catch (const DomainError& e) {
    throw ConfigError(std::string("material: ") + e.what());
  }
}

}  // namespace lensqed::material
