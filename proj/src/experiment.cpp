#include <atomic>
#include <exception>
#include <functional>
#include <thread>

#include "lensqed/errors.hpp"
#include "lensqed/experiment.hpp"
#include "lensqed/spectrum.hpp"
#include "lensqed/version.hpp"
#include "numfmt.hpp"

namespace lensqed::experiment {

using collective::CollectiveRates;
using collective::DipoleEmitter;
using collective::LensSetup;
using dynamics::TwoAtomState;

namespace {

[[noreturn]] void rethrow_annotated(std::exception_ptr p, const std::string& label) {
  try {
    std::rethrow_exception(p);
  } catch (const ConfigError& e) {
    throw ConfigError(label + ": " + e.what());
  } catch (const DomainError& e) {
    throw DomainError(label + ": " + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(label + ": " + e.what());
  }
}

// Evaluates task(i) for i in [0, n) on up to `threads` workers. Results land
// by index, so the output does not depend on scheduling. The failure with the
// lowest index is rethrown, annotated with its grid point.
std::vector<std::vector<double>> parallel_rows(std::size_t n, int threads,
                                               const std::function<std::vector<double>(std::size_t)>& task,
                                               const std::function<std::string(std::size_t)>& label) {
  std::vector<std::vector<double>> out(n);
  std::vector<std::exception_ptr> failures(n);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (std::size_t i = next++; i < n && !failed; i = next++) {
      try {
        out[i] = task(i);
      } catch (...) {
        failures[i] = std::current_exception();
        failed = true;
      }
    }
  };
  const int count = std::max(1, std::min<int>(threads, static_cast<int>(n)));
  if (count == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < count; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (std::size_t i = 0; i < n; ++i)
    if (failures[i]) rethrow_annotated(failures[i], label(i));
  return out;
}

std::pair<DipoleEmitter, DipoleEmitter> emitters_for(const ExperimentConfig& cfg, double thickness) {
  if (cfg.emitters.at_foci) return collective::focal_pair(thickness, cfg.emitters.orientation);
  return {DipoleEmitter{cfg.emitters.position1, cfg.emitters.orientation},
          DipoleEmitter{cfg.emitters.position2, cfg.emitters.orientation}};
}

LensSetup lens_for(const ExperimentConfig& cfg) { return {cfg.geometry, cfg.material.build(), cfg.quadrature}; }

std::string point_label(const std::string& variable, double value) {
  return "grid point " + variable + " = " + format_g(value, 12);
}

std::string thickness_tag(double d) { return format_g(d, 12); }

CollectiveRates rates_for(const ExperimentConfig& cfg) {
  if (cfg.dynamics.rates) return *cfg.dynamics.rates;
  const auto [e1, e2] = emitters_for(cfg, cfg.geometry.thickness);
  return collective::decay_rates(e1, e2, lens_for(cfg));
}

TwoAtomState initial_state(const std::string& name) {
  if (name == "22") return TwoAtomState::doubly_excited();
  if (name == "21") return TwoAtomState::one_excited();
  if (name == "s") return {0.0, 1.0, 0.0, 0.0};
  if (name == "a") return {0.0, 0.0, 1.0, 0.0};
  return TwoAtomState::ground();
}

ResultTable fig2(const ExperimentConfig& cfg, int threads) {
  const auto lens = lens_for(cfg);
  const auto [e1, e2] = emitters_for(cfg, cfg.geometry.thickness);
  const Vec3 dir = cfg.sweep.variable == "dx" ? Vec3::UnitX() : Vec3::UnitZ();
  const auto& grid = cfg.sweep.grid;
  ResultTable t;
  t.columns = {cfg.sweep.variable, "ratio", "free_space"};
  t.rows = parallel_rows(
      grid.size(), threads,
      [&](std::size_t i) {
        DipoleEmitter moved = e2;
        moved.position += grid[i] * dir;
        const auto r = collective::decay_rates(e1, moved, lens);
        return std::vector<double>{grid[i], r.gamma12 / r.gamma11,
                                   collective::free_space_cross_rate(grid[i] * dir, cfg.emitters.orientation)};
      },
      [&](std::size_t i) { return point_label(cfg.sweep.variable, grid[i]); });
  return t;
}

ResultTable loss_sweep(const ExperimentConfig& cfg, int threads) {
  const auto& grid = cfg.sweep.grid;
  const auto& ds = cfg.sweep.thicknesses;
  ResultTable t;
  t.columns = {"im_n"};
  for (double d : ds) t.columns.push_back("ratio_d=" + thickness_tag(d));
  const auto cells = parallel_rows(
      grid.size() * ds.size(), threads,
      [&](std::size_t k) {
        const double im_n = grid[k / ds.size()];
        const double d = ds[k % ds.size()];
        LensSetup lens{{d, std::nullopt}, material::SlabMaterial::index_matched({cfg.material.n_real, im_n}),
                       cfg.quadrature};
        const auto [e1, e2] = emitters_for(cfg, d);
        const auto r = collective::decay_rates(e1, e2, lens);
        return std::vector<double>{r.gamma12 / r.gamma11};
      },
      [&](std::size_t k) {
        return point_label("im_n", grid[k / ds.size()]) + ", d = " + thickness_tag(ds[k % ds.size()]);
      });
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<double> row{grid[i]};
    for (std::size_t j = 0; j < ds.size(); ++j) row.push_back(cells[i * ds.size() + j][0]);
    t.rows.push_back(row);
  }
  return t;
}

ResultTable aperture_sweep(const ExperimentConfig& cfg, int threads) {
  const double d = cfg.geometry.thickness;
  const auto& grid = cfg.sweep.grid;
  ResultTable t;
  t.columns = {"a_over_d", "ratio", "ratio_quadrature"};
  t.rows = parallel_rows(
      grid.size(), threads,
      [&](std::size_t i) {
        LensSetup lens{{d, grid[i] * d}, material::SlabMaterial::ideal_lens(), cfg.quadrature};
        const auto [e1, e2] = collective::focal_pair(d, cfg.emitters.orientation);
        const auto r = collective::decay_rates(e1, e2, lens);
        return std::vector<double>{grid[i], collective::aperture_rate_ratio(grid[i] * d, d), r.gamma12 / r.gamma11};
      },
      [&](std::size_t i) { return point_label("a_over_d", grid[i]); });
  return t;
}

ResultTable spectrum(const ExperimentConfig& cfg, int threads) {
  const auto& grid = cfg.sweep.grid;
  const auto& ds = cfg.sweep.thicknesses;
  const auto model = cfg.material.model;
  const bool with_material =
      model == MaterialConfig::Model::fit || model == MaterialConfig::Model::lorentz;
  const auto mat = with_material ? cfg.material.build() : material::SlabMaterial::ideal_lens();
  const std::size_t per_point = ds.size() * (with_material ? 2 : 1);

  ResultTable t;
  t.columns = {"detuning"};
  for (double d : ds) t.columns.push_back("linear_dk=" + thickness_tag(d));
  if (with_material)
    for (double d : ds) t.columns.push_back("material_dk=" + thickness_tag(d));
  const auto cells = parallel_rows(
      grid.size() * per_point, threads,
      [&](std::size_t k) {
        const double dw = grid[k / per_point];
        const std::size_t j = k % per_point;
        const double d = ds[j % ds.size()];
        if (j < ds.size()) return std::vector<double>{greens::linear_dispersion_response(d * cfg.material.alpha * dw)};
        const double one[] = {dw};
        return std::vector<double>{greens::material_lens_spectrum(d, mat, one, cfg.quadrature).value[0]};
      },
      [&](std::size_t k) { return point_label("detuning", grid[k / per_point]); });
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<double> row{grid[i]};
    for (std::size_t j = 0; j < per_point; ++j) row.push_back(cells[i * per_point + j][0]);
    t.rows.push_back(row);
  }
  return t;
}

ResultTable rates(const ExperimentConfig& cfg) {
  const auto [e1, e2] = emitters_for(cfg, cfg.geometry.thickness);
  const auto r = collective::decay_rates(e1, e2, lens_for(cfg));
  ResultTable t;
  t.columns = {"gamma11", "gamma22", "gamma12", "ratio", "gamma_s", "gamma_a"};
  std::vector<double> row{r.gamma11, r.gamma22, r.gamma12, r.gamma12 / r.gamma11, r.gamma11 + r.gamma12,
                          r.gamma11 - r.gamma12};
  if (cfg.emitters.linewidth) {
    const double separation = (e1.position - e2.position).norm();
    const auto m = collective::markov_validity(separation, r.gamma11 * *cfg.emitters.linewidth);
    t.columns.push_back("markov_ratio");
    t.columns.push_back("markov_valid");
    row.push_back(m.ratio);
    row.push_back(m.valid ? 1.0 : 0.0);
  }
  t.rows.push_back(row);
  return t;
}

ResultTable shift(const ExperimentConfig& cfg) {
  const auto [e1, e2] = emitters_for(cfg, cfg.geometry.thickness);
  const auto lens = lens_for(cfg);
  const auto r = collective::decay_rates(e1, e2, lens);
  auto spec = cfg.shift;
  spec.greens_quadrature = cfg.quadrature;
  const auto s = collective::dipole_dipole_shift(e1, e2, cfg.geometry, lens.material, spec);
  ResultTable t;
  t.columns = {"delta_omega", "error", "tail_bound", "gamma11", "gamma12", "delta_over_gamma11"};
  t.rows.push_back({s.delta_omega, s.error, s.tail_bound, r.gamma11, r.gamma12, s.delta_omega / r.gamma11});
  return t;
}

ResultTable dynamics_table(const ExperimentConfig& cfg) {
  const auto r = rates_for(cfg);
  const auto start = initial_state(cfg.dynamics.initial);
  ResultTable t;
  t.columns = {"time", "rho22", "rho_ss", "rho_aa", "rho11"};
  for (double time : cfg.sweep.grid) {
    const auto s = dynamics::evolve(start, r, time);
    t.rows.push_back({time, s.rho22, s.rho_ss, s.rho_aa, s.rho11});
  }
  return t;
}

ResultTable protocol(const ExperimentConfig& cfg) {
  const auto r = rates_for(cfg);
  ResultTable t;
  t.columns = {"t_wait", "success", "fidelity", "rho11"};
  for (double tw : cfg.sweep.grid) {
    const auto p = dynamics::entanglement_protocol(r, tw);
    t.rows.push_back({tw, p.success_probability, p.fidelity, p.state.rho11});
  }
  return t;
}

}  // namespace

ResultTable run_experiment(const ExperimentConfig& cfg, int threads) {
  if (threads < 1) throw ConfigError("thread count must be >= 1");
  ResultTable t;
  switch (cfg.experiment) {
    case Experiment::fig2: t = fig2(cfg, threads); break;
    case Experiment::loss_sweep: t = loss_sweep(cfg, threads); break;
    case Experiment::aperture_sweep: t = aperture_sweep(cfg, threads); break;
    case Experiment::spectrum: t = spectrum(cfg, threads); break;
    case Experiment::rates: t = rates(cfg); break;
    case Experiment::shift: t = shift(cfg); break;
    case Experiment::dynamics: t = dynamics_table(cfg); break;
    case Experiment::protocol: t = protocol(cfg); break;
  }
  t.metadata.emplace_back("lensqed", version);
  t.metadata.emplace_back("experiment", experiment_name(cfg.experiment));
  const std::string text = render(cfg);
  for (const auto& line : split(text, '\n'))
    if (!line.empty()) t.metadata.emplace_back("config", line);
  t.validate();
  return t;
}

}  // namespace lensqed::experiment
