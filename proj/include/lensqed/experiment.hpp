// Batch experiments: line-oriented config, dispatch, CSV result tables.
#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lensqed/collective.hpp"
#include "lensqed/dynamics.hpp"

namespace lensqed::experiment {

enum class Experiment { fig2, loss_sweep, aperture_sweep, spectrum, rates, shift, dynamics, protocol };

std::string experiment_name(Experiment e);
std::optional<Experiment> experiment_from_name(const std::string& name);

struct MaterialConfig {
  enum class Model { ideal, vacuum, index, lorentz, fit };
  Model model = Model::ideal;
  double n_real = -1.0;
  double n_imag = 0.0;
  double alpha = 45.0;    // fit target Re dn/d omega, and the spectrum slope
  double damping = 1e-6;  // fit damping for a real target index
  double background = 1.0;
  material::LorentzModel eps;  // lorentz
  material::LorentzModel mu;

  material::SlabMaterial build() const;
  bool operator==(const MaterialConfig&) const = default;
};

std::string model_name(MaterialConfig::Model m);

struct EmitterConfig {
  bool at_foci = true;
  Vec3 position1 = Vec3::Zero();
  Vec3 position2 = Vec3::Zero();
  Vec3 orientation = Vec3::UnitX();
  std::optional<double> linewidth;  // free-space rate in units of omega0, enables the Markov column

  bool operator==(const EmitterConfig&) const = default;
};

struct SweepConfig {
  std::string variable;
  std::vector<double> grid;
  std::vector<double> thicknesses;  // loss_sweep and spectrum

  bool operator==(const SweepConfig&) const = default;
};

struct DynamicsConfig {
  std::string initial = "21";  // 22, 21, s, a, 11
  std::optional<collective::CollectiveRates> rates;  // given directly instead of computed

  bool operator==(const DynamicsConfig&) const = default;
};

struct ExperimentConfig {
  Experiment experiment = Experiment::rates;
  greens::SlabGeometry geometry;
  MaterialConfig material;
  EmitterConfig emitters;
  SweepConfig sweep;
  greens::QuadratureSpec quadrature;
  collective::ShiftSpec shift;  // greens_quadrature is ignored; runs use `quadrature`
  DynamicsConfig dynamics;
  std::string output;

  bool operator==(const ExperimentConfig&) const = default;
};

// Throws ConfigError listing every violation. When `expected` is given the
// experiment key may be omitted, and must match if present.
ExperimentConfig parse_config(const std::string& text, std::optional<Experiment> expected = std::nullopt);
std::string render(const ExperimentConfig& cfg);

struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::pair<std::string, std::string>> metadata;

  void validate() const;
};

ResultTable run_experiment(const ExperimentConfig& cfg, int threads = 1);

// CSV with '#' metadata lines; path "-" is standard output. The line
// starting "# timestamp" is the only part that varies between identical runs.
void write_table(const ResultTable& table, const std::string& path);
std::string format_table(const ResultTable& table, const std::string& timestamp);

}  // namespace lensqed::experiment
