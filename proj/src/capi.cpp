#include "lensqed/lensqed.h"

#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "lensqed/errors.hpp"
#include "lensqed/experiment.hpp"
#include "lensqed/version.hpp"

struct lq_config {
  lensqed::experiment::ExperimentConfig cfg;
  std::string experiment;
};

struct lq_table {
  lensqed::experiment::ResultTable table;
};

namespace {

thread_local std::string last_error;

lq_status fail(lq_status s, const std::string& msg) {
  last_error = msg;
  return s;
}

template <class F>
lq_status guarded(F&& f) {
  using namespace lensqed;
  try {
    last_error.clear();
    f();
    return LQ_OK;
  } catch (const ConfigError& e) {
    return fail(LQ_ERR_CONFIG, e.what());
  } catch (const DomainError& e) {
    return fail(LQ_ERR_DOMAIN, e.what());
  } catch (const NumericalError& e) {
    return fail(LQ_ERR_NUMERICAL, e.what());
  } catch (const IoError& e) {
    return fail(LQ_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(LQ_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(LQ_ERR_INTERNAL, "unknown exception");
  }
}

std::optional<lensqed::experiment::Experiment> expected_experiment(const char* name) {
  if (!name) return std::nullopt;
  auto e = lensqed::experiment::experiment_from_name(name);
  if (!e) throw lensqed::ConfigError(std::string("unknown experiment '") + name + "'");
  return e;
}

lensqed::Vec3 vec(const double* v) { return {v[0], v[1], v[2]}; }

}  // namespace

extern "C" {

const char* lq_version(void) { return lensqed::version; }

const char* lq_last_error(void) { return last_error.c_str(); }

const char* lq_status_name(lq_status status) {
  switch (status) {
    case LQ_OK: return "ok";
    case LQ_ERR_ARGUMENT: return "invalid argument";
    case LQ_ERR_CONFIG: return "configuration error";
    case LQ_ERR_DOMAIN: return "domain error";
    case LQ_ERR_NUMERICAL: return "numerical failure";
    case LQ_ERR_IO: return "i/o error";
    case LQ_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

lq_status lq_config_parse(const char* text, const char* experiment, lq_config** out) {
  if (!text || !out) return fail(LQ_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto cfg = lensqed::experiment::parse_config(text, expected_experiment(experiment));
    *out = new lq_config{cfg, lensqed::experiment::experiment_name(cfg.experiment)};
  });
}

lq_status lq_config_load(const char* path, const char* experiment, lq_config** out) {
  if (!path || !out) return fail(LQ_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  std::ifstream f(path, std::ios::binary);
  if (!f) return fail(LQ_ERR_IO, std::string("cannot read config '") + path + "'");
  std::ostringstream text;
  text << f.rdbuf();
  return lq_config_parse(text.str().c_str(), experiment, out);
}

lq_status lq_config_set_tolerance(lq_config* cfg, double rel_tol) {
  if (!cfg) return fail(LQ_ERR_ARGUMENT, "null config");
  if (!(rel_tol > 0.0) || !(rel_tol < 1.0)) return fail(LQ_ERR_CONFIG, "tolerance must lie in (0, 1)");
  cfg->cfg.quadrature.rel_tol = rel_tol;
  return LQ_OK;
}

lq_status lq_config_set_output(lq_config* cfg, const char* path) {
  if (!cfg || !path) return fail(LQ_ERR_ARGUMENT, "null argument");
  cfg->cfg.output = path;
  return LQ_OK;
}

const char* lq_config_output(const lq_config* cfg) { return cfg ? cfg->cfg.output.c_str() : ""; }

const char* lq_config_experiment(const lq_config* cfg) { return cfg ? cfg->experiment.c_str() : ""; }

lq_status lq_config_render(const lq_config* cfg, char** out) {
  if (!cfg || !out) return fail(LQ_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    const std::string text = lensqed::experiment::render(cfg->cfg);
    char* buf = new char[text.size() + 1];
    std::memcpy(buf, text.c_str(), text.size() + 1);
    *out = buf;
  });
}

void lq_config_free(lq_config* cfg) { delete cfg; }

void lq_string_free(char* s) { delete[] s; }

lq_status lq_run(const lq_config* cfg, int threads, lq_table** out) {
  if (!cfg || !out) return fail(LQ_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new lq_table{lensqed::experiment::run_experiment(cfg->cfg, threads)}; });
}

size_t lq_table_rows(const lq_table* table) { return table ? table->table.rows.size() : 0; }

size_t lq_table_columns(const lq_table* table) { return table ? table->table.columns.size() : 0; }

const char* lq_table_column_name(const lq_table* table, size_t column) {
  if (!table || column >= table->table.columns.size()) return nullptr;
  return table->table.columns[column].c_str();
}

lq_status lq_table_value(const lq_table* table, size_t row, size_t column, double* out) {
  if (!table || !out) return fail(LQ_ERR_ARGUMENT, "null argument");
  if (row >= table->table.rows.size() || column >= table->table.columns.size())
    return fail(LQ_ERR_ARGUMENT, "table index out of range");
  *out = table->table.rows[row][column];
  return LQ_OK;
}

lq_status lq_table_write(const lq_table* table, const char* path) {
  if (!table || !path) return fail(LQ_ERR_ARGUMENT, "null argument");
  return guarded([&] { lensqed::experiment::write_table(table->table, path); });
}

void lq_table_free(lq_table* table) { delete table; }

lq_status lq_decay_rates(double thickness, double n_real, double n_imag, const double position1[3],
                         const double position2[3], const double orientation[3], lq_rates* out) {
  if (!position1 || !position2 || !orientation || !out) return fail(LQ_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    using namespace lensqed;
    collective::LensSetup lens{{thickness, std::nullopt}, material::SlabMaterial::index_matched({n_real, n_imag}), {}};
    const auto r = collective::decay_rates({vec(position1), vec(orientation)}, {vec(position2), vec(orientation)}, lens);
    *out = {r.gamma11, r.gamma22, r.gamma12, r.delta_omega};
  });
}

lq_status lq_free_space_cross_rate(const double separation[3], const double orientation[3], double* out) {
  if (!separation || !orientation || !out) return fail(LQ_ERR_ARGUMENT, "null argument");
  return guarded([&] { *out = lensqed::collective::free_space_cross_rate(vec(separation), vec(orientation)); });
}

lq_status lq_aperture_rate_ratio(double radius, double thickness, double* out) {
  if (!out) return fail(LQ_ERR_ARGUMENT, "null argument");
  return guarded([&] { *out = lensqed::collective::aperture_rate_ratio(radius, thickness); });
}

lq_status lq_evolve(const lq_populations* initial, const lq_rates* rates, double t, lq_populations* out) {
  if (!initial || !rates || !out) return fail(LQ_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    using namespace lensqed;
    const dynamics::TwoAtomState s0{initial->rho22, initial->rho_ss, initial->rho_aa, initial->rho11};
    const collective::CollectiveRates r{rates->gamma11, rates->gamma22, rates->gamma12, rates->delta_omega};
    const auto s = dynamics::evolve(s0, r, t);
    *out = {s.rho22, s.rho_ss, s.rho_aa, s.rho11};
  });
}

}  // extern "C"
