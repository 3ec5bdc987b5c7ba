// lensqed <experiment> --config FILE [--out FILE] [--tolerance X] [--threads N]
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "lensqed/lensqed.h"

namespace {

int exit_code(lq_status s) {
  switch (s) {
    case LQ_OK: return 0;
    case LQ_ERR_NUMERICAL:
    case LQ_ERR_INTERNAL: return 2;
    default: return 1;
  }
}

int report(lq_status s) {
  std::fprintf(stderr, "lensqed: %s: %s\n", lq_status_name(s), lq_last_error());
  return exit_code(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Green's tensor, collective decay and dynamics experiments around a slab lens"};
  app.set_version_flag("--version", lq_version());
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  double tolerance = 0.0;
  int threads = 1;

  const char* names[] = {"fig2", "loss_sweep", "aperture_sweep", "spectrum", "rates", "shift", "dynamics", "protocol"};
  for (const char* name : names) {
    auto* sub = app.add_subcommand(name, std::string("run the ") + name + " experiment");
    sub->add_option("--config", config_path, "experiment config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_path, "output CSV path, '-' for stdout (overrides [output] path)");
    sub->add_option("--tolerance", tolerance, "relative quadrature tolerance")->check(CLI::Range(1e-15, 0.5));
    sub->add_option("--threads", threads, "worker threads for sweeps")->check(CLI::Range(1, 1024));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  const std::string experiment = app.get_subcommands().front()->get_name();

  lq_config* cfg = nullptr;
  lq_status s = lq_config_load(config_path.c_str(), experiment.c_str(), &cfg);
  if (s != LQ_OK) return report(s);
  if (tolerance > 0.0 && (s = lq_config_set_tolerance(cfg, tolerance)) != LQ_OK) {
    lq_config_free(cfg);
    return report(s);
  }
  if (!out_path.empty()) lq_config_set_output(cfg, out_path.c_str());
  std::string target = lq_config_output(cfg);
  if (target.empty()) target = "-";

  lq_table* table = nullptr;
  s = lq_run(cfg, threads, &table);
  lq_config_free(cfg);
  if (s != LQ_OK) return report(s);
  s = lq_table_write(table, target.c_str());
  lq_table_free(table);
  if (s != LQ_OK) return report(s);
  if (target != "-") std::fprintf(stderr, "lensqed: wrote %s\n", target.c_str());
  return 0;
}
