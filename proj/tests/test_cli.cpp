#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "lensqed/errors.hpp"
#include "lensqed/experiment.hpp"
#include "lensqed/lensqed.h"

using namespace lensqed;
using namespace lensqed::experiment;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "lensqed_test_cli";
  fs::create_directories(dir);
  return dir / name;
}

fs::path write_file(const std::string& name, const std::string& text) {
  const auto p = scratch(name);
  std::ofstream(p) << text;
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(LENSQED_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string without_timestamp(const std::string& text) {
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line))
    if (line.rfind("# timestamp:", 0) != 0) out += line + "\n";
  return out;
}

std::vector<std::string> violations_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.violations();
  }
  return {};
}

bool mentions(const std::vector<std::string>& v, const std::string& needle) {
  for (const auto& s : v)
    if (s.find(needle) != std::string::npos) return true;
  return false;
}

const char* kMinimalRates = "experiment = rates\n[geometry]\nthickness = 10\n[material]\nmodel = ideal\n";

}  // namespace

TEST_CASE("shipped configs parse and round trip") {
  int count = 0;
  for (const auto& entry : fs::directory_iterator(LENSQED_CONFIG_DIR)) {
    if (entry.path().extension() != ".cfg") continue;
    CAPTURE(entry.path().string());
    const auto cfg = parse_config(slurp(entry.path()));
    const auto again = parse_config(render(cfg));
    CHECK(again == cfg);
    CHECK(render(again) == render(cfg));
    ++count;
  }
  CHECK(count >= 8);
}

TEST_CASE("minimal config and defaults") {
  const auto cfg = parse_config(kMinimalRates);
  CHECK(cfg.experiment == Experiment::rates);
  CHECK(cfg.geometry.thickness == 10.0);
  CHECK(cfg.material.model == MaterialConfig::Model::ideal);
  CHECK(cfg.emitters.at_foci);
  CHECK(cfg.quadrature == greens::QuadratureSpec{});
  CHECK(parse_config(render(cfg)) == cfg);

  const auto no_name = parse_config("[geometry]\nthickness = 10\n[material]\nmodel = ideal\n", Experiment::rates);
  CHECK(no_name == cfg);
  CHECK_THROWS_AS(parse_config(kMinimalRates, Experiment::shift), ConfigError);
}

TEST_CASE("round trip of edited configs") {
  auto cfg = parse_config(kMinimalRates);
  cfg.geometry.aperture_radius = 7.25;
  cfg.material.model = MaterialConfig::Model::lorentz;
  cfg.material.eps = material::LorentzModel({{0.2, 0.9, 1e-6}}, 1.5);
  cfg.material.mu = material::LorentzModel({{0.1 + 0.2, 0.3, 0.0}});
  cfg.emitters.at_foci = false;
  cfg.emitters.position1 = Vec3(0.1, 1.0 / 3.0, 5.0);
  cfg.emitters.position2 = Vec3(0.0, 0.0, -15.0);
  cfg.emitters.orientation = Vec3(0.6, 0.0, 0.8);
  cfg.emitters.linewidth = 2.5e-8;
  cfg.quadrature.rel_tol = 3.3e-9;
  cfg.quadrature.propagating_only = true;
  cfg.shift.omega_max = 12.0;
  cfg.output = "out.csv";
  CHECK(parse_config(render(cfg)) == cfg);
}

TEST_CASE("validation errors") {
  auto v = violations_of("experiment = rates\n[geometry]\nthickness = -1\n[material]\nmodel = ideal\n");
  CHECK(mentions(v, "thickness"));

  v = violations_of(
      "experiment = fig2\n[geometry]\nthickness = 30\n[material]\nmodel = ideal\n[sweep]\nvariable = dz\ngrid = 0.1, 0.1\n");
  CHECK(mentions(v, "grid"));

  v = violations_of(std::string(kMinimalRates) + "colour = blue\n[extras]\nx = 1\n");
  CHECK(mentions(v, "colour"));
  CHECK(mentions(v, "extras"));
  CHECK(v.size() >= 2);

  v = violations_of("experiment = rates\n[geometry]\nthickness = 1O\n");
  CHECK(mentions(v, "thickness"));
  CHECK(mentions(v, "material"));

  v = violations_of("experiment = teleport\n");
  CHECK(mentions(v, "teleport"));

  v = violations_of(std::string(kMinimalRates) + "[geometry]\nthickness = 3\n");
  CHECK_FALSE(v.empty());

  v = violations_of("experiment = dynamics\n[sweep]\ngrid = 0, 1\n");
  CHECK_FALSE(v.empty());
}

TEST_CASE("run fig2 and the ideal limits") {
  auto cfg = parse_config(
      "experiment = fig2\n[geometry]\nthickness = 30\n[material]\nmodel = ideal\n[sweep]\nvariable = dz\n"
      "grid = -3.141592653589793, 0, 3.141592653589793\n");
  const auto t = run_experiment(cfg);
  REQUIRE(t.rows.size() == 3);
  CHECK(t.columns == std::vector<std::string>{"dz", "ratio", "free_space"});
  CHECK(t.rows[1][1] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(t.rows[0][1] == doctest::Approx(-3.0 / (2.0 * pi * pi)).epsilon(1e-5));
  for (const auto& row : t.rows) CHECK(row[1] == doctest::Approx(row[2]).epsilon(1e-4).scale(1.0));

  const auto loss = run_experiment(parse_config("experiment = loss_sweep\n[sweep]\ngrid = 0\n"));
  CHECK(loss.columns.size() == 4);
  for (std::size_t c = 1; c < 4; ++c) CHECK(loss.rows[0][c] == doctest::Approx(1.0).epsilon(1e-6));

  const auto ap = run_experiment(
      parse_config("experiment = aperture_sweep\n[geometry]\nthickness = 10\n[sweep]\ngrid = 2\n"));
  CHECK(ap.rows[0][1] == doctest::Approx(0.815).epsilon(1e-3));
  CHECK(ap.rows[0][2] == doctest::Approx(ap.rows[0][1]).epsilon(1e-8));

  const auto pr = run_experiment(parse_config(slurp(fs::path(LENSQED_CONFIG_DIR) / "protocol.cfg")));
  CHECK(pr.rows.back()[1] == doctest::Approx(0.5).epsilon(1e-4));
}

TEST_CASE("failures carry the grid point") {
  // d = 1: a displacement of +1 puts emitter 2 inside the slab
  auto cfg = parse_config(
      "experiment = fig2\n[geometry]\nthickness = 1\n[material]\nmodel = ideal\n[sweep]\nvariable = dz\n"
      "grid = 0, 1\n");
  try {
    run_experiment(cfg, 2);
    FAIL("expected a domain error");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("dz = 1") != std::string::npos);
  }
}

TEST_CASE("table format") {
  ResultTable t;
  t.columns = {"a", "b"};
  t.rows = {{1.0, -0.0}, {1.0 / 3.0, 2e-20}};
  t.metadata = {{"lensqed", "x"}};
  const std::string text = format_table(t, "T");
  CHECK(text == "# lensqed: x\n# timestamp: T\na,b\n1,0\n0.333333333333,2e-20\n");

  t.rows[1][1] = NAN;
  CHECK_THROWS_AS(format_table(t, "T"), DomainError);
  t.rows[1] = {1.0};
  CHECK_THROWS_AS(t.validate(), DomainError);

  ResultTable ok;
  ok.columns = {"x"};
  CHECK_THROWS_AS(write_table(ok, "/nonexistent-dir/out.csv"), IoError);
}

TEST_CASE("metadata echoes the effective config and output is thread independent") {
  const auto cfg = parse_config(slurp(fs::path(LENSQED_CONFIG_DIR) / "aperture_sweep.cfg"));
  const auto one = run_experiment(cfg, 1);
  const auto four = run_experiment(cfg, 4);
  CHECK(format_table(one, "T") == format_table(four, "T"));
  bool has_tol = false, has_version = false;
  for (const auto& [k, v] : one.metadata) {
    if (k == "config" && v.find("rel_tol") != std::string::npos) has_tol = true;
    if (k == "lensqed") has_version = true;
  }
  CHECK(has_tol);
  CHECK(has_version);
}

TEST_CASE("C API") {
  CHECK(std::string(lq_version()).size() > 0);
  lq_config* cfg = nullptr;
  REQUIRE(lq_config_parse(kMinimalRates, nullptr, &cfg) == LQ_OK);
  CHECK(std::string(lq_config_experiment(cfg)) == "rates");
  CHECK(lq_config_set_tolerance(cfg, 1e-9) == LQ_OK);
  CHECK(lq_config_set_tolerance(cfg, -1.0) == LQ_ERR_CONFIG);
  char* text = nullptr;
  REQUIRE(lq_config_render(cfg, &text) == LQ_OK);
  CHECK(std::string(text).find("rel_tol = 1e-09") != std::string::npos);
  lq_string_free(text);

  lq_table* table = nullptr;
  REQUIRE(lq_run(cfg, 1, &table) == LQ_OK);
  CHECK(lq_table_rows(table) == 1);
  CHECK(std::string(lq_table_column_name(table, 3)) == "ratio");
  double ratio = 0.0;
  CHECK(lq_table_value(table, 0, 3, &ratio) == LQ_OK);
  CHECK(ratio == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(lq_table_value(table, 5, 0, &ratio) == LQ_ERR_ARGUMENT);
  CHECK(lq_table_column_name(table, 99) == nullptr);
  const auto out = scratch("capi.csv");
  CHECK(lq_table_write(table, out.c_str()) == LQ_OK);
  CHECK(slurp(out).find("gamma11,gamma22,gamma12,ratio") != std::string::npos);
  CHECK(lq_table_write(table, "/nonexistent-dir/x.csv") == LQ_ERR_IO);
  lq_table_free(table);
  lq_config_free(cfg);

  lq_config* bad = nullptr;
  CHECK(lq_config_parse("experiment = rates\nfoo = 1\n", nullptr, &bad) == LQ_ERR_CONFIG);
  CHECK(bad == nullptr);
  CHECK(std::string(lq_last_error()).find("foo") != std::string::npos);
  CHECK(lq_config_parse(nullptr, nullptr, &bad) == LQ_ERR_ARGUMENT);
  CHECK(std::string(lq_status_name(LQ_ERR_NUMERICAL)).size() > 0);

  const double p1[3] = {0, 0, 5}, p2[3] = {0, 0, -15}, x[3] = {1, 0, 0};
  lq_rates r{};
  REQUIRE(lq_decay_rates(10.0, -1.0, 0.0, p1, p2, x, &r) == LQ_OK);
  CHECK(r.gamma12 / r.gamma11 == doctest::Approx(1.0).epsilon(1e-6));
  const double inside[3] = {0, 0, -5};
  CHECK(lq_decay_rates(10.0, -1.0, 0.0, p1, inside, x, &r) == LQ_ERR_DOMAIN);

  const double sep[3] = {0, 0, pi};
  double v = 0.0;
  CHECK(lq_free_space_cross_rate(sep, x, &v) == LQ_OK);
  CHECK(v == doctest::Approx(-3.0 / (2.0 * pi * pi)));
  CHECK(lq_aperture_rate_ratio(2.0, 1.0, &v) == LQ_OK);
  CHECK(v == doctest::Approx(0.814531580855).epsilon(1e-10));

  const lq_populations s0{0.0, 0.5, 0.5, 0.0};
  const lq_rates perfect{1.0, 1.0, 1.0, 0.0};
  lq_populations s{};
  CHECK(lq_evolve(&s0, &perfect, 10.0, &s) == LQ_OK);
  CHECK(s.rho_aa == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(lq_evolve(&s0, &perfect, -1.0, &s) == LQ_ERR_DOMAIN);
  CHECK(lq_evolve(nullptr, &perfect, 1.0, &s) == LQ_ERR_ARGUMENT);
}

TEST_CASE("command line exit codes") {
  const auto good = write_file("good.cfg", kMinimalRates);
  const auto out = scratch("good.csv");
  fs::remove(out);
  CHECK(run_cli("rates --config " + good.string() + " --out " + out.string()) == 0);
  CHECK(slurp(out).find("# experiment: rates") != std::string::npos);

  const auto invalid = write_file("invalid.cfg", "experiment = rates\n[geometry]\nthickness = -2\n");
  CHECK(run_cli("rates --config " + invalid.string()) == 1);
  CHECK(run_cli("shift --config " + good.string()) == 1);
  CHECK(run_cli("rates") == 1);
  CHECK(run_cli("rates --config " + good.string() + " --tolerance 2") == 1);
  CHECK(run_cli("rates --config /nonexistent.cfg") == 1);
  CHECK(run_cli("rates --config " + good.string() + " --out /nonexistent-dir/x.csv") == 1);

  // evanescent spectrum of a lossy thin lens cut far too early
  const auto trunc = write_file("trunc.cfg",
                                "experiment = rates\n[geometry]\nthickness = 1\n[material]\nmodel = index\n"
                                "n_real = -1\nn_imag = 0.01\n[quadrature]\nevanescent_cap = 1.5\n");
  CHECK(run_cli("rates --config " + trunc.string()) == 2);
}

TEST_CASE("command line output is deterministic across thread counts") {
  const auto cfg = fs::path(LENSQED_CONFIG_DIR) / "fig2_dx.cfg";
  const auto path = scratch("fig2.csv");
  REQUIRE(run_cli("fig2 --config " + cfg.string() + " --out " + path.string() + " --threads 1") == 0);
  const std::string first = slurp(path);
  REQUIRE(run_cli("fig2 --config " + cfg.string() + " --out " + path.string() + " --threads 3") == 0);
  CHECK(without_timestamp(first) == without_timestamp(slurp(path)));
  CHECK(first.find("# timestamp:") != std::string::npos);
}
