#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "lensqed/errors.hpp"
#include "lensqed/experiment.hpp"
#include "numfmt.hpp"

namespace lensqed::experiment {

using Model = MaterialConfig::Model;

namespace {

const std::vector<std::pair<Experiment, std::string>> kExperiments = {
    {Experiment::fig2, "fig2"},         {Experiment::loss_sweep, "loss_sweep"},
    {Experiment::aperture_sweep, "aperture_sweep"}, {Experiment::spectrum, "spectrum"},
    {Experiment::rates, "rates"},       {Experiment::shift, "shift"},
    {Experiment::dynamics, "dynamics"}, {Experiment::protocol, "protocol"}};

const std::vector<std::pair<Model, std::string>> kModels = {{Model::ideal, "ideal"},
                                                             {Model::vacuum, "vacuum"},
                                                             {Model::index, "index"},
                                                             {Model::lorentz, "lorentz"},
                                                             {Model::fit, "fit"}};

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

using Section = std::map<std::string, Entry>;

// Collects violations instead of stopping at the first one.
class Reader {
public:
  std::map<std::string, Section> sections;
  std::vector<std::string> errors;

  bool has(const std::string& sec) const { return sections.count(sec) > 0; }

  Entry* find(const std::string& sec, const std::string& key) {
    auto s = sections.find(sec);
    if (s == sections.end()) return nullptr;
    auto e = s->second.find(key);
    if (e == s->second.end()) return nullptr;
    e->second.used = true;
    return &e->second;
  }

  std::string where(const std::string& sec, const std::string& key, const Entry& e) const {
    return "[" + sec + "] " + key + " (line " + std::to_string(e.line) + ")";
  }

  void number(const std::string& sec, const std::string& key, double& out) {
    if (Entry* e = find(sec, key)) {
      try {
        out = parse_double(e->value);
      } catch (const ConfigError& err) {
        errors.push_back(where(sec, key, *e) + ": " + err.what());
      }
    }
  }

  void optional_number(const std::string& sec, const std::string& key, std::optional<double>& out) {
    if (find(sec, key)) {
      double v = 0.0;
      number(sec, key, v);
      out = v;
    }
  }

  void integer(const std::string& sec, const std::string& key, int& out) {
    if (Entry* e = find(sec, key)) {
      const std::string t = trim(e->value);
      int v = 0;
      auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
      if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size())
        errors.push_back(where(sec, key, *e) + ": malformed integer '" + t + "'");
      else
        out = v;
    }
  }

  void boolean(const std::string& sec, const std::string& key, bool& out) {
    if (Entry* e = find(sec, key)) {
      const std::string t = trim(e->value);
      if (t == "true")
        out = true;
      else if (t == "false")
        out = false;
      else
        errors.push_back(where(sec, key, *e) + ": expected true or false");
    }
  }

  void text(const std::string& sec, const std::string& key, std::string& out) {
    if (Entry* e = find(sec, key)) out = trim(e->value);
  }

  void list(const std::string& sec, const std::string& key, std::vector<double>& out) {
    Entry* e = find(sec, key);
    if (!e) return;
    try {
      out = parse_list(e->value);
    } catch (const ConfigError& err) {
      errors.push_back(where(sec, key, *e) + ": " + err.what());
    }
  }

  void vector3(const std::string& sec, const std::string& key, Vec3& out) {
    Entry* e = find(sec, key);
    if (!e) return;
    std::vector<double> v;
    try {
      v = parse_list(e->value);
    } catch (const ConfigError& err) {
      errors.push_back(where(sec, key, *e) + ": " + err.what());
      return;
    }
    if (v.size() != 3)
      errors.push_back(where(sec, key, *e) + ": expected three components");
    else
      out = Vec3(v[0], v[1], v[2]);
  }

  // "a, b, c" or "linspace(start, stop, count)"
  static std::vector<double> parse_list(const std::string& raw) {
    const std::string t = trim(raw);
    if (t.rfind("linspace(", 0) == 0) {
      if (t.back() != ')') throw ConfigError("unterminated linspace(...)");
      const auto args = split(t.substr(9, t.size() - 10), ',');
      if (args.size() != 3) throw ConfigError("linspace needs (start, stop, count)");
      const double a = parse_double(args[0]);
      const double b = parse_double(args[1]);
      const double n = parse_double(args[2]);
      if (!(n >= 2.0) || n != std::floor(n)) throw ConfigError("linspace count must be an integer >= 2");
      const int count = static_cast<int>(n);
      std::vector<double> out(count);
      for (int i = 0; i < count; ++i) out[i] = a + (b - a) * static_cast<double>(i) / (count - 1);
      out.back() = b;
      return out;
    }
    std::vector<double> out;
    if (t.empty()) return out;
    for (const auto& item : split(t, ',')) out.push_back(parse_double(item));
    return out;
  }
};

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_exact(v[i]);
  }
  return out;
}

std::string join(const Vec3& v) { return join(std::vector<double>{v.x(), v.y(), v.z()}); }

bool strictly_increasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] > v[i - 1])) return false;
  return true;
}

std::string default_variable(Experiment e) {
  switch (e) {
    case Experiment::loss_sweep: return "im_n";
    case Experiment::aperture_sweep: return "a_over_d";
    case Experiment::spectrum: return "detuning";
    case Experiment::dynamics: return "time";
    case Experiment::protocol: return "t_wait";
    default: return "";
  }
}

std::vector<std::string> allowed_variables(Experiment e) {
  if (e == Experiment::fig2) return {"dx", "dz"};
  const auto v = default_variable(e);
  if (v.empty()) return {};
  return {v};
}

bool uses_sweep(Experiment e) { return !allowed_variables(e).empty(); }

}  // namespace

std::string experiment_name(Experiment e) {
  for (const auto& [k, n] : kExperiments)
    if (k == e) return n;
  return "?";
}

std::optional<Experiment> experiment_from_name(const std::string& name) {
  for (const auto& [k, n] : kExperiments)
    if (n == name) return k;
  return std::nullopt;
}

std::string model_name(Model m) {
  for (const auto& [k, n] : kModels)
    if (k == m) return n;
  return "?";
}

material::SlabMaterial MaterialConfig::build() const {
  using material::SlabMaterial;
  switch (model) {
    case Model::ideal: return SlabMaterial::ideal_lens();
    case Model::vacuum: return SlabMaterial::vacuum();
    case Model::index: return SlabMaterial::index_matched({n_real, n_imag});
    case Model::lorentz: return SlabMaterial::dispersive(eps, mu);
    case Model::fit: {
      material::FitOptions opts;
      opts.damping = damping;
      opts.background = background;
      const auto fit = material::fit_lens_material({n_real, n_imag}, alpha, opts);
      return SlabMaterial::dispersive(fit.eps, fit.mu);
    }
  }
  throw DomainError("unknown material model");
}

ExperimentConfig parse_config(const std::string& text, std::optional<Experiment> expected) {
  static const std::map<std::string, std::set<std::string>> known = {
      {"", {"experiment"}},
      {"geometry", {"thickness", "aperture_radius"}},
      {"material",
       {"model", "n_real", "n_imag", "alpha", "damping", "background", "eps_background", "eps_terms",
        "mu_background", "mu_terms"}},
      {"emitters", {"placement", "position1", "position2", "orientation", "linewidth"}},
      {"sweep", {"variable", "grid", "thicknesses"}},
      {"quadrature",
       {"rel_tol", "abs_tol", "evanescent_floor", "evanescent_cap", "max_depth", "max_intervals", "scan_points",
        "propagating_only"}},
      {"shift", {"omega_max", "window", "initial_panels", "rel_tol", "abs_tol"}},
      {"dynamics", {"initial"}},
      {"rates", {"gamma11", "gamma22", "gamma12", "delta_omega"}},
      {"output", {"path"}}};

  Reader rd;
  {
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line_no = 0;
    rd.sections[""];
    while (std::getline(in, raw)) {
      ++line_no;
      const auto hash = raw.find('#');
      const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') {
          rd.errors.push_back("line " + std::to_string(line_no) + ": malformed section header");
          continue;
        }
        section = trim(line.substr(1, line.size() - 2));
        if (!known.count(section) || section.empty())
          rd.errors.push_back("line " + std::to_string(line_no) + ": unknown section [" + section + "]");
        else if (rd.sections.count(section))
          rd.errors.push_back("line " + std::to_string(line_no) + ": duplicate section [" + section + "]");
        rd.sections[section];
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        rd.errors.push_back("line " + std::to_string(line_no) + ": expected key = value");
        continue;
      }
      const std::string key = trim(line.substr(0, eq));
      auto& sec = rd.sections[section];
      if (sec.count(key)) {
        rd.errors.push_back("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        continue;
      }
      sec[key] = Entry{trim(line.substr(eq + 1)), line_no, false};
    }
  }
  auto& errors = rd.errors;

  ExperimentConfig cfg;

  // experiment
  std::string name;
  rd.text("", "experiment", name);
  if (name.empty()) {
    if (expected)
      cfg.experiment = *expected;
    else
      errors.push_back("missing 'experiment' key");
  } else if (auto e = experiment_from_name(name)) {
    cfg.experiment = *e;
    if (expected && *expected != *e)
      errors.push_back("config experiment '" + name + "' does not match requested '" + experiment_name(*expected) + "'");
  } else {
    errors.push_back("unknown experiment '" + name + "'");
  }
  const Experiment ex = cfg.experiment;

  // geometry
  rd.number("geometry", "thickness", cfg.geometry.thickness);
  rd.optional_number("geometry", "aperture_radius", cfg.geometry.aperture_radius);
  if (rd.has("geometry") && !rd.find("geometry", "thickness")) errors.push_back("[geometry] thickness is required");
  if (!(cfg.geometry.thickness > 0.0) || !std::isfinite(cfg.geometry.thickness))
    errors.push_back("[geometry] thickness must be > 0 (got " + format_g(cfg.geometry.thickness) + ")");
  if (cfg.geometry.aperture_radius && !(*cfg.geometry.aperture_radius > 0.0))
    errors.push_back("[geometry] aperture_radius must be > 0");

  // material
  auto& mat = cfg.material;
  std::string model;
  if (ex == Experiment::loss_sweep) mat.model = Model::index;
  rd.text("material", "model", model);
  if (rd.has("material") && model.empty()) errors.push_back("[material] model is required");
  if (!model.empty()) {
    bool found = false;
    for (const auto& [k, n] : kModels)
      if (n == model) {
        mat.model = k;
        found = true;
      }
    if (!found) errors.push_back("[material] unknown model '" + model + "'");
  }
  rd.number("material", "n_real", mat.n_real);
  rd.number("material", "n_imag", mat.n_imag);
  rd.number("material", "alpha", mat.alpha);
  rd.number("material", "damping", mat.damping);
  rd.number("material", "background", mat.background);
  if (mat.n_imag < 0.0) errors.push_back("[material] n_imag must be >= 0");
  if (!(mat.alpha > 0.0)) errors.push_back("[material] alpha must be > 0");
  if (mat.damping < 0.0) errors.push_back("[material] damping must be >= 0");
  {
    std::map<std::string, std::string> block;
    for (const char* key : {"eps_background", "eps_terms", "mu_background", "mu_terms"})
      if (Entry* e = rd.find("material", key)) block[key] = e->value;
    if (mat.model == Model::lorentz) {
      try {
        std::tie(mat.eps, mat.mu) = material::from_config_block(block);
      } catch (const ConfigError& err) {
        for (const auto& v : err.violations()) errors.push_back("[material] " + v);
      } catch (const Error& err) {
        errors.push_back(std::string("[material] ") + err.what());
      }
    } else if (!block.empty()) {
      errors.push_back("[material] eps_*/mu_* keys need model = lorentz");
    }
    if (mat.model == Model::fit) {
      try {
        (void)mat.build();
      } catch (const Error& err) {
        errors.push_back(std::string("[material] fit: ") + err.what());
      }
    }
  }

  // emitters
  auto& em = cfg.emitters;
  std::string placement = "foci";
  rd.text("emitters", "placement", placement);
  if (placement == "foci")
    em.at_foci = true;
  else if (placement == "explicit")
    em.at_foci = false;
  else
    errors.push_back("[emitters] placement must be foci or explicit");
  rd.vector3("emitters", "orientation", em.orientation);
  if (!(std::abs(em.orientation.norm() - 1.0) < 1e-9)) errors.push_back("[emitters] orientation must be a unit vector");
  const bool p1 = rd.find("emitters", "position1") != nullptr;
  const bool p2 = rd.find("emitters", "position2") != nullptr;
  rd.vector3("emitters", "position1", em.position1);
  rd.vector3("emitters", "position2", em.position2);
  if (!em.at_foci && !(p1 && p2)) errors.push_back("[emitters] explicit placement needs position1 and position2");
  if (em.at_foci && (p1 || p2)) errors.push_back("[emitters] positions are only allowed with placement = explicit");
  rd.optional_number("emitters", "linewidth", em.linewidth);
  if (em.linewidth && !(*em.linewidth > 0.0)) errors.push_back("[emitters] linewidth must be > 0");

  // sweep
  auto& sw = cfg.sweep;
  rd.text("sweep", "variable", sw.variable);
  rd.list("sweep", "grid", sw.grid);
  rd.list("sweep", "thicknesses", sw.thicknesses);
  if (uses_sweep(ex)) {
    if (sw.variable.empty()) sw.variable = default_variable(ex);
    const auto allowed = allowed_variables(ex);
    if (std::find(allowed.begin(), allowed.end(), sw.variable) == allowed.end())
      errors.push_back("[sweep] variable '" + sw.variable + "' is not valid for " + experiment_name(ex));
    if (sw.grid.empty()) errors.push_back("[sweep] grid is required for " + experiment_name(ex));
  }
  if (!strictly_increasing(sw.grid)) errors.push_back("[sweep] grid must be strictly increasing");
  for (double v : sw.grid)
    if (!std::isfinite(v)) errors.push_back("[sweep] grid values must be finite");
  if ((ex == Experiment::loss_sweep || ex == Experiment::dynamics || ex == Experiment::protocol) && !sw.grid.empty() &&
      sw.grid.front() < 0.0)
    errors.push_back("[sweep] grid values must be >= 0 for " + experiment_name(ex));
  if (ex == Experiment::aperture_sweep && !sw.grid.empty() && !(sw.grid.front() > 0.0))
    errors.push_back("[sweep] a_over_d values must be > 0");
  if (sw.thicknesses.empty()) {
    if (ex == Experiment::loss_sweep) sw.thicknesses = {100.0, 10.0, 1.0};
    if (ex == Experiment::spectrum) sw.thicknesses = {1.0, 0.2};
  }
  for (double d : sw.thicknesses)
    if (!(d > 0.0)) errors.push_back("[sweep] thicknesses must be > 0");

  // quadrature
  auto& q = cfg.quadrature;
  rd.number("quadrature", "rel_tol", q.rel_tol);
  rd.number("quadrature", "abs_tol", q.abs_tol);
  rd.number("quadrature", "evanescent_floor", q.evanescent_floor);
  rd.number("quadrature", "evanescent_cap", q.evanescent_cap);
  rd.integer("quadrature", "max_depth", q.max_depth);
  rd.integer("quadrature", "max_intervals", q.max_intervals);
  rd.integer("quadrature", "scan_points", q.scan_points);
  rd.boolean("quadrature", "propagating_only", q.propagating_only);
  try {
    q.validate();
  } catch (const ConfigError& err) {
    for (const auto& v : err.violations()) errors.push_back("[quadrature] " + v);
  }

  // shift
  auto& sh = cfg.shift;
  rd.number("shift", "omega_max", sh.omega_max);
  rd.number("shift", "window", sh.window);
  rd.integer("shift", "initial_panels", sh.initial_panels);
  rd.number("shift", "rel_tol", sh.rel_tol);
  rd.number("shift", "abs_tol", sh.abs_tol);
  try {
    sh.validate();
  } catch (const ConfigError& err) {
    for (const auto& v : err.violations()) errors.push_back("[shift] " + v);
  }

  // dynamics and rates
  rd.text("dynamics", "initial", cfg.dynamics.initial);
  if (!std::set<std::string>{"22", "21", "s", "a", "11"}.count(cfg.dynamics.initial))
    errors.push_back("[dynamics] initial must be one of 22, 21, s, a, 11");
  if (rd.has("rates")) {
    collective::CollectiveRates r;
    if (!rd.find("rates", "gamma11")) errors.push_back("[rates] gamma11 is required");
    rd.number("rates", "gamma11", r.gamma11);
    r.gamma22 = r.gamma11;
    rd.number("rates", "gamma22", r.gamma22);
    rd.number("rates", "gamma12", r.gamma12);
    rd.number("rates", "delta_omega", r.delta_omega);
    if (!r.positive_semidefinite(1e-12))
      errors.push_back("[rates] need gamma11, gamma22 > 0 and |gamma12| <= sqrt(gamma11 gamma22)");
    cfg.dynamics.rates = r;
  }

  rd.text("output", "path", cfg.output);

  // required blocks
  auto require = [&](const char* sec) {
    if (!rd.has(sec)) errors.push_back("missing required block [" + std::string(sec) + "] for " + experiment_name(ex));
  };
  switch (ex) {
    case Experiment::fig2:
      require("geometry");
      require("material");
      require("sweep");
      break;
    case Experiment::loss_sweep:
    case Experiment::spectrum:
      require("sweep");
      break;
    case Experiment::aperture_sweep:
      require("geometry");
      require("sweep");
      break;
    case Experiment::rates:
    case Experiment::shift:
      require("geometry");
      require("material");
      break;
    case Experiment::dynamics:
    case Experiment::protocol:
      require("sweep");
      if (!rd.has("rates")) {
        require("geometry");
        require("material");
      }
      break;
  }
  if (ex == Experiment::loss_sweep && rd.has("material") && mat.model != Model::index)
    errors.push_back("[material] loss_sweep takes model = index (the swept Im n replaces n_imag)");

  for (const auto& [sec, entries] : rd.sections) {
    const auto k = known.find(sec);
    for (const auto& [key, e] : entries)
      if (!e.used && (k == known.end() || !k->second.count(key)))
        errors.push_back((sec.empty() ? std::string() : "[" + sec + "] ") + "unknown key '" + key + "' (line " +
                         std::to_string(e.line) + ")");
  }

  if (!errors.empty()) throw ConfigError(errors);
  return cfg;
}

std::string render(const ExperimentConfig& cfg) {
  std::ostringstream out;
  auto kv = [&](const std::string& k, const std::string& v) { out << k << " = " << v << "\n"; };
  kv("experiment", experiment_name(cfg.experiment));

  out << "\n[geometry]\n";
  kv("thickness", format_exact(cfg.geometry.thickness));
  if (cfg.geometry.aperture_radius) kv("aperture_radius", format_exact(*cfg.geometry.aperture_radius));

  const auto& m = cfg.material;
  out << "\n[material]\n";
  kv("model", model_name(m.model));
  kv("n_real", format_exact(m.n_real));
  kv("n_imag", format_exact(m.n_imag));
  kv("alpha", format_exact(m.alpha));
  kv("damping", format_exact(m.damping));
  kv("background", format_exact(m.background));
  if (m.model == Model::lorentz)
    for (const auto& [k, v] : material::to_config_block(m.eps, m.mu)) kv(k, v);

  const auto& em = cfg.emitters;
  out << "\n[emitters]\n";
  kv("placement", em.at_foci ? "foci" : "explicit");
  if (!em.at_foci) {
    kv("position1", join(em.position1));
    kv("position2", join(em.position2));
  }
  kv("orientation", join(em.orientation));
  if (em.linewidth) kv("linewidth", format_exact(*em.linewidth));

  const auto& sw = cfg.sweep;
  if (!sw.variable.empty() || !sw.grid.empty() || !sw.thicknesses.empty()) {
    out << "\n[sweep]\n";
    if (!sw.variable.empty()) kv("variable", sw.variable);
    if (!sw.grid.empty()) kv("grid", join(sw.grid));
    if (!sw.thicknesses.empty()) kv("thicknesses", join(sw.thicknesses));
  }

  const auto& q = cfg.quadrature;
  out << "\n[quadrature]\n";
  kv("rel_tol", format_exact(q.rel_tol));
  kv("abs_tol", format_exact(q.abs_tol));
  kv("evanescent_floor", format_exact(q.evanescent_floor));
  kv("evanescent_cap", format_exact(q.evanescent_cap));
  kv("max_depth", std::to_string(q.max_depth));
  kv("max_intervals", std::to_string(q.max_intervals));
  kv("scan_points", std::to_string(q.scan_points));
  kv("propagating_only", q.propagating_only ? "true" : "false");

  const auto& sh = cfg.shift;
  out << "\n[shift]\n";
  kv("omega_max", format_exact(sh.omega_max));
  kv("window", format_exact(sh.window));
  kv("initial_panels", std::to_string(sh.initial_panels));
  kv("rel_tol", format_exact(sh.rel_tol));
  kv("abs_tol", format_exact(sh.abs_tol));

  out << "\n[dynamics]\n";
  kv("initial", cfg.dynamics.initial);
  if (const auto& r = cfg.dynamics.rates) {
    out << "\n[rates]\n";
    kv("gamma11", format_exact(r->gamma11));
    kv("gamma22", format_exact(r->gamma22));
    kv("gamma12", format_exact(r->gamma12));
    kv("delta_omega", format_exact(r->delta_omega));
  }

  if (!cfg.output.empty()) {
    out << "\n[output]\n";
    kv("path", cfg.output);
  }
  return out.str();
}

}  // namespace lensqed::experiment
