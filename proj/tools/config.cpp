#include "config.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "linkvar/error.hpp"

namespace linkvar::tools {

namespace pt = boost::property_tree;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorKind::ConfigError, msg); }

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"run", {"seed", "threads", "out"}},
      {"problem", {"N", "K", "a", "lambda", "lambda_fraction"}},
      {"potential", {"kind", "V0", "table", "base", "amp", "width", "z_amp"}},
      {"nonlinearity", {"f", "g", "p", "q", "rho"}},
      {"grid", {"Nr", "Nz", "Rmax", "Zhalf"}},
      {"spectral",
       {"dense_limit", "extra_positive", "gap_rel", "guard", "polish_steps", "max_polish_steps",
        "seed", "hardy_samples"}},
      {"geometry",
       {"starts", "descent_steps", "ascent_steps", "bisection_steps", "max_halvings",
        "sphere_resamples", "delta_samples", "ray_samples", "kappa_samples", "k_search_depth"}},
      {"solver",
       {"tol_solve", "envelope_tol", "max_outer", "max_refine", "inner_starts", "inner_max_iter",
        "inner_kkt"}},
      {"maxwell", {"omega", "lattice", "export_lattice", "t_samples", "snapshot"}},
      {"toy", {"n_plus", "n_minus", "p", "q", "lambda", "density", "directions", "a4_samples", "tol"}},
  };
  return s;
}

using LineMap = std::map<std::pair<std::string, std::string>, int>;

std::string trim(const std::string& x) {
  const auto b = x.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return x.substr(b, x.find_last_not_of(" \t\r") - b + 1);
}

/// Line number of every section.key, for diagnostics.
LineMap key_lines(const std::string& text) {
  LineMap m;
  std::istringstream is(text);
  std::string line, section;
  for (int n = 1; std::getline(is, line); ++n) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == ';' || t[0] == '#') continue;
    if (t[0] == '[') {
      section = trim(t.substr(1, t.find(']') - 1));
    } else if (auto eq = t.find('='); eq != std::string::npos) {
      m.emplace(std::make_pair(section, trim(t.substr(0, eq))), n);
    }
  }
  return m;
}

class Reader {
 public:
  Reader(const pt::ptree& root, LineMap lines, std::string origin)
      : root_(root), lines_(std::move(lines)), origin_(std::move(origin)) {}

  const std::string& origin() const { return origin_; }

  [[noreturn]] void fail_at(const std::string& sec, const std::string& key, const std::string& msg) const {
    auto it = lines_.find({sec, key});
    const std::string where = it == lines_.end() ? origin_ : origin_ + ":" + std::to_string(it->second);
    fail(where + ": " + sec + "." + key + ": " + msg);
  }

  bool has(const std::string& sec, const std::string& key) const {
    auto s = root_.get_child_optional(sec);
    return s && s->find(key) != s->not_found();
  }

  std::string str(const std::string& sec, const std::string& key) const {
    return root_.get_child(sec).get<std::string>(pt::ptree::path_type(key, '\0'));
  }

  double real(const std::string& sec, const std::string& key, double dflt) const {
    if (!has(sec, key)) return dflt;
    const std::string v = str(sec, key);
    try {
      std::size_t pos = 0;
      const double x = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return x;
    } catch (const std::exception&) {
      fail_at(sec, key, "expected a number, got '" + v + "'");
    }
  }

  long long integer(const std::string& sec, const std::string& key, long long dflt) const {
    if (!has(sec, key)) return dflt;
    const std::string v = str(sec, key);
    try {
      std::size_t pos = 0;
      const long long x = std::stoll(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return x;
    } catch (const std::exception&) {
      fail_at(sec, key, "expected an integer, got '" + v + "'");
    }
  }

  int positive(const std::string& sec, const std::string& key, int dflt) const {
    const long long x = integer(sec, key, dflt);
    if (x <= 0 || x > 1000000000) fail_at(sec, key, "must be a positive integer");
    return static_cast<int>(x);
  }

  double positive_real(const std::string& sec, const std::string& key, double dflt) const {
    const double x = real(sec, key, dflt);
    if (!(x > 0.0)) fail_at(sec, key, "must be positive");
    return x;
  }

 private:
  const pt::ptree& root_;
  LineMap lines_;
  std::string origin_;
};

void check_keys(const pt::ptree& root, const Reader& r) {
  const auto& s = schema();
  for (const auto& [name, section] : root) {
    if (section.empty() && !section.data().empty())
      r.fail_at("", name, "key appears outside a section");
    auto it = s.find(name);
    if (it == s.end()) fail(r.origin() + ": unknown section [" + name + "]");
    for (const auto& [key, value] : section) {
      if (!it->second.count(key)) r.fail_at(name, key, "unknown key");
      if (!value.empty()) r.fail_at(name, key, "nested key");
    }
  }
}

}  // namespace

void RunConfig::apply_seed(std::uint64_t s) {
  seed = s;
  geometry.seed = s;
  solver.seed = s;
  toy_options.seed = s;
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
  pt::ptree root;
  try {
    std::istringstream is(text);
    pt::ini_parser::read_ini(is, root);
  } catch (const pt::ini_parser_error& e) {
    fail(origin + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  const Reader r(root, key_lines(text), origin);
  check_keys(root, r);

  RunConfig c;
  c.hash = fnv1a_hex(text);

  c.problem.N = static_cast<int>(r.integer("problem", "N", c.problem.N));
  c.problem.K = static_cast<int>(r.integer("problem", "K", c.problem.K));
  c.problem.a = r.real("problem", "a", c.problem.a);
  c.problem.lambda = r.real("problem", "lambda", c.problem.lambda);
  if (r.has("problem", "lambda_fraction")) {
    if (r.has("problem", "lambda")) r.fail_at("problem", "lambda_fraction", "exclusive with problem.lambda");
    c.lambda_fraction = r.real("problem", "lambda_fraction", 0.0);
    if (!(c.lambda_fraction >= 0.0 && c.lambda_fraction <= 1.0))
      r.fail_at("problem", "lambda_fraction", "must lie in [0, 1]");
  }

  auto& pot = c.problem.potential;
  if (r.has("potential", "kind")) {
    try {
      pot.kind = parse_potential_kind(r.str("potential", "kind"));
    } catch (const Error& e) {
      fail(std::string("potential.kind: ") + e.what());
    }
  }
  if (pot.kind == PotentialKind::PeriodicTable) {
    if (!r.has("potential", "table")) r.fail_at("potential", "kind", "periodic-table needs potential.table");
    const std::string path = r.str("potential", "table");
    pot = load_potential_table(path);
    pot.table_path = path;
  }
  pot.V0 = r.real("potential", "V0", pot.V0);
  pot.base = r.real("potential", "base", pot.base);
  pot.amp = r.real("potential", "amp", pot.amp);
  pot.width = r.real("potential", "width", pot.width);
  pot.z_amp = r.real("potential", "z_amp", pot.z_amp);

  auto& nl = c.problem.nonlinearity;
  try {
    if (r.has("nonlinearity", "f")) nl.f_family = parse_f_family(r.str("nonlinearity", "f"));
    if (r.has("nonlinearity", "g")) nl.g_family = parse_g_family(r.str("nonlinearity", "g"));
  } catch (const Error& e) {
    fail(std::string("nonlinearity: ") + e.what());
  }
  nl.p = r.real("nonlinearity", "p", nl.p);
  nl.q = r.real("nonlinearity", "q", nl.q);
  nl.rho = r.real("nonlinearity", "rho", nl.rho);

  c.grid.Nr = r.positive("grid", "Nr", c.grid.Nr);
  c.grid.Nz = r.positive("grid", "Nz", c.grid.Nz);
  c.grid.Rmax = r.positive_real("grid", "Rmax", c.grid.Rmax);
  c.grid.Zhalf = r.positive_real("grid", "Zhalf", c.grid.Zhalf);

  auto& e = c.eigen;
  e.dense_limit = static_cast<std::size_t>(r.positive("spectral", "dense_limit", static_cast<int>(e.dense_limit)));
  e.extra_positive = r.positive("spectral", "extra_positive", e.extra_positive);
  e.gap_rel = r.positive_real("spectral", "gap_rel", e.gap_rel);
  e.guard = r.positive("spectral", "guard", e.guard);
  e.polish_steps = r.positive("spectral", "polish_steps", e.polish_steps);
  e.max_polish_steps = r.positive("spectral", "max_polish_steps", e.max_polish_steps);
  e.seed = static_cast<std::uint64_t>(r.integer("spectral", "seed", static_cast<long long>(e.seed)));
  c.hardy_samples = r.positive("spectral", "hardy_samples", c.hardy_samples);

  auto& g = c.geometry;
  g.starts = r.positive("geometry", "starts", g.starts);
  g.descent_steps = r.positive("geometry", "descent_steps", g.descent_steps);
  g.ascent_steps = r.positive("geometry", "ascent_steps", g.ascent_steps);
  g.bisection_steps = r.positive("geometry", "bisection_steps", g.bisection_steps);
  g.max_halvings = r.positive("geometry", "max_halvings", g.max_halvings);
  g.sphere_resamples = r.positive("geometry", "sphere_resamples", g.sphere_resamples);
  g.delta_samples = r.positive("geometry", "delta_samples", g.delta_samples);
  g.ray_samples = r.positive("geometry", "ray_samples", g.ray_samples);
  g.kappa_samples = r.positive("geometry", "kappa_samples", g.kappa_samples);
  g.k_search_depth = r.positive("geometry", "k_search_depth", g.k_search_depth);

  auto& s = c.solver;
  s.tol_solve = r.positive_real("solver", "tol_solve", s.tol_solve);
  s.envelope_tol = r.positive_real("solver", "envelope_tol", s.envelope_tol);
  s.max_outer = r.positive("solver", "max_outer", s.max_outer);
  s.max_refine = r.positive("solver", "max_refine", s.max_refine);
  s.inner_starts = r.positive("solver", "inner_starts", s.inner_starts);
  s.inner_max_iter = r.positive("solver", "inner_max_iter", s.inner_max_iter);
  s.inner_kkt = r.positive_real("solver", "inner_kkt", s.inner_kkt);

  auto& m = c.maxwell;
  m.omega = r.positive_real("maxwell", "omega", m.omega);
  m.lattice = r.positive("maxwell", "lattice", m.lattice);
  m.export_lattice = r.positive("maxwell", "export_lattice", m.export_lattice);
  m.t_samples = r.positive("maxwell", "t_samples", m.t_samples);
  if (m.lattice < 5) r.fail_at("maxwell", "lattice", "at least 5 nodes");
  if (m.export_lattice < 3) r.fail_at("maxwell", "export_lattice", "at least 3 nodes");
  if (r.has("maxwell", "snapshot")) m.snapshot = r.str("maxwell", "snapshot");

  auto& t = c.toy;
  t.n_plus = static_cast<int>(r.integer("toy", "n_plus", t.n_plus));
  t.n_minus = static_cast<int>(r.integer("toy", "n_minus", t.n_minus));
  t.p = r.real("toy", "p", t.p);
  t.q = r.real("toy", "q", t.q);
  t.lambda = r.real("toy", "lambda", t.lambda);
  auto& to = c.toy_options;
  to.density = r.positive("toy", "density", to.density);
  to.directions = r.positive("toy", "directions", to.directions);
  to.a4_samples = r.positive("toy", "a4_samples", static_cast<int>(to.a4_samples));
  to.tol = r.positive_real("toy", "tol", to.tol);

  c.threads = static_cast<int>(r.integer("run", "threads", c.threads));
  if (c.threads < 0) r.fail_at("run", "threads", "must be >= 0");
  if (r.has("run", "out")) c.out_dir = r.str("run", "out");
  const long long seed = r.integer("run", "seed", static_cast<long long>(c.seed));
  if (seed < 0) r.fail_at("run", "seed", "must be >= 0");
  c.apply_seed(static_cast<std::uint64_t>(seed));
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

void to_json(nlohmann::json& j, const RunConfig& c) {
  j = nlohmann::json{
      {"problem", c.problem},
      {"grid", {{"Nr", c.grid.Nr}, {"Nz", c.grid.Nz}, {"Rmax", c.grid.Rmax}, {"Zhalf", c.grid.Zhalf}}},
      {"spectral",
       {{"dense_limit", c.eigen.dense_limit},
        {"extra_positive", c.eigen.extra_positive},
        {"gap_rel", c.eigen.gap_rel},
        {"guard", c.eigen.guard},
        {"polish_steps", c.eigen.polish_steps},
        {"max_polish_steps", c.eigen.max_polish_steps},
        {"seed", c.eigen.seed},
        {"hardy_samples", c.hardy_samples}}},
      {"geometry", c.geometry},
      {"solver", c.solver},
      {"maxwell",
       {{"omega", c.maxwell.omega},
        {"lattice", c.maxwell.lattice},
        {"export_lattice", c.maxwell.export_lattice},
        {"t_samples", c.maxwell.t_samples},
        {"snapshot", c.maxwell.snapshot}}},
      {"toy",
       {{"problem", c.toy},
        {"density", c.toy_options.density},
        {"directions", c.toy_options.directions},
        {"a4_samples", c.toy_options.a4_samples},
        {"tol", c.toy_options.tol}}},
      {"seed", c.seed},
      {"threads", c.threads},
  };
  if (c.has_lambda_fraction()) j["problem"]["lambda_fraction"] = c.lambda_fraction;
}

}  // namespace linkvar::tools
