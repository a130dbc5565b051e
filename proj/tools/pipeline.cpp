#include "pipeline.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>

#include "linkvar/functional.hpp"
#include "linkvar/geometry.hpp"
#include "linkvar/grid.hpp"
#include "linkvar/maxwell.hpp"
#include "linkvar/nonlinearity.hpp"
#include "linkvar/parallel.hpp"
#include "linkvar/solver.hpp"
#include "linkvar/spectral.hpp"
#include "linkvar/toylink.hpp"

namespace linkvar::tools {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ConfigError:
    case ErrorKind::InvalidSpec:
    case ErrorKind::InvalidResolution:
    case ErrorKind::ShapeMismatch:
    case ErrorKind::NotMaxwellCase:
    case ErrorKind::LambdaNotZero:
    case ErrorKind::DegenerateNonlinearity:
    case ErrorKind::NonCoerciveF:
    case ErrorKind::NoNegativeSpectrum:
      return kValidation;
    case ErrorKind::GeometryFailure:
    case ErrorKind::NoAnticoercivity:
    case ErrorKind::RhoTooLarge:
      return kGeometry;
    default:
      return kSolver;
  }
}

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> s = {"spectrum", "verify-nonlinearity", "constants",
                                             "check-geometry", "solve", "maxwell", "toy"};
  return s;
}

namespace {

class Pipeline {
 public:
  Pipeline(const RunConfig& cfg, fs::path out, std::ostream* log)
      : cfg_(cfg), out_(std::move(out)), log_(log) {}

  int dispatch(const std::string& sub, json& rep) {
    if (sub == "spectrum") return spectrum(rep);
    if (sub == "verify-nonlinearity") return verify(rep);
    if (sub == "constants") return constants(rep);
    if (sub == "check-geometry") return check_geometry_cmd(rep);
    if (sub == "solve") return solve_cmd(rep);
    if (sub == "maxwell") return maxwell(rep);
    if (sub == "toy") return toy(rep);
    throw Error(ErrorKind::ConfigError, "unknown subcommand '" + sub + "'");
  }

 private:
  const RunConfig& cfg_;
  fs::path out_;
  std::ostream* log_;

  std::optional<Grid> grid_;
  std::optional<SpectralSplit> split_;
  std::unique_ptr<FunctionalContext> ctx_;
  std::optional<KappaEstimate> kappa_;
  NonlinearityConstants nlc_;
  GeometryConstants base_;
  std::optional<GeometryReport> geo_;
  ProblemSpec spec_;

  void note(const std::string& msg) {
    if (log_) *log_ << msg << std::endl;
  }

  std::string path(const std::string& name) const { return (out_ / name).string(); }

  void build() {
    if (split_) return;
    spec_ = cfg_.problem;
    spec_.validate();
    grid_ = build_grid(spec_, cfg_.grid.Nr, cfg_.grid.Nz, cfg_.grid.Rmax, cfg_.grid.Zhalf);
    note("grid " + std::to_string(grid_->Nr) + "x" + std::to_string(grid_->Nz));
    const auto op = assemble_operator(spec_, *grid_);
    split_ = eigendecompose(op, *grid_, cfg_.eigen);
    note("spectrum: " + std::to_string(split_->n_minus()) + " negative eigenvalues");
  }

  /// kappa, base constants and the final coupling.
  void derive_constants() {
    if (ctx_) return;
    build();
    kappa_ = kappa_estimate(*split_, *grid_, spec_.nonlinearity.q, cfg_.geometry.kappa_samples,
                            cfg_.geometry.seed);
    const FunctionalContext probe(*grid_, *split_, spec_);
    base_ = base_constants(*split_, probe.nonlinearity(), *kappa_, &nlc_);
    if (cfg_.has_lambda_fraction()) spec_.lambda = cfg_.lambda_fraction * base_.lambda_max;
    ctx_ = std::make_unique<FunctionalContext>(*grid_, *split_, spec_);
    note("lambda_max = " + fmt(base_.lambda_max) + ", lambda = " + fmt(spec_.lambda));
  }

  void geometry() {
    if (geo_) return;
    derive_constants();
    geo_ = check_geometry(*ctx_, initial_direction(*split_), base_, *kappa_, nlc_, cfg_.geometry);
    note("linking margin " + fmt(geo_->margin) + (geo_->linking_passed ? " (passed)" : " (FAILED)"));
  }

  bool geometry_ok() const {
    return geo_->linking_passed && geo_->lambda_admissible && geo_->k_search.found &&
           geo_->rays.sup <= 0.0;
  }

  static std::string fmt(double x) {
    std::ostringstream os;
    os << std::setprecision(10) << x;
    return os.str();
  }

  int spectrum(json& rep) {
    build();
    write_spectrum_csv(path("spectrum.csv"), *split_);
    rep["grid"] = *grid_;
    rep["spectrum"] = *split_;
    if (spec_.K > 2)
      rep["hardy"] = hardy_check(*grid_, spec_.K, cfg_.hardy_samples, cfg_.seed);
    else
      rep["hardy"] = nullptr;  // the weighted Hardy constant vanishes for K <= 2
    return kOk;
  }

  int verify(json& rep) {
    double lambda = cfg_.problem.lambda;
    if (cfg_.has_lambda_fraction()) {
      derive_constants();
      lambda = spec_.lambda;
    }
    cfg_.problem.nonlinearity.validate(cfg_.problem.N);
    const Nonlinearity nl(cfg_.problem.nonlinearity);
    const AxiomReport ax = verify_axioms(nl, lambda, cfg_.problem.N);
    rep["axioms"] = ax;
    for (const auto& c : ax.checks)
      note(std::string(c.passed ? "  pass " : "  FAIL ") + c.name);
    return ax.all_passed() ? kOk : kValidation;
  }

  int constants(json& rep) {
    derive_constants();
    const auto ks = search_K(ctx_->nonlinearity(), kappa_->kappa, base_.mu0, base_.lambda_max,
                             cfg_.geometry.k_search_depth);
    rep["lambda"] = spec_.lambda;
    rep["kappa"] = *kappa_;
    rep["constants"] = base_;
    rep["nonlinearity_constants"] = nlc_;
    rep["k_search"] = ks;
    rep["lambda_admissible"] = spec_.lambda <= base_.lambda_max;
    return ks.found ? kOk : kGeometry;
  }

  int check_geometry_cmd(json& rep) {
    geometry();
    rep["geometry"] = *geo_;
    rep["geometry_ok"] = geometry_ok();
    return geometry_ok() ? kOk : kGeometry;
  }

  /// Runs the minimax solve and writes the field outputs.
  int solve_into(json& rep, Vector* u_out) {
    geometry();
    rep["geometry"] = *geo_;
    rep["geometry_ok"] = geometry_ok();
    if (!geometry_ok()) return kGeometry;
    const SolveReport sr = solve(*ctx_, *geo_, cfg_.solver);
    write_solution_csv(path("solution.csv"), *grid_, sr.u_star);
    write_snapshot(path("solution.lnkv"), *grid_, sr.u_star);
    const bool pde_ok = sr.pde_relative < 1e-6;
    rep["solve"] = sr;
    rep["pass"] = {{"converged", sr.converged},     {"nontrivial", sr.nontrivial},
                   {"energy_bracket", sr.energy_bracket_ok}, {"nehari", sr.nehari_ok},
                   {"pde_relative", pde_ok}};
    note("J(u*) = " + fmt(sr.J_value) + ", cerami residual " + fmt(sr.cerami_residual));
    if (u_out) *u_out = sr.u_star;
    const bool ok = sr.converged && sr.nontrivial && sr.energy_bracket_ok && sr.nehari_ok && pde_ok;
    return ok ? kOk : kSolver;
  }

  int solve_cmd(json& rep) { return solve_into(rep, nullptr); }

  int maxwell(json& rep) {
    if (!cfg_.problem.is_maxwell_case())
      throw Error(ErrorKind::NotMaxwellCase, "the Maxwell bridge needs N = 3, K = 2, a = 1");
    Vector u;
    if (!cfg_.maxwell.snapshot.empty()) {
      derive_constants();
      u = read_snapshot(cfg_.maxwell.snapshot, *grid_);
      rep["source"] = "snapshot";
    } else {
      json sol;
      const int code = solve_into(sol, &u);
      rep["solve_stage"] = sol;
      if (code != kOk) return code;
      rep["source"] = "solve";
    }
    const double omega = cfg_.maxwell.omega;
    const EnergyMatch em = energy_match(*ctx_, u);

    json div = json::array();
    std::vector<double> residuals;
    for (int n = cfg_.maxwell.lattice, level = 0; level < 3 && n >= 5; ++level, n = (n - 1) / 2 + 1) {
      LatticeSpec ls;
      ls.n = n;
      const VectorField3 E = reconstruct_E(spec_, *grid_, u, ls, omega);
      const double res = divergence_residual(E);
      residuals.push_back(res);
      div.push_back({{"n", n}, {"residual", res}});
    }
    double order = std::numeric_limits<double>::quiet_NaN();
    bool second_order = residuals.size() == 3;
    for (std::size_t i = 1; i < residuals.size(); ++i) {
      const double o = std::log2(residuals[i] / residuals[i - 1]);
      order = i == 1 ? o : std::min(order, o);
      if (!(residuals[i] > residuals[i - 1]) || o < 1.8) second_order = false;
    }

    LatticeSpec ex;
    ex.n = cfg_.maxwell.export_lattice;
    write_field3_csv(path("field3.csv"), reconstruct_E(spec_, *grid_, u, ex, omega));

    std::vector<double> ts(cfg_.maxwell.t_samples);
    const double period = std::numbers::pi / omega;
    for (std::size_t k = 0; k < ts.size(); ++k)
      ts[k] = ts.size() > 1 ? period * static_cast<double>(k) / static_cast<double>(ts.size() - 1) : 0.0;
    const LSeries L = em_energy_L(*ctx_, u, omega, ts);
    write_L_csv(path("L.csv"), L);
    const double L0 = L.L.empty() ? 0.0 : L.L.front();
    const double L_tol = 1e-8 * std::abs(L0) + 0.5 * std::abs(L.variation);

    rep["energy"] = em;
    rep["divergence"] = {{"levels", div}, {"min_order", order}};
    rep["L"] = L;
    rep["L_tolerance"] = L_tol;
    const bool gap_ok = em.gap < 1e-10;
    const bool L_ok = L.max_deviation <= L_tol;
    rep["pass"] = {{"energy_gap", gap_ok}, {"divergence_second_order", second_order}, {"L_constant", L_ok}};
    note("energy gap " + fmt(em.gap) + ", divergence order " + fmt(order) + ", L deviation " +
         fmt(L.max_deviation));
    return gap_ok && second_order && L_ok ? kOk : kSolver;
  }

  int toy(json& rep) {
    const ToyReport tr = run_toy(cfg_.toy, cfg_.toy_options);
    rep["toy"] = tr;
    if (log_) {
      *log_ << std::setprecision(12) << "inf_S J = " << tr.inf_sphere << " <= c_upper = " << tr.c_upper.value
            << " <= inf_N J = " << tr.nehari.infimum << (tr.chain_ok ? "  [chain holds]" : "  [chain FAILS]")
            << "\nA4 violations: " << tr.a4.violations << " / " << tr.a4.samples << std::endl;
    }
    const bool a4_ok = tr.problem.lambda > 0.0 || tr.a4.violations == 0;
    return tr.chain_ok && a4_ok ? kOk : kGeometry;
  }
};

void write_report(const fs::path& file, const json& rep) {
  std::ofstream os(file);
  if (!os) throw Error(ErrorKind::ConfigError, "cannot write report '" + file.string() + "'");
  os << std::setw(2) << rep << '\n';
}

}  // namespace

Outcome run_subcommand(const std::string& subcommand, const RunConfig& cfg, const std::string& out_dir,
                       std::ostream* log) {
  Outcome oc;
  json& rep = oc.report;
  rep["subcommand"] = subcommand;
  rep["config_hash"] = cfg.hash;
  rep["config"] = cfg;

  const fs::path out(out_dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) {
    std::cerr << "linkvar: cannot create output directory '" << out_dir << "': " << ec.message() << '\n';
    oc.exit_code = kValidation;
    return oc;
  }

  set_thread_count(cfg.threads);
  try {
    Pipeline p(cfg, out, log);
    oc.exit_code = p.dispatch(subcommand, rep);
    rep["status"] = oc.exit_code == kOk ? "ok" : "failed";
  } catch (const Error& e) {
    oc.exit_code = exit_code_for(e.kind());
    rep["status"] = "error";
    rep["error"] = {{"kind", to_string(e.kind())}, {"message", e.what()}};
    std::cerr << "linkvar " << subcommand << ": " << e.what() << '\n';
  } catch (const std::exception& e) {
    oc.exit_code = kSolver;
    rep["status"] = "error";
    rep["error"] = {{"kind", "Unexpected"}, {"message", e.what()}};
    std::cerr << "linkvar " << subcommand << ": " << e.what() << '\n';
  }
  rep["exit_code"] = oc.exit_code;

  try {
    write_report(out / (subcommand + ".json"), rep);
  } catch (const Error& e) {
    std::cerr << "linkvar: " << e.what() << '\n';
    if (oc.exit_code == kOk) oc.exit_code = kValidation;
  }
  return oc;
}

void write_error_report(const std::string& out_dir, const std::string& subcommand, const Error& e) {
  const json rep = {{"subcommand", subcommand},
                    {"status", "error"},
                    {"exit_code", kValidation},
                    {"error", {{"kind", to_string(e.kind())}, {"message", e.what()}}}};
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  try {
    write_report(fs::path(out_dir) / (subcommand + ".json"), rep);
  } catch (const Error& w) {
    std::cerr << "linkvar: " << w.what() << '\n';
  }
}

}  // namespace linkvar::tools
