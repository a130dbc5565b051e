// Acceptance gate: one [PASS]/[FAIL] line per criterion, nonzero exit on any failure.
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "config.hpp"
#include "fixtures.hpp"
#include "linkvar/geometry.hpp"
#include "linkvar/nonlinearity.hpp"
#include "linkvar/toylink.hpp"
#include "pipeline.hpp"

using namespace linkvar;
using namespace linkvar::tools;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

int failures = 0;

void verdict(int n, const std::string& name, bool ok, const std::string& detail) {
  if (!ok) ++failures;
  std::cout << (ok ? "[PASS] " : "[FAIL] ") << n << ' ' << name << "  " << detail << std::endl;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <class... T>
std::string cat(const T&... parts) {
  std::ostringstream os;
  os.precision(6);
  (os << ... << parts);
  return os.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

struct Run {
  Outcome oc;
  double seconds = 0.0;
};

Run run(const std::string& sub, const RunConfig& cfg, const fs::path& out) {
  const auto t0 = std::chrono::steady_clock::now();
  Run r{run_subcommand(sub, cfg, out.string()), 0.0};
  r.seconds = seconds_since(t0);
  return r;
}

void gradient(const testing::Setup& s) {
  std::mt19937_64 rng(1001);
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const Vector u = testing::smooth_field(s.g, rng, 0.8);
    const Vector v = (k % 2) ? testing::noise_field(s.g, rng) : testing::smooth_field(s.g, rng);
    const double h = 1e-5 * std::sqrt(inner_L2w(s.g, u, u) / inner_L2w(s.g, v, v));
    const double fd = (J(*s.ctx, u + h * v) - J(*s.ctx, u - h * v)) / (2 * h);
    const double an = dJ(*s.ctx, u, v);
    worst = std::max(worst, std::abs(fd - an) / std::max(std::abs(an), 1e-12));
  }
  const double t = seconds_since(t0);
  verdict(1, "gradient", worst < 1e-6 && t < 10.0, cat("max rel err ", worst, ", ", t, " s at 96x96"));
}

void split_identities(const testing::Setup& s) {
  const SpectralSplit& sp = s.split;
  std::mt19937_64 rng(1002);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const Vector u = (k % 2) ? testing::noise_field(s.g, rng) : testing::smooth_field(s.g, rng);
    const Vector up = sp.project_plus(u), um = sp.project_minus(u);
    const double scale = u.norm();
    const double nu = std::sqrt(inner_L2w(s.g, u, u));
    const double en = sp.energy_norm(u);
    worst = std::max(worst, (up + um - u).norm() / scale);
    worst = std::max(worst, (sp.project_plus(up) - up).norm() / scale);
    worst = std::max(worst, (sp.project_minus(um) - um).norm() / scale);
    const double form = inner_L2w(s.g, sp.op().apply(u), u);
    worst = std::max(worst, std::abs(form - (sp.norm_plus_sq(u) - sp.norm_minus_sq(u))) / (en * en));
    worst = std::max(worst, (sp.mu0() * nu - en) / en);
    const double tau = sp.tau_norm(u);
    worst = std::max(worst, (sp.norm_plus(u) - tau) / en);
    worst = std::max(worst, (tau - en) / en);
  }
  verdict(2, "spectral-split", worst <= 1e-10, cat("worst identity defect ", worst, " over 1000 vectors"));
}

void constants(const json& rep) {
  NonlinearitySpec ns;
  const Nonlinearity nl(ns);
  const double eps = 0.1;
  const double oracle = testing::golden_min([eps](double u) { return u / 4.0 + eps / u; }, 1e-6, 1e3);
  const double cf = lower_constant_F(nl, eps);
  const json& c = rep["constants"];
  const double kappa = c["kappa"].get<double>();
  const double C_F = c["C_F_lower"].get<double>();
  const double C_G = c["C_g_growth"].get<double>();
  const double q = 3.0;
  const double formula = C_F / (kappa * std::pow(2.0, q) * C_G);
  const double lmax = c["lambda_max"].get<double>();
  const bool ok = std::abs(cf - oracle) < 1e-4 && std::abs(oracle - std::sqrt(eps)) < 1e-8 && formula == lmax;
  verdict(3, "constants", ok,
          cat("C_F(0.1) = ", cf, " vs oracle ", oracle, "; lambda_max ", lmax, (formula == lmax ? " == " : " != "),
              "formula"));
}

void k_search(const json& rep) {
  const json& ks = rep["k_search"];
  const double mu0 = rep["constants"]["mu0"].get<double>();
  const bool found = ks["found"].get<bool>() && ks["best"]["K"].get<double>() < mu0;
  const Nonlinearity nl{NonlinearitySpec{}};
  bool monotone = true;
  double first = 0.0, last = 0.0;
  for (double lambda : {0.0, 0.5 * rep["constants"]["lambda_max"].get<double>()}) {
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 8; ++k) {
      const double s = phi_quadratic_sup(nl, lambda, std::ldexp(1.0, -k));
      if (!(s <= prev)) monotone = false;
      if (k == 0) first = s;
      prev = last = s;
    }
    if (!(last <= first / 100.0)) monotone = false;
  }
  verdict(4, "k-search", found && monotone,
          cat("K = ", ks["best"]["K"].get<double>(), " < mu0 = ", mu0, "; phi_sup ", first, " -> ", last,
              " over 8 halvings"));
}

void linking(const testing::Setup& s, const json& geo0, const json& geo_half, double lambda_max) {
  const double m0 = geo0["geometry"]["linking_margin"].get<double>();
  const double mh = geo_half["geometry"]["linking_margin"].get<double>();
  const bool passed = geo0["geometry_ok"].get<bool>() && geo_half["geometry_ok"].get<bool>() && m0 >= 1e-6 &&
                      mh >= 1e-6;
  double ray = -std::numeric_limits<double>::infinity();
  for (double lambda : {0.0, 0.5 * lambda_max, lambda_max})
    ray = std::max(ray, minus_ray_sup(s.ctx->with_lambda(lambda), 1000, 1005).sup);
  verdict(5, "linking", passed && ray <= 0.0,
          cat("margin ", m0, " (lambda 0), ", mh, " (lambda_max/2); X- ray sup ", ray));
}

bool solve_ok(const Run& r, std::string& detail) {
  const json& rep = r.oc.report;
  if (r.oc.exit_code != 0 || !rep.contains("solve")) {
    detail += cat("exit ", r.oc.exit_code, "; ");
    return false;
  }
  const json& sr = rep["solve"];
  const double Jv = sr["J_value"], tol = sr["energy_tol"], inf_s = sr["inf_sphere_estimate"];
  const double cu = sr["c_upper"], cer = sr["cerami_residual"], tau = sr["tau_norm"], delta = sr["delta"];
  const double pde = sr["pde_relative"];
  const bool ok = cer < 1e-8 && tau >= 0.5 * delta && pde < 1e-6 && inf_s - tol <= Jv && Jv <= cu + tol &&
                  r.seconds < 60.0 && sr["converged"].get<bool>();
  detail += cat("J* ", Jv, " in [", inf_s, ", ", cu, "], cerami ", cer, ", pde ", pde, ", ", r.seconds, " s; ");
  return ok;
}

void toys() {
  bool ok = true;
  std::string detail;
  for (int n : {1, 2}) {
    ToyProblem tp;
    tp.n_plus = n;
    tp.n_minus = n;
    const ToyReport rep = run_toy(tp);
    const double tol = 1e-6;
    const bool chain = rep.inf_sphere <= rep.c_upper.value + tol && rep.c_upper.value <= rep.nehari.infimum + tol;
    ok = ok && chain && rep.a4.violations == 0 && rep.a4.samples >= 10000;
    detail += cat(n, "+", n, ": ", rep.inf_sphere, " <= ", rep.c_upper.value, " <= ", rep.nehari.infimum, ", ",
                  rep.a4.violations, "/", rep.a4.samples, " violations; ");
  }
  ToyProblem one;
  one.n_plus = 1;
  one.n_minus = 0;
  const double c1 = toy_c_upper(one, Eigen::VectorXd::Ones(1), 4.0, 65).value;
  const double n1 = toy_nehari_infimum(one, 4, 4.0).infimum;
  ok = ok && std::abs(c1 - 0.25) < 1e-8 && std::abs(n1 - 0.25) < 1e-8;
  detail += cat("1D max ", c1, ", Nehari ", n1);
  verdict(7, "toy-chain", ok, detail);
}

void maxwell(const Run& r) {
  const json& rep = r.oc.report;
  if (!rep.contains("pass")) {
    verdict(8, "maxwell", false, cat("exit ", r.oc.exit_code, " ", rep.value("error", json{}).dump()));
    return;
  }
  const json& p = rep["pass"];
  const bool ok = r.oc.exit_code == 0 && p["energy_gap"].get<bool>() && p["divergence_second_order"].get<bool>() &&
                  p["L_constant"].get<bool>();
  verdict(8, "maxwell", ok,
          cat("energy gap ", rep["energy"]["relative_gap"].get<double>(), ", divergence order ",
              rep["divergence"]["min_order"].get<double>(), ", L deviation ", rep["L"]["max_deviation"].get<double>(),
              " <= ", rep["L_tolerance"].get<double>()));
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_out");
  const std::string configs = LINKVAR_CONFIG_DIR;
  const RunConfig ref = load_config(configs + "/reference.ini");
  const RunConfig half = load_config(configs + "/reference-half.ini");

  ProblemSpec spec = ref.problem;
  const auto setup = testing::make_setup(spec, ref.grid.Nr, ref.grid.Nz, ref.grid.Rmax, ref.grid.Zhalf);

  gradient(*setup);
  split_identities(*setup);

  const Run cons = run("constants", ref, out / "constants");
  constants(cons.oc.report);
  k_search(cons.oc.report);

  const Run geo0 = run("check-geometry", ref, out / "geometry");
  const Run geoh = run("check-geometry", half, out / "geometry-half");
  linking(*setup, geo0.oc.report, geoh.oc.report, cons.oc.report["constants"]["lambda_max"].get<double>());

  const Run s0 = run("solve", ref, out / "solve");
  const Run sh = run("solve", half, out / "solve-half");
  std::string detail = "lambda 0: ";
  bool ok = solve_ok(s0, detail);
  detail += "lambda_max/2: ";
  ok = solve_ok(sh, detail) && ok;
  verdict(6, "solver", ok, detail);

  toys();

  RunConfig mx = ref;
  mx.maxwell.snapshot = (out / "solve" / "solution.lnkv").string();
  maxwell(run("maxwell", mx, out / "maxwell"));

  run("solve", ref, out / "solve-repeat");
  const std::string a = slurp(out / "solve" / "solve.json");
  const std::string b = slurp(out / "solve-repeat" / "solve.json");
  verdict(9, "determinism", !a.empty() && a == b, cat("solve.json ", a.size(), " bytes, runs ", (a == b ? "identical" : "differ")));

  std::cout << (failures == 0 ? "all criteria passed" : cat(failures, " criteria failed")) << std::endl;
  return failures == 0 ? 0 : 1;
}
