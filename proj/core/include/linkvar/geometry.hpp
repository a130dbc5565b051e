#pragma once

#include <cstdint>
#include <vector>

#include "linkvar/functional.hpp"

namespace linkvar {

/// Sample counts and iteration budgets of the sampling-based estimators.
struct GeometryOptions {
  int starts = 32;
  int descent_steps = 30;
  int ascent_steps = 30;
  int bisection_steps = 4;
  int max_halvings = 30;
  int sphere_resamples = 1000;
  int delta_samples = 10000;
  int ray_samples = 1000;
  int kappa_samples = 2000;
  int k_search_depth = 12;
  std::uint64_t seed = 42;
};

/// Coordinates x = (t, s) in R^{1+n-} for w = t u + sum_k s_k e_k, where u is
/// a unit vector of X+ and (e_k) the X-orthonormal X- basis, so that
/// ||w+|| = |t| and ||w-|| = |s|.
class Slice {
 public:
  Slice(const FunctionalContext& ctx, const Vector& u_plus);

  int dim() const { return static_cast<int>(basis_.cols()); }
  const Matrix& basis() const { return basis_; }
  Vector point(const Vector& x) const { return basis_ * x; }
  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;
  void gradient_hessian(const Vector& x, Vector& grad, Matrix& hess) const;

 private:
  const FunctionalContext* ctx_;
  Matrix basis_;
};

/// J on the resolved span, from the eigen coefficients c of u.
double J_resolved(const FunctionalContext& ctx, const Vector& c, const Vector& u);
/// J at u = V c for every column c of C (C has at most n_resolved rows).
Vector J_resolved_batch(const FunctionalContext& ctx, const Matrix& C);

struct SphereInfimum {
  double r = 0.0;
  double inf_estimate = 0.0;  // an upper bound on the true infimum
  bool passed = false;        // inf_estimate >= r^2/4
  int starts = 0;
  int steps = 0;
};

struct LinkRadiusResult {
  double r_link = 0.0;
  double b = 0.0;  // inf estimate on S_r+
  double resample_min = 0.0;
  int resamples = 0;
  bool resample_passed = false;
  std::vector<SphereInfimum> trials;
  Vector minimizer;  // unit X+ direction attaining b
};

/// Minimises J(r u) over the unit X+ sphere. `warm` carries the start
/// directions in and the local minimisers out.
SphereInfimum sphere_infimum(const FunctionalContext& ctx, double r, const GeometryOptions& opts,
                             std::vector<Vector>& warm);
std::vector<Vector> random_sphere_starts(const FunctionalContext& ctx, int n, std::uint64_t seed);

LinkRadiusResult find_link_radius(const FunctionalContext& ctx, const GeometryOptions& opts = {});

struct LinkRResult {
  double R = 0.0;
  double sup_ball = 0.0;    // sup over the X- ball (a lower bound on the true sup)
  double sup_sphere = 0.0;  // sup over the outer sphere piece
  int doublings = 0;
  std::vector<double> tried;
};

/// Sup of J over the ball { v- : ||v-|| <= R } by ascent in slice coordinates.
double sup_minus_ball(const Slice& slice, double R, const GeometryOptions& opts);
/// Sup of J over { t u + v- : t >= 0, ||t u + v-|| = R }.
double sup_outer_sphere(const Slice& slice, double R, const GeometryOptions& opts);

LinkRResult find_R(const FunctionalContext& ctx, const Vector& u_plus, double r_link,
                   const GeometryOptions& opts = {});

struct DeltaResult {
  double delta = 0.0;
  double b = 0.0;
  double sampled_sup = 0.0;
  int samples = 0;
};

DeltaResult find_delta(const FunctionalContext& ctx, double r_link, double b,
                       const GeometryOptions& opts = {});

/// C_F / (kappa 2^q C_G).
double lambda_threshold(double kappa, double q, double C_F, double C_G);

struct KBound {
  double eps = 0.0;
  double rho = 0.0;
  double lambda = 0.0;
  double mu0 = 0.0;
  double K = 0.0;
  double gamma = 0.0;        // g(rho)/f(rho)
  double C_eps = 0.0;
  double C_upper = 0.0;      // |f(u)| <= C_upper |u|^{p-1}, |u| >= rho
  double C_lower = 0.0;      // |f(u)| >= C_lower |u|^{p-1}, |u| >= rho
  double D = 0.0;
  double phi_sup = 0.0;      // sup_{|t|<=rho} |Phi(t)|/t^2
  double side_ratio = 0.0;   // (1 + lambda gamma)/(1 - lambda gamma)
  bool side_ok = false;      // 0 <= side_ratio <= 2
  bool pass = false;         // K < mu0
};

KBound boundedness_K(const Nonlinearity& nl, double kappa, double mu0, double eps, double rho,
                     double lambda);

struct KSearchResult {
  bool found = false;
  KBound best;
  int evaluated = 0;
};

/// Grid search over eps = mu0/12 2^-i, rho = 2^-j, lambda = lambda_max 2^-k.
KSearchResult search_K(const Nonlinearity& nl, double kappa, double mu0, double lambda_max,
                       int depth);

struct RaySupResult {
  double sup = 0.0;
  int samples = 0;
};

/// Sup of J over random X- vectors scaled log-uniformly across [1e-2, 1e2].
RaySupResult minus_ray_sup(const FunctionalContext& ctx, int samples, std::uint64_t seed);

struct GeometryConstants {
  double kappa = 1.0;
  double mu0 = 0.0;
  double eps = 0.0;
  double C_F_lower = 0.0;
  double C_g_growth = 0.0;
  double lambda_max = 0.0;
  double r_link = 0.0;
  double R_link = 0.0;
  double delta_link = 0.0;
  double K_bound = 0.0;
};

/// kappa, mu0 and the threshold at eps = mu0/8.
GeometryConstants base_constants(const SpectralSplit& split, const Nonlinearity& nl,
                                 const KappaEstimate& kappa, NonlinearityConstants* out = nullptr);

struct GeometryReport {
  GeometryConstants constants;
  KappaEstimate kappa;
  NonlinearityConstants nonlinearity;
  LinkRadiusResult link;
  LinkRResult R;
  DeltaResult delta;
  KSearchResult k_search;
  RaySupResult rays;
  double lambda = 0.0;
  double margin = 0.0;
  bool linking_passed = false;
  bool lambda_admissible = false;
  GeometryOptions options;
};

/// Runs find_link_radius, find_R (for u_plus), find_delta, the ray check and
/// the K search; constants must already hold kappa and lambda_max.
GeometryReport check_geometry(const FunctionalContext& ctx, const Vector& u_plus,
                              const GeometryConstants& base, const KappaEstimate& kappa,
                              const NonlinearityConstants& nlc, const GeometryOptions& opts = {});

void to_json(nlohmann::json& j, const GeometryOptions& o);
void to_json(nlohmann::json& j, const SphereInfimum& s);
void to_json(nlohmann::json& j, const LinkRadiusResult& l);
void to_json(nlohmann::json& j, const LinkRResult& l);
void to_json(nlohmann::json& j, const DeltaResult& d);
void to_json(nlohmann::json& j, const KBound& k);
void to_json(nlohmann::json& j, const KSearchResult& k);
void to_json(nlohmann::json& j, const RaySupResult& r);
void to_json(nlohmann::json& j, const GeometryConstants& c);
void to_json(nlohmann::json& j, const GeometryReport& g);

}  // namespace linkvar
