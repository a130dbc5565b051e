#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace linkvar {

/// J(x) = ½|x+|² − ½|x-|² − (1/p) Σ|x_i|^p + (λ/q) Σ|x_i|^q on R^{n+ + n-},
/// with x = (x+, x-).
struct ToyProblem {
  int n_plus = 1;
  int n_minus = 1;
  double p = 4.0;
  double q = 3.0;
  double lambda = 0.0;

  /// Throws InvalidSpec unless 1 <= n+ <= 3, 0 <= n- <= 3, 2 < q < p, lambda >= 0.
  void validate() const;
  int dim() const { return n_plus + n_minus; }

  double J(const Eigen::VectorXd& x) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;
  /// Diagonal of the Hessian (the functional is separable).
  Eigen::VectorXd hessian_diagonal(const Eigen::VectorXd& x) const;
  double dJ(const Eigen::VectorXd& x, const Eigen::VectorXd& v) const { return gradient(x).dot(v); }
  /// max(|x+|, Σ_k 2^{-(k+2)} |x-_k|).
  double tau_norm(const Eigen::VectorXd& x) const;
};

struct ToyCUpper {
  double grid_sup = 0.0;  // sup over the polar grid alone
  double value = 0.0;     // after Newton polishing of the best node
  double t = 0.0;
  Eigen::VectorXd argmax;
  int density = 0;
  long evaluations = 0;
};

/// Sup of J over M(u+) = { t u+ + v- : t >= 0, |.| <= R } on a polar grid with
/// `density` nodes per axis, polished by projected Newton ascent.
ToyCUpper toy_c_upper(const ToyProblem& tp, const Eigen::VectorXd& u_plus, double R, int density);

/// Min of J over the sphere of radius r in X+ on a `density` angular grid.
double toy_sphere_infimum(const ToyProblem& tp, double r, int density);

struct ToyNehari {
  double infimum = 0.0;
  Eigen::VectorXd best_direction;  // in R^{n+}
  std::vector<Eigen::VectorXd> points;
  int found = 0;
  int failed = 0;
  double max_stationarity = 0.0;  // max |grad J| over found points
};

/// Nehari–Pankov points along random X+ directions by damped Newton from the
/// inner maximiser.
ToyNehari toy_nehari_infimum(const ToyProblem& tp, int n_directions, double R, std::uint64_t seed = 42);

struct ToyA4Report {
  long samples = 0;
  long violations = 0;
  double worst_gap = 0.0;          // min over samples of J(u) − J(tu+v)
  double max_identity_residual = 0.0;  // max |J'(u)(((t²−1)/2)u + tv)|
  double equality_gap = 0.0;       // |J(u) − J(1·u + 0)|
  bool identity_checked = false;   // only for lambda = 0
};

/// J(u) >= J(tu+v) at the points in `nehari` for random t >= 0, v in X-.
ToyA4Report toy_check_A4(const ToyProblem& tp, const ToyNehari& nehari, long samples,
                         std::uint64_t seed = 42);

struct ToyReport {
  ToyProblem problem;
  double r = 0.0;
  double inf_sphere = 0.0;
  double R = 0.0;
  ToyCUpper c_upper;
  ToyNehari nehari;
  ToyA4Report a4;
  double tol = 1e-6;
  bool chain_ok = false;  // inf_sphere <= c_upper <= inf_N + tol
};

struct ToyOptions {
  int density = 65;
  int directions = 16;
  long a4_samples = 10000;
  double tol = 1e-6;
  std::uint64_t seed = 42;
};

/// Radius r = 2^-k with inf_{S_r+} J >= r²/4, R by doubling from 4r until J <= 0 on the
/// boundary of M, then the ordering chain.
ToyReport run_toy(const ToyProblem& tp, const ToyOptions& opts = {});

void to_json(nlohmann::json& j, const ToyProblem& t);
void to_json(nlohmann::json& j, const ToyCUpper& c);
void to_json(nlohmann::json& j, const ToyNehari& n);
void to_json(nlohmann::json& j, const ToyA4Report& a);
void to_json(nlohmann::json& j, const ToyReport& r);

}  // namespace linkvar
