#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "linkvar/geometry.hpp"

namespace linkvar {

struct SolverOptions {
  double tol_solve = 1e-8;     // cerami residual target
  double envelope_tol = 1e-4;  // tangent envelope gradient target
  int max_outer = 2000;
  int max_refine = 200;
  int inner_starts = 4;
  int inner_max_iter = 200;
  double inner_kkt = 1e-9;
  std::uint64_t seed = 42;
};

struct InnerResult {
  double t = 0.0;
  Vector s;       // X- coordinates in the (e_k) basis
  Vector w;       // t u + sum s_k e_k
  double value = 0.0;
  double kkt = 0.0;  // projected gradient norm
  bool on_boundary = false;
  bool outward = false;  // gradient points out of the ball at the boundary
  int iterations = 0;
};

/// Maximises J over M(u) = { t u + v- : t >= 0, ||t u + v-|| <= R } by
/// projected Newton/gradient ascent in slice coordinates with multistart.
/// `warm` (size 1 + n-) is used as the first start when non-empty. Throws
/// InnerDivergence when the value exceeds `value_bound`.
InnerResult inner_maximize(const FunctionalContext& ctx, const Vector& u_plus, double R,
                           const SolverOptions& opts = {}, const Vector& warm = Vector(),
                           double value_bound = std::numeric_limits<double>::infinity());

struct OuterState {
  Vector u;   // unit X+ direction
  double R = 0.0;
  InnerResult inner;
  double phi = 0.0;               // inner maximum at u
  double envelope_norm = 0.0;     // X norm of the tangent envelope gradient
  double step = 0.1;              // current geodesic angle
  int r_doublings = 0;
};

/// Envelope gradient t* P+ gradX(w*) projected to the tangent space at u.
Vector envelope_gradient(const FunctionalContext& ctx, const OuterState& st);

/// Inner solve at `u` with R doubling while the maximiser presses outward on
/// the ball.
OuterState evaluate_direction(const FunctionalContext& ctx, const Vector& u, double R,
                              const SolverOptions& opts, const Vector& warm = Vector());

/// One Armijo-controlled geodesic descent step of phi on the unit X+ sphere.
/// Returns the state unchanged when the envelope gradient is already below
/// envelope_tol.
OuterState outer_step(const FunctionalContext& ctx, const OuterState& st, const SolverOptions& opts);

struct IdentityChecks {
  double quadratic_form = 0.0;  // <Au,u>_w - (||u+||^2 - ||u-||^2)
  double dJ_uu = 0.0;
  double dJ_ek_max = 0.0;       // max_k |J'(u)(e_k)|
  std::vector<double> dJ_ek;
  double minus_residual = 0.0;  // ||gradX(-u)||_X
};

struct IterationCounts {
  int outer = 0;
  int inner = 0;
  int refine = 0;
  int r_doublings = 0;
};

struct SolveReport {
  Vector u_star;
  double J_value = 0.0;
  double residual_X = 0.0;
  double cerami_residual = 0.0;
  double tau_norm_value = 0.0;
  double norm_X = 0.0;
  double pde_residual = 0.0;
  double pde_relative = 0.0;
  IterationCounts iterations;
  IdentityChecks identity_checks;
  double lambda = 0.0;
  double c_upper = std::numeric_limits<double>::quiet_NaN();
  double phi_final = std::numeric_limits<double>::quiet_NaN();
  double envelope_norm = std::numeric_limits<double>::quiet_NaN();
  double inf_sphere = std::numeric_limits<double>::quiet_NaN();
  double delta = 0.0;
  double R = 0.0;
  double energy_tol = 0.0;
  bool converged = false;
  bool nontrivial = false;
  bool energy_bracket_ok = false;
  bool nehari_ok = false;
  double boundary_mass = 0.0;
};

/// Damped Newton on A u - f~(u) = 0 from u0. `delta` is the tau-norm floor.
SolveReport refine(const FunctionalContext& ctx, const Vector& u0, double delta,
                   const SolverOptions& opts = {});

/// Lowest positive eigenvector, X-normalised.
Vector initial_direction(const SpectralSplit& split);

/// Full minimax pipeline using the radii of a passed geometry report.
SolveReport solve(const FunctionalContext& ctx, const GeometryReport& geometry,
                  const SolverOptions& opts = {});

/// Fills the identity checks, residuals and pass flags of `rep` for u.
void evaluate_solution(const FunctionalContext& ctx, const Vector& u, double delta,
                       const SolverOptions& opts, SolveReport& rep);

/// Little-endian snapshot: "LNKV1", int32 Nr, int32 Nz, then Nr*Nz doubles.
void write_snapshot(const std::string& path, const Grid& g, const Vector& u);
Vector read_snapshot(const std::string& path, const Grid& g);

void write_solution_csv(const std::string& path, const Grid& g, const Vector& u);

void to_json(nlohmann::json& j, const SolverOptions& o);
void to_json(nlohmann::json& j, const InnerResult& r);
void to_json(nlohmann::json& j, const IdentityChecks& c);
void to_json(nlohmann::json& j, const IterationCounts& c);
void to_json(nlohmann::json& j, const SolveReport& r);

}  // namespace linkvar
