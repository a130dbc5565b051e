#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "linkvar/grid.hpp"

namespace linkvar {

using Matrix = Eigen::MatrixXd;

struct EigenOptions {
  std::size_t dense_limit = 4096;  // full decomposition up to this many unknowns
  int extra_positive = 64;         // positive pairs kept by the partial solver
  double gap_rel = 1e-6;           // gap_tol = gap_rel * max|lambda|
  int guard = 16;                  // extra block columns during polishing
  int polish_steps = 2;
  int max_polish_steps = 12;
  std::uint64_t seed = 12345;
};

/// Eigenpairs of S v = lambda M v and the splitting X = X+ (+) X-.
///
/// X- is spanned by every negative eigenvector (always fully resolved); X+
/// is its M-orthogonal complement, so P+ = I - P- exactly. On X+ the norm is
/// the operator form itself, which coincides with sum_{lambda_i>0} lambda_i c_i^2
/// on the resolved span.
class SpectralSplit {
 public:
  SpectralSplit() = default;

  const Vector& eigvals() const { return eigvals_; }
  const Matrix& eigvecs() const { return eigvecs_; }
  int n_minus() const { return n_minus_; }
  int n_resolved() const { return static_cast<int>(eigvals_.size()); }
  double mu0() const { return mu0_; }
  double gap_tol() const { return gap_tol_; }
  double max_abs_eigenvalue() const { return max_abs_; }
  bool complete() const { return complete_; }
  std::size_t dim() const { return static_cast<std::size_t>(mass_.size()); }
  const Vector& mass() const { return mass_; }
  const SymmetricOperator& op() const { return *op_; }
  /// Largest eigen-residual |S v - lambda M v|_{M^-1} over resolved pairs.
  double max_residual() const { return max_residual_; }

  /// c_i = <u, v_i>_w for all resolved pairs.
  Vector coefficients(const Vector& u) const;
  /// c_i for the negative pairs only (ascending eigenvalue order).
  Vector minus_coefficients(const Vector& u) const;

  Vector project_minus(const Vector& u) const;
  Vector project_plus(const Vector& u) const;
  Vector project(const Vector& u, int sign) const {
    return sign >= 0 ? project_plus(u) : project_minus(u);
  }

  double norm_plus_sq(const Vector& u) const;
  double norm_minus_sq(const Vector& u) const;
  double norm_plus(const Vector& u) const;
  double norm_minus(const Vector& u) const;
  double energy_norm(const Vector& u) const;
  /// <u, v>_X = <u+, v+>_X + <u-, v->_X.
  double x_inner(const Vector& u, const Vector& v) const;

  /// X-normalised X- basis vector e_k (k = 0 has the largest |lambda|).
  Vector e(int k) const;
  /// <u-, e_k>_X for every k.
  Vector tau_coefficients(const Vector& u) const;
  double tau_norm(const Vector& u) const;

  /// Riesz representative: the g with <g, v>_X = <r, v>_w for all v.
  Vector riesz(const Vector& r) const;
  /// Solves S x = b with iterative refinement.
  Vector solve_S(const Vector& b) const;

  /// Index range of the n-th eigenvector from the bottom of the positive part.
  int first_positive() const { return n_minus_; }

  friend SpectralSplit eigendecompose(const SymmetricOperator& op, const EigenOptions& opts);

 private:
  Vector eigvals_;
  Matrix eigvecs_;
  int n_minus_ = 0;
  double mu0_ = 0.0;
  double gap_tol_ = 0.0;
  double max_abs_ = 0.0;
  double max_residual_ = 0.0;
  bool complete_ = false;
  Vector mass_;
  std::shared_ptr<const SymmetricOperator> op_;
  std::shared_ptr<const Eigen::SimplicialLDLT<SparseMatrix>> S_factor_;
};

SpectralSplit eigendecompose(const SymmetricOperator& op, const EigenOptions& opts = {});
SpectralSplit eigendecompose(const SymmetricOperator& op, const Grid& g,
                             const EigenOptions& opts = {});

/// Number of negative eigenvalues of S - theta M (Sylvester inertia).
int count_below(const SymmetricOperator& op, double theta);

struct KappaEstimate {
  double kappa = 1.0;   // max(raw, 1) * safety
  double raw = 0.0;     // best sampled ratio before refinement
  double refined = 0.0; // after coordinate ascent
  double safety = 1.1;
  int samples = 0;
  int ascent_steps = 50;
};

/// Sampled lower estimate of the L^q norm of P+ and P- (a heuristic, not a
/// certified bound).
KappaEstimate kappa_estimate(const SpectralSplit& split, const Grid& g, double q, int n_samples,
                             std::uint64_t seed = 7);

void write_spectrum_csv(std::ostream& os, const SpectralSplit& split);
void write_spectrum_csv(const std::string& path, const SpectralSplit& split);

void to_json(nlohmann::json& j, const SpectralSplit& s);
void to_json(nlohmann::json& j, const KappaEstimate& k);

}  // namespace linkvar
