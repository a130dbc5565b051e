#pragma once

#include "linkvar/grid.hpp"
#include "linkvar/nonlinearity.hpp"
#include "linkvar/spectral.hpp"

namespace linkvar {

/// Everything J needs. Holds non-owning references: the grid and the split
/// must outlive the context.
class FunctionalContext {
 public:
  FunctionalContext(const Grid& grid, const SpectralSplit& split, const ProblemSpec& spec);

  /// Test hook: drops f and g so that J is the bare quadratic form.
  static FunctionalContext quadratic_only(const Grid& grid, const SpectralSplit& split,
                                          const ProblemSpec& spec);

  const Grid& grid() const { return *grid_; }
  const SpectralSplit& split() const { return *split_; }
  const ProblemSpec& spec() const { return spec_; }
  const Nonlinearity& nonlinearity() const { return nl_; }
  double lambda() const { return spec_.lambda; }
  bool is_quadratic_only() const { return quadratic_only_; }

  /// Same context with a different coupling.
  FunctionalContext with_lambda(double lambda) const;

  /// f~(u) = f(u) - lambda g(u), pointwise.
  Vector ftilde(const Vector& u) const;
  /// d f~/du, pointwise.
  Vector dftilde(const Vector& u) const;
  /// sum w (F(u) - lambda G(u)).
  double nonlinear_integral(const Vector& u) const;

 private:
  const Grid* grid_;
  const SpectralSplit* split_;
  ProblemSpec spec_;
  Nonlinearity nl_;
  bool quadratic_only_ = false;
};

double J(const FunctionalContext& ctx, const Vector& u);
/// J'(u)(v).
double dJ(const FunctionalContext& ctx, const Vector& u, const Vector& v);
/// A u - f~(u): the gradient in the weighted L2 inner product.
Vector l2_gradient(const FunctionalContext& ctx, const Vector& u);
/// Riesz representative of J'(u) in the X inner product.
Vector gradX(const FunctionalContext& ctx, const Vector& u);
/// ||gradX(u)||_X, the X-dual norm of J'(u).
double dual_norm(const FunctionalContext& ctx, const Vector& u);
/// Weighted L2 norm of A u - f(u) + lambda g(u).
double pde_residual(const FunctionalContext& ctx, const Vector& u);

/// J(u) - J(tu + v) + J'(u)(((t^2-1)/2) u + t v); lambda must be 0.
double key_inequality_gap(const FunctionalContext& ctx, const Vector& u, double t, const Vector& v);

}  // namespace linkvar
