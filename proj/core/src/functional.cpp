#include "linkvar/functional.hpp"

#include <cmath>

#include "linkvar/error.hpp"

namespace linkvar {

FunctionalContext::FunctionalContext(const Grid& grid, const SpectralSplit& split,
                                     const ProblemSpec& spec)
    : grid_(&grid), split_(&split), spec_(spec), nl_(spec.nonlinearity) {
  if (grid.size() != split.dim()) throw Error(ErrorKind::ShapeMismatch, "split does not match grid");
  if (!(spec.lambda >= 0.0)) throw Error(ErrorKind::InvalidSpec, "lambda must be non-negative");
}

FunctionalContext FunctionalContext::quadratic_only(const Grid& grid, const SpectralSplit& split,
                                                    const ProblemSpec& spec) {
  FunctionalContext ctx(grid, split, spec);
  ctx.quadratic_only_ = true;
  return ctx;
}

FunctionalContext FunctionalContext::with_lambda(double lambda) const {
  FunctionalContext ctx = *this;
  if (!(lambda >= 0.0)) throw Error(ErrorKind::InvalidSpec, "lambda must be non-negative");
  ctx.spec_.lambda = lambda;
  return ctx;
}

Vector FunctionalContext::ftilde(const Vector& u) const {
  Vector out(u.size());
  if (quadratic_only_) return out.setZero();
  nl_.combined(u.data(), out.data(), static_cast<std::size_t>(u.size()), spec_.lambda);
  return out;
}

Vector FunctionalContext::dftilde(const Vector& u) const {
  Vector out(u.size());
  if (quadratic_only_) return out.setZero();
  nl_.combined_derivative(u.data(), out.data(), static_cast<std::size_t>(u.size()), spec_.lambda);
  return out;
}

double FunctionalContext::nonlinear_integral(const Vector& u) const {
  if (quadratic_only_) return 0.0;
  if (u.size() != grid_->w.size()) throw Error(ErrorKind::ShapeMismatch, "state length does not match the grid");
  return nl_.weighted_primitive_sum(u.data(), grid_->w.data(), static_cast<std::size_t>(u.size()), spec_.lambda);
}

double J(const FunctionalContext& ctx, const Vector& u) {
  const auto& s = ctx.split();
  return 0.5 * s.norm_plus_sq(u) - 0.5 * s.norm_minus_sq(u) - ctx.nonlinear_integral(u);
}

double dJ(const FunctionalContext& ctx, const Vector& u, const Vector& v) {
  const auto& s = ctx.split();
  const Vector cu = s.minus_coefficients(u);
  const Vector cv = s.minus_coefficients(v);
  const int nm = s.n_minus();
  const Vector up = u - s.eigvecs().leftCols(nm) * cu;
  const Vector vp = v - s.eigvecs().leftCols(nm) * cv;
  const double quad = up.dot(s.op().S * vp) -
                      (s.eigvals().head(nm).cwiseAbs().array() * cu.array() * cv.array()).sum();
  return quad - (ctx.grid().w.array() * ctx.ftilde(u).array() * v.array()).sum();
}

Vector l2_gradient(const FunctionalContext& ctx, const Vector& u) {
  return ctx.split().op().apply(u) - ctx.ftilde(u);
}

Vector gradX(const FunctionalContext& ctx, const Vector& u) {
  return ctx.split().riesz(l2_gradient(ctx, u));
}

double dual_norm(const FunctionalContext& ctx, const Vector& u) {
  return ctx.split().energy_norm(gradX(ctx, u));
}

double pde_residual(const FunctionalContext& ctx, const Vector& u) {
  const Vector r = l2_gradient(ctx, u);
  return std::sqrt(inner_L2w(ctx.grid(), r, r));
}

double key_inequality_gap(const FunctionalContext& ctx, const Vector& u, double t, const Vector& v) {
  if (ctx.lambda() != 0.0) {
    throw Error(ErrorKind::LambdaNotZero, "the key inequality is only asserted for lambda = 0");
  }
  const Vector w = t * u + v;
  const Vector dir = 0.5 * (t * t - 1.0) * u + t * v;
  return J(ctx, u) - J(ctx, w) + dJ(ctx, u, dir);
}

}  // namespace linkvar
