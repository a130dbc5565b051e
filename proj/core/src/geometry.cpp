#include "linkvar/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "linkvar/error.hpp"
#include "linkvar/parallel.hpp"

namespace linkvar {

namespace {

constexpr double kArmijo = 1e-4;

std::mt19937_64 task_rng(std::uint64_t seed, std::uint64_t task) {
  std::seed_seq seq{seed, task, std::uint64_t{0x9e3779b97f4a7c15ULL}};
  return std::mt19937_64(seq);
}

// Unit vector in R^d with a uniformly random direction.
Vector random_direction(std::mt19937_64& rng, Eigen::Index d) {
  std::normal_distribution<double> gauss;
  Vector x(d);
  for (Eigen::Index i = 0; i < d; ++i) x[i] = gauss(rng);
  return x / x.norm();
}

// Projected gradient ascent on { x : |x| <= R }, optionally with t pinned to 0.
double ball_ascent(const Slice& slice, Vector x, double R, int steps, bool t_fixed_zero) {
  auto project = [&](Vector y) {
    if (t_fixed_zero) y[0] = 0.0;
    const double n = y.norm();
    if (n > R) y *= R / n;
    return y;
  };
  x = project(x);
  double fx = slice.value(x);
  double step = 1.0;
  for (int it = 0; it < steps; ++it) {
    Vector gdir = slice.gradient(x);
    if (t_fixed_zero) gdir[0] = 0.0;
    if ((project(x + gdir) - x).norm() <= 1e-10 * std::max(1.0, std::abs(fx))) break;
    bool accepted = false;
    for (int bt = 0; bt < 30; ++bt) {
      const Vector y = project(x + step * gdir);
      const double fy = slice.value(y);
      if (fy >= fx + kArmijo * gdir.dot(y - x) && fy > fx) {
        x = y;
        fx = fy;
        accepted = true;
        step = std::min(2.0 * step, 1e6);
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  return fx;
}

// Riemannian ascent on { |x| = R, x_0 >= 0 } with geodesic steps.
double outer_sphere_ascent(const Slice& slice, Vector x, double R, int steps) {
  auto normalise = [&](Vector y) {
    y[0] = std::max(y[0], 0.0);
    return Vector(y * (R / y.norm()));
  };
  x = normalise(x);
  double fx = slice.value(x);
  double theta = 0.25;
  for (int it = 0; it < steps; ++it) {
    const Vector g = slice.gradient(x);
    Vector gt = g - (g.dot(x) / (R * R)) * x;
    if (x[0] <= 0.0 && gt[0] < 0.0) gt[0] = 0.0;
    const double ng = gt.norm();
    if (ng <= 1e-10 * std::max(1.0, std::abs(fx))) break;
    const Vector d = gt / ng;
    bool accepted = false;
    for (int bt = 0; bt < 30; ++bt) {
      const Vector y = normalise(std::cos(theta) * x + std::sin(theta) * R * d);
      const double fy = slice.value(y);
      if (fy >= fx + kArmijo * theta * R * ng && fy > fx) {
        x = y;
        fx = fy;
        accepted = true;
        theta = std::min(2.0 * theta, 0.5);
        break;
      }
      theta *= 0.5;
    }
    if (!accepted) break;
  }
  return fx;
}

}  // namespace

Slice::Slice(const FunctionalContext& ctx, const Vector& u_plus) : ctx_(&ctx) {
  const auto& s = ctx.split();
  const int nm = s.n_minus();
  const Vector u = s.project_plus(u_plus);
  const double n = s.norm_plus(u);
  if (!(n > 0.0)) throw Error(ErrorKind::InvalidSpec, "slice direction must have a nonzero X+ part");
  basis_.resize(u.size(), nm + 1);
  basis_.col(0) = u / n;
  for (int k = 0; k < nm; ++k) basis_.col(k + 1) = s.e(k);
}

double Slice::value(const Vector& x) const {
  const double quad = 0.5 * x[0] * x[0] - 0.5 * x.tail(x.size() - 1).squaredNorm();
  return quad - ctx_->nonlinear_integral(point(x));
}

Vector Slice::gradient(const Vector& x) const {
  const Vector w = point(x);
  Vector g = -(basis_.transpose() * ctx_->grid().w.cwiseProduct(ctx_->ftilde(w)));
  g[0] += x[0];
  g.tail(g.size() - 1) -= x.tail(x.size() - 1);
  return g;
}

void Slice::gradient_hessian(const Vector& x, Vector& grad, Matrix& hess) const {
  const Vector w = point(x);
  const Vector& wt = ctx_->grid().w;
  grad = -(basis_.transpose() * wt.cwiseProduct(ctx_->ftilde(w)));
  grad[0] += x[0];
  grad.tail(grad.size() - 1) -= x.tail(x.size() - 1);
  const Vector d = wt.cwiseProduct(ctx_->dftilde(w));
  hess = -(basis_.transpose() * d.asDiagonal() * basis_);
  hess(0, 0) += 1.0;
  for (Eigen::Index k = 1; k < hess.rows(); ++k) hess(k, k) -= 1.0;
}

double J_resolved(const FunctionalContext& ctx, const Vector& c, const Vector& u) {
  const Vector& lam = ctx.split().eigvals();
  return 0.5 * (lam.head(c.size()).array() * c.array().square()).sum() - ctx.nonlinear_integral(u);
}

Vector J_resolved_batch(const FunctionalContext& ctx, const Matrix& C) {
  const auto& s = ctx.split();
  const Vector& lam = s.eigvals();
  const Eigen::Index m = C.rows();
  Vector out(C.cols());
  constexpr Eigen::Index kBlock = 128;
  for (Eigen::Index b0 = 0; b0 < C.cols(); b0 += kBlock) {
    const Eigen::Index nb = std::min(kBlock, C.cols() - b0);
    const Matrix U = s.eigvecs().leftCols(m) * C.middleCols(b0, nb);
    parallel_for(static_cast<std::size_t>(nb), [&](std::size_t k) {
      const auto col = static_cast<Eigen::Index>(k);
      const double quad = 0.5 * (lam.head(m).array() * C.col(b0 + col).array().square()).sum();
      out[b0 + col] = quad - ctx.nonlinear_integral(U.col(col));
    });
  }
  return out;
}

std::vector<Vector> random_sphere_starts(const FunctionalContext& ctx, int n, std::uint64_t seed) {
  const auto& s = ctx.split();
  const int first = s.first_positive();
  const int npos = s.n_resolved() - first;
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    auto rng = task_rng(seed, static_cast<std::uint64_t>(k));
    const Vector g = random_direction(rng, npos);
    // isotropic in the X norm: coefficient g_i / sqrt(lambda_i)
    const Vector c = g.cwiseQuotient(s.eigvals().segment(first, npos).cwiseSqrt());
    Vector u = s.eigvecs().middleCols(first, npos) * c;
    u = s.project_plus(u);
    out.push_back(u / s.norm_plus(u));
  }
  return out;
}

SphereInfimum sphere_infimum(const FunctionalContext& ctx, double r, const GeometryOptions& opts,
                             std::vector<Vector>& warm) {
  const auto& s = ctx.split();
  SphereInfimum out;
  out.r = r;
  out.starts = static_cast<int>(warm.size());
  std::vector<double> best(warm.size());
  std::vector<int> used(warm.size());
  parallel_for(warm.size(), [&](std::size_t k) {
    Vector u = warm[k];
    double phi = J(ctx, r * u);
    double theta = 0.1;
    int steps = 0;
    for (; steps < opts.descent_steps; ++steps) {
      const Vector g = r * s.project_plus(gradX(ctx, r * u));
      const Vector gt = g - s.op().form(g, u) * u;
      const double ng = std::sqrt(std::max(0.0, s.op().form(gt, gt)));
      if (ng <= 1e-12 * std::max(r * r, std::abs(phi))) break;
      const Vector d = -gt / ng;
      bool accepted = false;
      for (int bt = 0; bt < 40; ++bt) {
        Vector v = std::cos(theta) * u + std::sin(theta) * d;
        v = s.project_plus(v);
        v /= s.norm_plus(v);
        const double pv = J(ctx, r * v);
        if (pv <= phi - kArmijo * theta * ng && pv < phi) {
          u = v;
          phi = pv;
          accepted = true;
          theta = std::min(2.0 * theta, 0.5);
          break;
        }
        theta *= 0.5;
        if (theta < 1e-12) break;
      }
      if (!accepted) break;
    }
    warm[k] = u;
    best[k] = phi;
    used[k] = steps;
  });
  out.inf_estimate = *std::min_element(best.begin(), best.end());
  for (int u : used) out.steps += u;
  out.passed = out.inf_estimate >= 0.25 * r * r;
  return out;
}

LinkRadiusResult find_link_radius(const FunctionalContext& ctx, const GeometryOptions& opts) {
  LinkRadiusResult res;
  std::vector<Vector> dirs = random_sphere_starts(ctx, opts.starts, opts.seed);
  auto argmin_dir = [&](const std::vector<Vector>& d, double r) {
    std::size_t best = 0;
    double val = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < d.size(); ++k) {
      const double v = J(ctx, r * d[k]);
      if (v < val) {
        val = v;
        best = k;
      }
    }
    return d[best];
  };

  double pass_r = 0.0;
  double pass_b = 0.0;
  std::vector<Vector> pass_dirs;
  double fail_r = 0.0;
  for (int k = 0; k <= opts.max_halvings; ++k) {
    const double r = std::ldexp(1.0, -k);
    const SphereInfimum si = sphere_infimum(ctx, r, opts, dirs);
    res.trials.push_back(si);
    if (si.passed) {
      pass_r = r;
      pass_b = si.inf_estimate;
      pass_dirs = dirs;
      break;
    }
    fail_r = r;
  }
  if (pass_r == 0.0) {
    throw Error(ErrorKind::GeometryFailure, "no radius in the search set satisfies inf J >= r^2/4");
  }
  if (fail_r > 0.0) {
    double lo = pass_r;
    double hi = fail_r;
    for (int b = 0; b < opts.bisection_steps; ++b) {
      const double mid = 0.5 * (lo + hi);
      std::vector<Vector> trial = pass_dirs;
      const SphereInfimum si = sphere_infimum(ctx, mid, opts, trial);
      res.trials.push_back(si);
      if (si.passed) {
        lo = mid;
        pass_r = mid;
        pass_b = si.inf_estimate;
        pass_dirs = trial;
      } else {
        hi = mid;
      }
    }
  }
  res.r_link = pass_r;
  res.b = pass_b;
  res.minimizer = argmin_dir(pass_dirs, pass_r);

  // independent re-check on fresh random sphere points
  const auto& s = ctx.split();
  const int first = s.first_positive();
  const int npos = s.n_resolved() - first;
  auto rng = task_rng(opts.seed, 0xA11CE);
  double worst = std::numeric_limits<double>::infinity();
  if (opts.sphere_resamples > 0) {
    Matrix C = Matrix::Zero(s.n_resolved(), opts.sphere_resamples);
    for (int k = 0; k < opts.sphere_resamples; ++k) {
      const Vector g = random_direction(rng, npos);
      C.col(k).segment(first, npos) = pass_r * g.cwiseQuotient(s.eigvals().segment(first, npos).cwiseSqrt());
    }
    worst = J_resolved_batch(ctx, C).minCoeff();
  }
  res.resamples = opts.sphere_resamples;
  res.resample_min = opts.sphere_resamples > 0 ? worst : res.b;
  res.resample_passed = res.resample_min >= 0.25 * pass_r * pass_r;
  return res;
}

double sup_minus_ball(const Slice& slice, double R, const GeometryOptions& opts) {
  const int d = slice.dim();
  std::vector<double> best(static_cast<std::size_t>(opts.starts));
  parallel_for(best.size(), [&](std::size_t k) {
    Vector x = Vector::Zero(d);
    if (k > 0 && d > 1) {
      auto rng = task_rng(opts.seed, 0xB000 + k);
      std::uniform_real_distribution<double> unif;
      const Vector dir = random_direction(rng, d - 1);
      x.tail(d - 1) = R * std::pow(unif(rng), 1.0 / (d - 1)) * dir;
    }
    best[k] = ball_ascent(slice, x, R, opts.ascent_steps, true);
  });
  return *std::max_element(best.begin(), best.end());
}

double sup_outer_sphere(const Slice& slice, double R, const GeometryOptions& opts) {
  const int d = slice.dim();
  std::vector<double> best(static_cast<std::size_t>(opts.starts));
  parallel_for(best.size(), [&](std::size_t k) {
    Vector x = Vector::Zero(d);
    if (k == 0) {
      x[0] = R;
    } else {
      auto rng = task_rng(opts.seed, 0xC000 + k);
      x = R * random_direction(rng, d);
      x[0] = std::abs(x[0]);
    }
    best[k] = outer_sphere_ascent(slice, x, R, opts.ascent_steps);
  });
  return *std::max_element(best.begin(), best.end());
}

LinkRResult find_R(const FunctionalContext& ctx, const Vector& u_plus, double r_link,
                   const GeometryOptions& opts) {
  const Slice slice(ctx, u_plus);
  LinkRResult res;
  const double limit = std::ldexp(r_link, 16);
  for (double R = 4.0 * r_link; R <= limit; R *= 2.0) {
    res.tried.push_back(R);
    const double ball = sup_minus_ball(slice, R, opts);
    const double sphere = sup_outer_sphere(slice, R, opts);
    if (std::max(ball, sphere) <= 0.0) {
      res.R = R;
      res.sup_ball = ball;
      res.sup_sphere = sphere;
      return res;
    }
    ++res.doublings;
  }
  throw Error(ErrorKind::NoAnticoercivity,
              "sup of J over the boundary of M(u) stays positive up to R = 2^16 r");
}

DeltaResult find_delta(const FunctionalContext& ctx, double r_link, double b,
                       const GeometryOptions& opts) {
  if (!(b > 0.0)) throw Error(ErrorKind::GeometryFailure, "the sphere infimum must be positive");
  const auto& s = ctx.split();
  DeltaResult res;
  res.b = b;
  res.delta = std::min(std::sqrt(b / 3.0), 0.5 * r_link);
  res.samples = opts.delta_samples;
  const int nm = s.n_minus();
  const int first = s.first_positive();
  const int npos = s.n_resolved() - first;
  const Vector sqrt_pos = s.eigvals().segment(first, npos).cwiseSqrt();
  const Vector sqrt_neg = s.eigvals().head(nm).cwiseAbs().cwiseSqrt();
  auto rng = task_rng(opts.seed, 0xD000);
  std::uniform_real_distribution<double> unif;
  std::exponential_distribution<double> expo(1.0);
  // the X+ point on the delta sphere along the lowest positive mode
  double sup = 0.0;
  {
    Vector c = Vector::Zero(s.n_resolved());
    c[first] = res.delta / sqrt_pos[0];
    sup = std::max(sup, J_resolved(ctx, c, s.eigvecs().col(first) * c[first]));
  }
  Matrix C = Matrix::Zero(s.n_resolved(), std::max(opts.delta_samples, 0));
  for (int k = 0; k < opts.delta_samples; ++k) {
    auto c = C.col(k);
    const double plus_radius = res.delta * std::pow(unif(rng), 1.0 / npos);
    c.segment(first, npos) = plus_radius * random_direction(rng, npos).cwiseQuotient(sqrt_pos);
    if (k % 2 == 1) {
      Vector weights(nm);
      for (int i = 0; i < nm; ++i) weights[i] = expo(rng);
      weights /= weights.sum();
      const double budget = res.delta * unif(rng);
      for (int i = 0; i < nm; ++i) {
        const double tau = (unif(rng) < 0.5 ? -1.0 : 1.0) * budget * weights[i] * std::ldexp(1.0, i + 2);
        c[i] = tau / sqrt_neg[i];
      }
    }
  }
  if (opts.delta_samples > 0) sup = std::max(sup, J_resolved_batch(ctx, C).maxCoeff());
  res.sampled_sup = sup;
  if (!(sup < b)) {
    throw Error(ErrorKind::GeometryFailure, "sampled sup of J over the tau-ball reaches the sphere infimum");
  }
  return res;
}

double lambda_threshold(double kappa, double q, double C_F, double C_G) {
  return C_F / (kappa * std::pow(2.0, q) * C_G);
}

namespace {

std::pair<double, double> tail_constants_from(const Nonlinearity& nl, double rho) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  auto visit = [&](double u) {
    const double r = std::abs(nl.f(u)) / std::pow(u, nl.p() - 1.0);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  };
  visit(rho);
  for (double u : CertificationRange{}.magnitudes()) {
    if (u >= rho) visit(u);
  }
  return {lo, hi};
}

KBound assemble_K(const Nonlinearity& nl, double kappa, double mu0, double eps, double rho,
                  double lambda, double C_eps, std::pair<double, double> tail, double phi_sup) {
  KBound k;
  k.eps = eps;
  k.rho = rho;
  k.lambda = lambda;
  k.mu0 = mu0;
  k.gamma = nl.g_is_zero() ? 0.0 : nl.g(rho) / nl.f(rho);
  const double denom = 1.0 - lambda * k.gamma;
  if (!(denom > 0.0)) {
    throw Error(ErrorKind::RhoTooLarge, "1 - lambda g(rho)/f(rho) must be positive");
  }
  k.C_eps = C_eps;
  k.C_lower = tail.first;
  k.C_upper = tail.second;
  k.phi_sup = phi_sup;
  k.D = k.C_upper * (1.0 + lambda * k.gamma) * 2.0 * kappa;
  const double c_phi = 1.0 / ((0.5 - 1.0 / nl.q()) * k.C_lower);
  const double p = nl.p();
  const double q = nl.q();
  k.K = eps * (1.0 + lambda) + C_eps * std::pow(rho, p - 2.0) + lambda * C_eps * std::pow(rho, q - 2.0) +
        k.D * (std::pow(rho, p - 2.0) + c_phi / denom * phi_sup);
  k.side_ratio = (1.0 + lambda * k.gamma) / denom;
  k.side_ok = k.side_ratio >= 0.0 && k.side_ratio <= 2.0;
  k.pass = k.K < mu0;
  return k;
}

}  // namespace

KBound boundedness_K(const Nonlinearity& nl, double kappa, double mu0, double eps, double rho,
                     double lambda) {
  if (!(eps > 0.0) || !(rho > 0.0) || !(lambda >= 0.0)) {
    throw Error(ErrorKind::InvalidSpec, "boundedness_K needs eps > 0, rho > 0, lambda >= 0");
  }
  const double C_eps = std::max(growth_constant_f(nl, eps), growth_constant_g(nl, eps));
  return assemble_K(nl, kappa, mu0, eps, rho, lambda, C_eps, tail_constants_from(nl, rho),
                    phi_quadratic_sup(nl, lambda, rho));
}

KSearchResult search_K(const Nonlinearity& nl, double kappa, double mu0, double lambda_max, int depth) {
  KSearchResult res;
  std::vector<double> C_eps(static_cast<std::size_t>(depth + 1));
  std::vector<std::pair<double, double>> tails(static_cast<std::size_t>(depth + 1));
  for (int i = 0; i <= depth; ++i) {
    const double eps = mu0 / 12.0 * std::ldexp(1.0, -i);
    C_eps[static_cast<std::size_t>(i)] = std::max(growth_constant_f(nl, eps), growth_constant_g(nl, eps));
    tails[static_cast<std::size_t>(i)] = tail_constants_from(nl, std::ldexp(1.0, -i));
  }
  for (int kl = 0; kl <= depth; ++kl) {
    const double lambda = lambda_max * std::ldexp(1.0, -kl);
    for (int jr = 0; jr <= depth; ++jr) {
      const double rho = std::ldexp(1.0, -jr);
      const double phi = phi_quadratic_sup(nl, lambda, rho);
      for (int ie = 0; ie <= depth; ++ie) {
        const double eps = mu0 / 12.0 * std::ldexp(1.0, -ie);
        ++res.evaluated;
        try {
          const KBound k = assemble_K(nl, kappa, mu0, eps, rho, lambda, C_eps[static_cast<std::size_t>(ie)],
                                      tails[static_cast<std::size_t>(jr)], phi);
          if (k.pass && k.side_ok) {
            res.found = true;
            res.best = k;
            return res;
          }
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::RhoTooLarge) throw;
        }
      }
    }
  }
  return res;
}

RaySupResult minus_ray_sup(const FunctionalContext& ctx, int samples, std::uint64_t seed) {
  const auto& s = ctx.split();
  const int nm = s.n_minus();
  const Vector sqrt_neg = s.eigvals().head(nm).cwiseAbs().cwiseSqrt();
  auto rng = task_rng(seed, 0xE000);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  RaySupResult res;
  res.samples = samples;
  res.sup = -std::numeric_limits<double>::infinity();
  if (samples <= 0) return res;
  Matrix C(nm, samples);
  for (int k = 0; k < samples; ++k) {
    const double scale = std::pow(10.0, unif(rng));
    C.col(k) = scale * random_direction(rng, nm).cwiseQuotient(sqrt_neg);
  }
  res.sup = J_resolved_batch(ctx, C).maxCoeff();
  return res;
}

GeometryConstants base_constants(const SpectralSplit& split, const Nonlinearity& nl,
                                 const KappaEstimate& kappa, NonlinearityConstants* out) {
  GeometryConstants c;
  c.kappa = kappa.kappa;
  c.mu0 = split.mu0();
  c.eps = c.mu0 / 8.0;
  const NonlinearityConstants nlc = compute_constants(nl, c.eps);
  c.C_F_lower = nlc.C_F_lower;
  c.C_g_growth = nlc.C_g_growth;
  c.lambda_max = lambda_threshold(c.kappa, nl.q(), c.C_F_lower, c.C_g_growth);
  if (out) *out = nlc;
  return c;
}

GeometryReport check_geometry(const FunctionalContext& ctx, const Vector& u_plus,
                              const GeometryConstants& base, const KappaEstimate& kappa,
                              const NonlinearityConstants& nlc, const GeometryOptions& opts) {
  GeometryReport rep;
  rep.options = opts;
  rep.constants = base;
  rep.kappa = kappa;
  rep.nonlinearity = nlc;
  rep.lambda = ctx.lambda();
  rep.lambda_admissible = ctx.lambda() <= base.lambda_max;
  rep.link = find_link_radius(ctx, opts);
  rep.R = find_R(ctx, u_plus, rep.link.r_link, opts);
  rep.delta = find_delta(ctx, rep.link.r_link, rep.link.b, opts);
  rep.rays = minus_ray_sup(ctx, opts.ray_samples, opts.seed);
  rep.k_search = search_K(ctx.nonlinearity(), base.kappa, base.mu0, base.lambda_max, opts.k_search_depth);
  rep.constants.r_link = rep.link.r_link;
  rep.constants.R_link = rep.R.R;
  rep.constants.delta_link = rep.delta.delta;
  rep.constants.K_bound = rep.k_search.found ? rep.k_search.best.K : std::numeric_limits<double>::quiet_NaN();
  const double boundary = std::max({rep.R.sup_ball, rep.R.sup_sphere, rep.delta.sampled_sup});
  rep.margin = rep.link.b - boundary;
  rep.linking_passed = rep.margin >= 1e-6 && rep.link.resample_passed;
  return rep;
}

void to_json(nlohmann::json& j, const GeometryOptions& o) {
  j = {{"starts", o.starts}, {"descent_steps", o.descent_steps}, {"ascent_steps", o.ascent_steps},
       {"bisection_steps", o.bisection_steps}, {"sphere_resamples", o.sphere_resamples},
       {"delta_samples", o.delta_samples}, {"ray_samples", o.ray_samples},
       {"kappa_samples", o.kappa_samples}, {"k_search_depth", o.k_search_depth}, {"seed", o.seed}};
}

void to_json(nlohmann::json& j, const SphereInfimum& s) {
  j = {{"r", s.r}, {"inf_estimate", s.inf_estimate}, {"passed", s.passed},
       {"starts", s.starts}, {"descent_steps_used", s.steps}};
}

void to_json(nlohmann::json& j, const LinkRadiusResult& l) {
  j = {{"r_link", l.r_link}, {"inf_estimate", l.b}, {"estimate_kind", "upper bound on the true infimum"},
       {"resample_min", l.resample_min}, {"resamples", l.resamples},
       {"resample_passed", l.resample_passed}, {"trials", l.trials}};
}

void to_json(nlohmann::json& j, const LinkRResult& l) {
  j = {{"R_link", l.R}, {"sup_minus_ball", l.sup_ball}, {"sup_outer_sphere", l.sup_sphere},
       {"estimate_kind", "lower bounds on the true suprema"}, {"doublings", l.doublings},
       {"tried", l.tried}};
}

void to_json(nlohmann::json& j, const DeltaResult& d) {
  j = {{"delta_link", d.delta}, {"sphere_infimum", d.b}, {"sampled_sup", d.sampled_sup},
       {"samples", d.samples}};
}

void to_json(nlohmann::json& j, const KBound& k) {
  j = {{"eps", k.eps}, {"rho", k.rho}, {"lambda", k.lambda}, {"mu0", k.mu0}, {"K", k.K},
       {"g_over_f_at_rho", k.gamma}, {"C_eps", k.C_eps}, {"C_upper", k.C_upper},
       {"C_lower", k.C_lower}, {"D", k.D}, {"phi_sup", k.phi_sup}, {"side_ratio", k.side_ratio},
       {"side_ok", k.side_ok}, {"pass", k.pass}};
}

void to_json(nlohmann::json& j, const KSearchResult& k) {
  j = {{"found", k.found}, {"evaluated", k.evaluated}};
  if (k.found) j["best"] = k.best;
}

void to_json(nlohmann::json& j, const RaySupResult& r) {
  j = {{"sup", r.sup}, {"samples", r.samples}};
}

void to_json(nlohmann::json& j, const GeometryConstants& c) {
  j = {{"kappa", c.kappa}, {"mu0", c.mu0}, {"eps", c.eps}, {"C_F_lower", c.C_F_lower},
       {"C_g_growth", c.C_g_growth}, {"lambda_max", c.lambda_max}, {"r_link", c.r_link},
       {"R_link", c.R_link}, {"delta_link", c.delta_link}, {"K_bound", c.K_bound}};
}

void to_json(nlohmann::json& j, const GeometryReport& g) {
  j = {{"constants", g.constants},
       {"kappa", g.kappa},
       {"nonlinearity_constants", g.nonlinearity},
       {"lambda", g.lambda},
       {"lambda_admissible", g.lambda_admissible},
       {"link_radius", g.link},
       {"outer_radius", g.R},
       {"delta", g.delta},
       {"minus_rays", g.rays},
       {"k_search", g.k_search},
       {"linking_margin", g.margin},
       {"linking_passed", g.linking_passed},
       {"sample_counts", g.options},
       {"note", "extremal values are sampled estimates; the linking verdict is heuristic"}};
}

}  // namespace linkvar
