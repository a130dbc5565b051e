#include "linkvar/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>

#include <Eigen/SparseCholesky>

#include "linkvar/error.hpp"
#include "linkvar/parallel.hpp"

namespace linkvar {

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxDoublings = 16;

std::mt19937_64 task_rng(std::uint64_t seed, std::uint64_t task) {
  std::seed_seq seq{seed, task, std::uint64_t{0x51ed270b27fcd8a1ULL}};
  return std::mt19937_64(seq);
}

Vector project_slice(Vector y, double R) {
  y[0] = std::max(y[0], 0.0);
  const double n = y.norm();
  if (n > R) y *= R / n;
  return y;
}

// Best t for x = (t, 0) on [0, R]: coarse log scan, then golden section.
double ray_start(const Slice& slice, double R) {
  Vector x = Vector::Zero(slice.dim());
  auto val = [&](double t) {
    x[0] = t;
    return slice.value(x);
  };
  double best_t = R;
  double best = val(R);
  const int n = 48;
  for (int i = 0; i < n; ++i) {
    const double t = R * std::pow(2.0, -12.0 * i / (n - 1));
    const double v = val(t);
    if (v > best) {
      best = v;
      best_t = t;
    }
  }
  double a = best_t / 1.2, b = std::min(R, best_t * 1.2);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = val(c), fd = val(d);
  for (int it = 0; it < 60 && b - a > 1e-12 * R; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = val(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = val(d);
    }
  }
  const double t = 0.5 * (a + b);
  return val(t) > best ? t : best_t;
}

struct Ascent {
  Vector x;
  double value = -std::numeric_limits<double>::infinity();
  double kkt = std::numeric_limits<double>::infinity();
  int iterations = 0;
  Vector grad;
};

// Projected Newton ascent; falls back to the gradient where the Hessian is
// not negative definite or the Newton step fails the Armijo test.
Ascent ascend(const Slice& slice, Vector x, double R, const SolverOptions& opts, double bound) {
  Ascent out;
  x = project_slice(x, R);
  double fx = slice.value(x);
  Vector G;
  Matrix H;
  int it = 0;
  for (; it < opts.inner_max_iter; ++it) {
    slice.gradient_hessian(x, G, H);
    const double kkt = (project_slice(x + G, R) - x).norm();
    if (kkt < opts.inner_kkt) break;
    Eigen::LLT<Matrix> llt(-H);
    bool moved = false;
    bool done = false;
    for (int mode = 0; mode < 2 && !moved; ++mode) {
      Vector d;
      if (mode == 0) {
        if (llt.info() != Eigen::Success) continue;
        d = llt.solve(G);
        const double decrement = G.dot(d);
        if (!(decrement > 0.0)) continue;
        // predicted gain at rounding level: take the full step and stop
        if (decrement < 1e-14 * std::max(1.0, std::abs(fx))) {
          x = project_slice(x + d, R);
          fx = slice.value(x);
          done = true;
          break;
        }
      } else {
        d = G;
      }
      double alpha = 1.0;
      for (int bt = 0; bt < 30; ++bt, alpha *= 0.5) {
        const Vector y = project_slice(x + alpha * d, R);
        const double fy = slice.value(y);
        if (!std::isfinite(fy)) continue;
        if (fy >= fx + kArmijo * G.dot(y - x) && fy >= fx && (y - x).norm() > 0.0) {
          x = y;
          fx = fy;
          moved = true;
          break;
        }
      }
    }
    if (fx > bound) {
      throw Error(ErrorKind::InnerDivergence, "inner maximum exceeds the supplied bound");
    }
    if (done || !moved) break;
  }
  slice.gradient_hessian(x, G, H);
  out.kkt = (project_slice(x + G, R) - x).norm();
  out.x = x;
  out.value = fx;
  out.iterations = it;
  out.grad = G;
  return out;
}

}  // namespace

InnerResult inner_maximize(const FunctionalContext& ctx, const Vector& u_plus, double R,
                           const SolverOptions& opts, const Vector& warm, double value_bound) {
  if (!(R > 0.0)) throw Error(ErrorKind::InvalidSpec, "inner radius must be positive");
  const Slice slice(ctx, u_plus);
  const int d = slice.dim();
  std::vector<Vector> starts;
  if (warm.size() == d) starts.push_back(warm);
  if (static_cast<int>(starts.size()) < opts.inner_starts) {
    Vector x = Vector::Zero(d);
    x[0] = ray_start(slice, R);
    starts.push_back(x);
  }
  for (int k = 0; static_cast<int>(starts.size()) < opts.inner_starts; ++k) {
    auto rng = task_rng(opts.seed, 0x1000 + static_cast<std::uint64_t>(k));
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unif;
    Vector x(d);
    for (int i = 0; i < d; ++i) x[i] = gauss(rng);
    x *= R * std::pow(unif(rng), 1.0 / d) / x.norm();
    x[0] = std::abs(x[0]);
    starts.push_back(x);
  }
  if (starts.empty()) throw Error(ErrorKind::InvalidSpec, "inner_starts must be at least 1");

  std::vector<Ascent> runs(starts.size());
  parallel_for(starts.size(), [&](std::size_t k) { runs[k] = ascend(slice, starts[k], R, opts, value_bound); });

  std::size_t best = 0;
  for (std::size_t k = 1; k < runs.size(); ++k) {
    if (runs[k].value > runs[best].value) best = k;
  }
  const Ascent& a = runs[best];
  InnerResult res;
  res.t = a.x[0];
  res.s = a.x.tail(d - 1);
  res.w = slice.point(a.x);
  res.value = a.value;
  res.kkt = a.kkt;
  for (const auto& r : runs) res.iterations += r.iterations;
  const double n = a.x.norm();
  res.on_boundary = n >= R * (1.0 - 1e-10);
  res.outward = res.on_boundary && a.grad.dot(a.x) > 0.0;
  return res;
}

Vector envelope_gradient(const FunctionalContext& ctx, const OuterState& st) {
  const auto& s = ctx.split();
  const Vector g = st.inner.t * s.project_plus(gradX(ctx, st.inner.w));
  return g - s.op().form(g, st.u) * st.u;
}

OuterState evaluate_direction(const FunctionalContext& ctx, const Vector& u, double R,
                              const SolverOptions& opts, const Vector& warm) {
  const auto& s = ctx.split();
  OuterState st;
  Vector v = s.project_plus(u);
  st.u = v / s.norm_plus(v);
  st.R = R;
  Vector start = warm;
  for (;;) {
    st.inner = inner_maximize(ctx, st.u, st.R, opts, start);
    if (!st.inner.outward) break;
    if (st.r_doublings >= kMaxDoublings) {
      throw Error(ErrorKind::InnerDivergence, "inner maximiser keeps pressing on the enlarged ball");
    }
    st.R *= 2.0;
    ++st.r_doublings;
    start.resize(st.inner.s.size() + 1);
    start << st.inner.t, st.inner.s;
  }
  st.phi = st.inner.value;
  const Vector g = envelope_gradient(ctx, st);
  st.envelope_norm = std::sqrt(std::max(0.0, s.op().form(g, g)));
  return st;
}

OuterState outer_step(const FunctionalContext& ctx, const OuterState& st, const SolverOptions& opts) {
  if (st.envelope_norm < opts.envelope_tol) return st;
  const auto& s = ctx.split();
  const Vector g = envelope_gradient(ctx, st);
  const double ng = std::sqrt(std::max(0.0, s.op().form(g, g)));
  const Vector d = -g / ng;
  Vector warm(st.inner.s.size() + 1);
  warm << st.inner.t, st.inner.s;
  SolverOptions line = opts;
  line.inner_starts = 1;
  double theta = st.step;
  while (theta >= 1e-12) {
    const Vector v = std::cos(theta) * st.u + std::sin(theta) * d;
    OuterState next = evaluate_direction(ctx, v, st.R, line, warm);
    if (next.phi <= st.phi - kArmijo * theta * ng) {
      next.step = std::min(2.0 * theta, 0.5);
      next.r_doublings += st.r_doublings;
      return next;
    }
    theta *= 0.5;
  }
  throw Error(ErrorKind::LineSearchStall, "no Armijo decrease of the inner maximum along the geodesic");
}

void evaluate_solution(const FunctionalContext& ctx, const Vector& u, double delta,
                       const SolverOptions& opts, SolveReport& rep) {
  const auto& s = ctx.split();
  rep.u_star = u;
  rep.lambda = ctx.lambda();
  rep.delta = delta;
  rep.J_value = J(ctx, u);
  const Vector gx = gradX(ctx, u);
  rep.residual_X = s.energy_norm(gx);
  rep.norm_X = s.energy_norm(u);
  rep.cerami_residual = (1.0 + rep.norm_X) * rep.residual_X;
  rep.tau_norm_value = s.tau_norm(u);
  const Vector Au = s.op().apply(u);
  const Vector fu = ctx.ftilde(u);
  const Vector r = Au - fu;
  const auto& g = ctx.grid();
  rep.pde_residual = std::sqrt(inner_L2w(g, r, r));
  const double scale = std::max(std::sqrt(inner_L2w(g, Au, Au)), std::sqrt(inner_L2w(g, fu, fu)));
  rep.pde_relative = scale > 0.0 ? rep.pde_residual / scale : rep.pde_residual;

  IdentityChecks& ic = rep.identity_checks;
  ic.quadratic_form = inner_L2w(g, Au, u) - (s.norm_plus_sq(u) - s.norm_minus_sq(u));
  ic.dJ_uu = dJ(ctx, u, u);
  ic.dJ_ek.clear();
  ic.dJ_ek_max = 0.0;
  for (int k = 0; k < s.n_minus(); ++k) {
    ic.dJ_ek.push_back(dJ(ctx, u, s.e(k)));
    ic.dJ_ek_max = std::max(ic.dJ_ek_max, std::abs(ic.dJ_ek.back()));
  }
  ic.minus_residual = s.energy_norm(gradX(ctx, Vector(-u)));

  rep.converged = rep.cerami_residual < opts.tol_solve;
  rep.nontrivial = rep.tau_norm_value >= 0.5 * delta && rep.tau_norm_value > 0.0;
  // J'(u)(u) and J'(u)(e_k) are bounded by ||u|| and 1 times the dual norm
  rep.nehari_ok = std::abs(ic.dJ_uu) <= opts.tol_solve * std::max(1.0, rep.norm_X) &&
                  ic.dJ_ek_max <= opts.tol_solve;
  rep.boundary_mass = boundary_mass(g, u).fraction;
  rep.energy_tol = 1e-6 * std::max(1.0, std::abs(rep.J_value));
  rep.energy_bracket_ok = true;
  if (std::isfinite(rep.inf_sphere)) {
    rep.energy_bracket_ok = rep.energy_bracket_ok && rep.J_value >= rep.inf_sphere - rep.energy_tol;
  }
  if (std::isfinite(rep.c_upper)) {
    rep.energy_bracket_ok = rep.energy_bracket_ok && rep.J_value <= rep.c_upper + rep.energy_tol;
  }
}

SolveReport refine(const FunctionalContext& ctx, const Vector& u0, double delta, const SolverOptions& opts) {
  const auto& s = ctx.split();
  const auto& op = s.op();
  const Vector& w = ctx.grid().w;
  if (u0.size() != w.size()) throw Error(ErrorKind::ShapeMismatch, "refine start has the wrong length");
  Vector u = u0;
  auto merit = [&](const Vector& x) { return s.energy_norm(gradX(ctx, x)); };
  double res = merit(u);
  int it = 0;
  bool converged = false;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
  bool analysed = false;
  SparseMatrix diag(u.size(), u.size());
  diag.reserve(Eigen::VectorXi::Constant(u.size(), 1));
  for (Eigen::Index i = 0; i < u.size(); ++i) diag.insert(i, i) = 0.0;
  for (;; ++it) {
    if ((1.0 + s.energy_norm(u)) * res < opts.tol_solve) {
      converged = true;
      break;
    }
    if (it >= opts.max_refine) break;
    // Jacobian of S u - M f~(u) in the form inner product
    const Vector dd = w.cwiseProduct(ctx.dftilde(u));
    for (Eigen::Index i = 0; i < u.size(); ++i) diag.coeffRef(i, i) = dd[i];
    const SparseMatrix jac = op.S - diag;
    if (!analysed) {
      ldlt.analyzePattern(jac);
      analysed = true;
    }
    ldlt.factorize(jac);
    if (ldlt.info() != Eigen::Success) throw Error(ErrorKind::NumericalFailure, "Newton Jacobian factorisation failed");
    const Vector rhs = -(op.S * u - w.cwiseProduct(ctx.ftilde(u)));
    Vector du = ldlt.solve(rhs);
    const Vector corr = rhs - jac * du;
    du += ldlt.solve(corr);
    if (!du.allFinite()) throw Error(ErrorKind::NumericalFailure, "Newton step is not finite");
    double alpha = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 40; ++bt, alpha *= 0.5) {
      const Vector cand = u + alpha * du;
      const double rc = merit(cand);
      if (std::isfinite(rc) && rc <= (1.0 - kArmijo * alpha) * res) {
        u = cand;
        res = rc;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  SolveReport rep;
  rep.iterations.refine = it;
  evaluate_solution(ctx, u, delta, opts, rep);
  if (!rep.nontrivial) {
    throw Error(ErrorKind::CollapseToZero, "refined point has tau norm below delta/2");
  }
  if (!converged) {
    throw Error(ErrorKind::MaxIterExceeded, "refinement did not reach the Cerami tolerance");
  }
  return rep;
}

Vector initial_direction(const SpectralSplit& split) {
  const int k = split.first_positive();
  if (k >= split.n_resolved()) throw Error(ErrorKind::UnresolvedComponent, "no positive eigenpair resolved");
  return split.eigvecs().col(k) / std::sqrt(split.eigvals()[k]);
}

SolveReport solve(const FunctionalContext& ctx, const GeometryReport& geometry, const SolverOptions& opts) {
  if (!geometry.linking_passed) {
    throw Error(ErrorKind::GeometryFailure, "linking geometry checks did not pass");
  }
  if (!(ctx.lambda() <= geometry.constants.lambda_max)) {
    throw Error(ErrorKind::InvalidSpec, "lambda exceeds the admissible threshold");
  }
  IterationCounts counts;
  OuterState st = evaluate_direction(ctx, initial_direction(ctx.split()), geometry.R.R, opts);
  const double c_upper = st.phi;
  counts.inner += st.inner.iterations;
  while (st.envelope_norm >= opts.envelope_tol) {
    if (counts.outer >= opts.max_outer) {
      throw Error(ErrorKind::MaxIterExceeded, "outer descent did not reach the envelope tolerance");
    }
    st = outer_step(ctx, st, opts);
    counts.inner += st.inner.iterations;
    ++counts.outer;
  }
  // full multistart at the final direction
  {
    Vector warm(st.inner.s.size() + 1);
    warm << st.inner.t, st.inner.s;
    const int doublings = st.r_doublings;
    const double step = st.step;
    OuterState check = evaluate_direction(ctx, st.u, st.R, opts, warm);
    counts.inner += check.inner.iterations;
    check.r_doublings += doublings;
    check.step = step;
    st = check;
  }
  counts.r_doublings = st.r_doublings;

  SolveReport rep = refine(ctx, st.inner.w, geometry.delta.delta, opts);
  rep.iterations.outer = counts.outer;
  rep.iterations.inner = counts.inner;
  rep.iterations.r_doublings = counts.r_doublings;
  rep.c_upper = c_upper;
  rep.phi_final = st.phi;
  rep.envelope_norm = st.envelope_norm;
  rep.inf_sphere = geometry.link.b;
  rep.R = st.R;
  const int refine_steps = rep.iterations.refine;
  evaluate_solution(ctx, rep.u_star, geometry.delta.delta, opts, rep);
  rep.iterations.refine = refine_steps;
  return rep;
}

void write_snapshot(const std::string& path, const Grid& g, const Vector& u) {
  if (static_cast<std::size_t>(u.size()) != g.size()) {
    throw Error(ErrorKind::ShapeMismatch, "snapshot vector does not match the grid");
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::ConfigError, "cannot open " + path);
  auto put_u32 = [&](std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 4);
  };
  os.write("LNKV1", 5);
  put_u32(static_cast<std::uint32_t>(g.Nr));
  put_u32(static_cast<std::uint32_t>(g.Nz));
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    std::uint64_t bits;
    const double v = u[i];
    std::memcpy(&bits, &v, sizeof bits);
    unsigned char b[8];
    for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>(bits >> (8 * k));
    os.write(reinterpret_cast<const char*>(b), 8);
  }
  if (!os) throw Error(ErrorKind::ConfigError, "write failed for " + path);
}

Vector read_snapshot(const std::string& path, const Grid& g) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::ConfigError, "cannot open " + path);
  char magic[5];
  is.read(magic, 5);
  if (!is || std::memcmp(magic, "LNKV1", 5) != 0) throw Error(ErrorKind::ConfigError, path + ": bad snapshot magic");
  auto get_u32 = [&]() {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
  };
  const std::uint32_t nr = get_u32();
  const std::uint32_t nz = get_u32();
  if (!is || static_cast<int>(nr) != g.Nr || static_cast<int>(nz) != g.Nz) {
    throw Error(ErrorKind::ShapeMismatch, path + ": snapshot dimensions do not match the grid");
  }
  Vector u(static_cast<Eigen::Index>(g.size()));
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(b[k]) << (8 * k);
    std::memcpy(&u[i], &bits, sizeof bits);
  }
  if (!is) throw Error(ErrorKind::ConfigError, path + ": truncated snapshot");
  return u;
}

void write_solution_csv(const std::string& path, const Grid& g, const Vector& u) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::ConfigError, "cannot open " + path);
  os << "r,z,u\n" << std::setprecision(17);
  for (int i = 0; i < g.Nr; ++i) {
    for (int j = 0; j < g.Nz; ++j) os << g.r[i] << ',' << g.z[j] << ',' << u[g.index(i, j)] << '\n';
  }
}

void to_json(nlohmann::json& j, const SolverOptions& o) {
  j = {{"tol_solve", o.tol_solve},       {"envelope_tol", o.envelope_tol}, {"max_outer", o.max_outer},
       {"max_refine", o.max_refine},     {"inner_starts", o.inner_starts}, {"inner_max_iter", o.inner_max_iter},
       {"inner_kkt", o.inner_kkt},       {"seed", o.seed}};
}

void to_json(nlohmann::json& j, const InnerResult& r) {
  j = {{"t", r.t},         {"value", r.value},           {"kkt", r.kkt},
       {"on_boundary", r.on_boundary}, {"outward", r.outward}, {"iterations", r.iterations}};
}

void to_json(nlohmann::json& j, const IdentityChecks& c) {
  j = {{"quadratic_form_identity", c.quadratic_form},
       {"dJ_u_u", c.dJ_uu},
       {"dJ_u_ek_max", c.dJ_ek_max},
       {"dJ_u_ek", c.dJ_ek},
       {"residual_at_minus_u", c.minus_residual}};
}

void to_json(nlohmann::json& j, const IterationCounts& c) {
  j = {{"outer", c.outer}, {"inner", c.inner}, {"refine", c.refine}, {"R_doublings", c.r_doublings}};
}

void to_json(nlohmann::json& j, const SolveReport& r) {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  j = {{"J_value", r.J_value},
       {"residual_X", r.residual_X},
       {"cerami_residual", r.cerami_residual},
       {"tau_norm", r.tau_norm_value},
       {"norm_X", r.norm_X},
       {"pde_residual", r.pde_residual},
       {"pde_relative", r.pde_relative},
       {"iterations", r.iterations},
       {"identity_checks", r.identity_checks},
       {"lambda", r.lambda},
       {"c_upper", num(r.c_upper)},
       {"c_upper_kind", "max of J over M(u+) for the initial direction (identity homotopy)"},
       {"phi_final", num(r.phi_final)},
       {"envelope_norm", num(r.envelope_norm)},
       {"inf_sphere_estimate", num(r.inf_sphere)},
       {"delta", r.delta},
       {"R", r.R},
       {"energy_tol", r.energy_tol},
       {"converged", r.converged},
       {"nontrivial", r.nontrivial},
       {"nehari_ok", r.nehari_ok},
       {"energy_bracket_ok", r.energy_bracket_ok},
       {"boundary_mass", r.boundary_mass}};
}

}  // namespace linkvar
