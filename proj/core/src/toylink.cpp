#include "linkvar/toylink.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "linkvar/error.hpp"

namespace linkvar {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kPi = std::numbers::pi;

double abs_pow(double x, double e) {
  x = std::abs(x);
  if (e == std::floor(e) && e >= 0.0 && e <= 32.0) {
    double r = 1.0;
    for (int k = 0; k < static_cast<int>(e); ++k) r *= x;
    return r;
  }
  return std::pow(x, e);
}

std::mt19937_64 task_rng(std::uint64_t seed, std::uint64_t task) {
  std::seed_seq seq{seed, task, std::uint64_t{0x70f1a2b3c4d5e6f7ULL}};
  return std::mt19937_64(seq);
}

// Point on the sphere of radius rho in R^d from hyperspherical angles:
// x_0 = rho cos a_0, x_1 = rho sin a_0 cos a_1, ..., x_{d-1} = rho sin a_0 ... sin a_{d-2}.
void spherical(const std::vector<double>& a, double rho, VectorXd& x) {
  const int d = static_cast<int>(x.size());
  double s = rho;
  for (int k = 0; k < d - 1; ++k) {
    x[k] = s * std::cos(a[k]);
    s *= std::sin(a[k]);
  }
  x[d - 1] = s;
}

// Calls body(x) on every node of an angular grid of the sphere of radius rho in R^d.
// `half` restricts to x_0 >= 0.
template <typename Body>
void sphere_grid(int d, double rho, int density, bool half, Body&& body) {
  VectorXd x(d);
  if (d == 1) {
    x[0] = rho;
    body(x);
    if (!half) {
      x[0] = -rho;
      body(x);
    }
    return;
  }
  std::vector<double> lo(d - 1, 0.0), hi(d - 1, kPi);
  hi[d - 2] = 2.0 * kPi;
  if (half) {
    if (d == 2) {
      lo[0] = -0.5 * kPi;
      hi[0] = 0.5 * kPi;
    } else {
      hi[0] = 0.5 * kPi;
    }
  }
  std::vector<int> idx(d - 1, 0);
  std::vector<double> a(d - 1);
  for (;;) {
    for (int k = 0; k < d - 1; ++k) a[k] = lo[k] + (hi[k] - lo[k]) * idx[k] / (density - 1);
    if (d == 2) {
      x[0] = rho * std::cos(a[0]);
      x[1] = rho * std::sin(a[0]);
    } else {
      spherical(a, rho, x);
    }
    body(x);
    int k = 0;
    while (k < d - 1 && ++idx[k] == density) idx[k++] = 0;
    if (k == d - 1) break;
  }
}

// Slice basis: column 0 is (u+, 0), the rest the X- coordinate axes.
MatrixXd slice_basis(const ToyProblem& tp, const VectorXd& u_plus) {
  MatrixXd B = MatrixXd::Zero(tp.dim(), 1 + tp.n_minus);
  B.col(0).head(tp.n_plus) = u_plus;
  for (int i = 0; i < tp.n_minus; ++i) B(tp.n_plus + i, 1 + i) = 1.0;
  return B;
}

VectorXd project_half_ball(VectorXd y, double R) {
  y[0] = std::max(y[0], 0.0);
  const double n = y.norm();
  if (n > R) y *= R / n;
  return y;
}

// Projected Newton ascent of y -> J(B y) over { y_0 >= 0, |y| <= R }.
VectorXd slice_ascent(const ToyProblem& tp, const MatrixXd& B, VectorXd y, double R) {
  y = project_half_ball(y, R);
  double fy = tp.J(B * y);
  for (int it = 0; it < 200; ++it) {
    const VectorXd x = B * y;
    const VectorXd G = B.transpose() * tp.gradient(x);
    if ((project_half_ball(y + G, R) - y).norm() < 1e-14) break;
    const MatrixXd H = B.transpose() * tp.hessian_diagonal(x).asDiagonal() * B;
    Eigen::LLT<MatrixXd> llt(-H);
    bool moved = false;
    for (int mode = 0; mode < 2 && !moved; ++mode) {
      VectorXd d = G;
      if (mode == 0) {
        if (llt.info() != Eigen::Success) continue;
        d = llt.solve(G);
        if (!(G.dot(d) > 0.0)) continue;
      }
      double alpha = 1.0;
      for (int bt = 0; bt < 60; ++bt, alpha *= 0.5) {
        const VectorXd z = project_half_ball(y + alpha * d, R);
        const double fz = tp.J(B * z);
        if (fz > fy) {
          y = z;
          fy = fz;
          moved = true;
          break;
        }
      }
    }
    if (!moved) break;
  }
  return y;
}

VectorXd random_unit(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> gauss;
  VectorXd x(d);
  do {
    for (int i = 0; i < d; ++i) x[i] = gauss(rng);
  } while (x.norm() == 0.0);
  return x / x.norm();
}

}  // namespace

void ToyProblem::validate() const {
  if (n_plus < 1 || n_plus > 3 || n_minus < 0 || n_minus > 3) {
    throw Error(ErrorKind::InvalidSpec, "toy dimensions must satisfy 1 <= n+ <= 3 and 0 <= n- <= 3");
  }
  if (!(2.0 < q && q < p)) throw Error(ErrorKind::InvalidSpec, "toy exponents must satisfy 2 < q < p");
  if (!(lambda >= 0.0)) throw Error(ErrorKind::InvalidSpec, "toy lambda must be nonnegative");
}

double ToyProblem::J(const VectorXd& x) const {
  double quad = 0.5 * x.head(n_plus).squaredNorm() - 0.5 * x.tail(n_minus).squaredNorm();
  double nl = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    nl += abs_pow(x[i], p) / p;
    if (lambda != 0.0) nl -= lambda * abs_pow(x[i], q) / q;
  }
  return quad - nl;
}

VectorXd ToyProblem::gradient(const VectorXd& x) const {
  VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double lin = i < n_plus ? x[i] : -x[i];
    g[i] = lin - abs_pow(x[i], p - 2.0) * x[i] + lambda * abs_pow(x[i], q - 2.0) * x[i];
  }
  return g;
}

VectorXd ToyProblem::hessian_diagonal(const VectorXd& x) const {
  VectorXd h(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double lin = i < n_plus ? 1.0 : -1.0;
    h[i] = lin - (p - 1.0) * abs_pow(x[i], p - 2.0) + lambda * (q - 1.0) * abs_pow(x[i], q - 2.0);
  }
  return h;
}

double ToyProblem::tau_norm(const VectorXd& x) const {
  double s = 0.0;
  for (int k = 0; k < n_minus; ++k) s += std::ldexp(std::abs(x[n_plus + k]), -(k + 2));
  return std::max(x.head(n_plus).norm(), s);
}

ToyCUpper toy_c_upper(const ToyProblem& tp, const VectorXd& u_plus, double R, int density) {
  tp.validate();
  if (u_plus.size() != tp.n_plus || !(u_plus.norm() > 0.0)) {
    throw Error(ErrorKind::InvalidSpec, "toy direction must be a nonzero vector of length n+");
  }
  if (density < 2) throw Error(ErrorKind::InvalidResolution, "toy grid density must be at least 2");
  const VectorXd u = u_plus / u_plus.norm();
  const MatrixXd B = slice_basis(tp, u);
  const int d = 1 + tp.n_minus;
  ToyCUpper out;
  out.density = density;
  out.grid_sup = -std::numeric_limits<double>::infinity();
  VectorXd best_y = VectorXd::Zero(d);
  for (int i = 0; i < density; ++i) {
    const double rho = R * i / (density - 1);
    sphere_grid(d, rho, density, true, [&](const VectorXd& y) {
      const double v = tp.J(B * y);
      ++out.evaluations;
      if (v > out.grid_sup) {
        out.grid_sup = v;
        best_y = y;
      }
    });
  }
  const VectorXd y = slice_ascent(tp, B, best_y, R);
  const double polished = tp.J(B * y);
  if (polished >= out.grid_sup) {
    out.value = polished;
    out.argmax = B * y;
    out.t = y[0];
  } else {
    out.value = out.grid_sup;
    out.argmax = B * best_y;
    out.t = best_y[0];
  }
  return out;
}

double toy_sphere_infimum(const ToyProblem& tp, double r, int density) {
  tp.validate();
  const int d = tp.n_plus;
  double best = std::numeric_limits<double>::infinity();
  VectorXd best_x;
  VectorXd full = VectorXd::Zero(tp.dim());
  sphere_grid(d, r, density, false, [&](const VectorXd& x) {
    full.head(d) = x;
    const double v = tp.J(full);
    if (v < best) {
      best = v;
      best_x = x;
    }
  });
  // Riemannian gradient polish on the sphere
  VectorXd x = best_x;
  double theta = 0.1;
  for (int it = 0; it < 500 && d > 1; ++it) {
    full.head(d) = x;
    const VectorXd g = tp.gradient(full).head(d);
    const VectorXd gt = g - (g.dot(x) / (r * r)) * x;
    const double ng = gt.norm();
    if (ng < 1e-15) break;
    const VectorXd dir = -gt / ng;
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt, theta *= 0.5) {
      const VectorXd y = std::cos(theta) * x + std::sin(theta) * r * dir;
      full.head(d) = y * (r / y.norm());
      const double v = tp.J(full);
      if (v < best) {
        best = v;
        x = full.head(d);
        moved = true;
        theta = std::min(2.0 * theta, 0.5);
        break;
      }
    }
    if (!moved) break;
  }
  return best;
}

ToyNehari toy_nehari_infimum(const ToyProblem& tp, int n_directions, double R, std::uint64_t seed) {
  tp.validate();
  ToyNehari out;
  out.infimum = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n_directions; ++k) {
    auto rng = task_rng(seed, static_cast<std::uint64_t>(k));
    const VectorXd u = random_unit(rng, tp.n_plus);
    const MatrixXd B = slice_basis(tp, u);
    const ToyCUpper start = toy_c_upper(tp, u, R, 17);
    VectorXd y = B.transpose() * start.argmax;
    // damped Newton on the slice stationarity system
    double res = (B.transpose() * tp.gradient(B * y)).norm();
    for (int it = 0; it < 100 && res > 1e-13; ++it) {
      const VectorXd x = B * y;
      const VectorXd G = B.transpose() * tp.gradient(x);
      const MatrixXd H = B.transpose() * tp.hessian_diagonal(x).asDiagonal() * B;
      const VectorXd step = H.fullPivLu().solve(-G);
      double alpha = 1.0;
      bool moved = false;
      for (int bt = 0; bt < 40; ++bt, alpha *= 0.5) {
        const VectorXd z = y + alpha * step;
        const double rz = (B.transpose() * tp.gradient(B * z)).norm();
        if (rz < res) {
          y = z;
          res = rz;
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
    const VectorXd w = B * y;
    double stat = std::abs(tp.dJ(w, w));
    for (int i = 0; i < tp.n_minus; ++i) {
      stat = std::max(stat, std::abs(tp.gradient(w)[tp.n_plus + i]));
    }
    if (!(y[0] > 0.0) || !(stat < 1e-10)) {
      ++out.failed;
      continue;
    }
    ++out.found;
    out.max_stationarity = std::max(out.max_stationarity, stat);
    out.points.push_back(w);
    const double val = tp.J(w);
    if (val < out.infimum) {
      out.infimum = val;
      out.best_direction = u;
    }
  }
  if (out.found == 0) {
    throw Error(ErrorKind::RootFindFailure, "no Nehari–Pankov point found along any direction");
  }
  return out;
}

ToyA4Report toy_check_A4(const ToyProblem& tp, const ToyNehari& nehari, long samples, std::uint64_t seed) {
  ToyA4Report rep;
  rep.samples = samples;
  rep.identity_checked = tp.lambda == 0.0;
  rep.worst_gap = std::numeric_limits<double>::infinity();
  if (nehari.points.empty()) return rep;
  auto rng = task_rng(seed, 0xA4);
  std::uniform_real_distribution<double> unif;
  std::normal_distribution<double> gauss;
  for (const VectorXd& u : nehari.points) {
    rep.equality_gap = std::max(rep.equality_gap, std::abs(tp.J(u) - tp.J(1.0 * u)));
  }
  for (long k = 0; k < samples; ++k) {
    const VectorXd& u = nehari.points[static_cast<std::size_t>(k) % nehari.points.size()];
    const double t = 3.0 * unif(rng);
    VectorXd v = VectorXd::Zero(tp.dim());
    const double scale = 3.0 * unif(rng) * u.norm();
    for (int i = 0; i < tp.n_minus; ++i) v[tp.n_plus + i] = gauss(rng);
    if (tp.n_minus > 0) v *= scale / std::max(v.norm(), 1e-300);
    const double gap = tp.J(u) - tp.J(t * u + v);
    rep.worst_gap = std::min(rep.worst_gap, gap);
    if (gap < -1e-10) ++rep.violations;
    if (rep.identity_checked) {
      const VectorXd dir = 0.5 * (t * t - 1.0) * u + t * v;
      rep.max_identity_residual = std::max(rep.max_identity_residual, std::abs(tp.dJ(u, dir)));
    }
  }
  return rep;
}

ToyReport run_toy(const ToyProblem& tp, const ToyOptions& opts) {
  tp.validate();
  ToyReport rep;
  rep.problem = tp;
  rep.tol = opts.tol;
  bool found = false;
  for (int k = 0; k <= 30; ++k) {
    const double r = std::ldexp(1.0, -k);
    const double inf = toy_sphere_infimum(tp, r, opts.density);
    if (inf >= 0.25 * r * r) {
      rep.r = r;
      rep.inf_sphere = inf;
      found = true;
      break;
    }
  }
  if (!found) throw Error(ErrorKind::GeometryFailure, "no toy radius with inf J >= r^2/4");

  // R: J <= 0 on the boundary of M(e1+), checked on the grid
  VectorXd e1 = VectorXd::Zero(tp.n_plus);
  e1[0] = 1.0;
  const MatrixXd B = slice_basis(tp, e1);
  const int d = 1 + tp.n_minus;
  for (double R = 4.0 * rep.r;; R *= 2.0) {
    if (R > std::ldexp(rep.r, 16)) throw Error(ErrorKind::NoAnticoercivity, "toy boundary sup stays positive");
    double sup = -std::numeric_limits<double>::infinity();
    sphere_grid(d, R, opts.density, true, [&](const VectorXd& y) { sup = std::max(sup, tp.J(B * y)); });
    if (tp.n_minus > 0) {
      for (int i = 0; i < opts.density; ++i) {
        const double rho = R * i / (opts.density - 1);
        sphere_grid(tp.n_minus, rho, opts.density, false, [&](const VectorXd& s) {
          VectorXd y = VectorXd::Zero(d);
          y.tail(tp.n_minus) = s;
          sup = std::max(sup, tp.J(B * y));
        });
      }
    }
    if (sup <= 0.0) {
      rep.R = R;
      break;
    }
  }
  rep.nehari = toy_nehari_infimum(tp, opts.directions, rep.R, opts.seed);
  rep.c_upper = toy_c_upper(tp, rep.nehari.best_direction, rep.R, opts.density);
  rep.a4 = toy_check_A4(tp, rep.nehari, opts.a4_samples, opts.seed);
  rep.chain_ok = rep.inf_sphere <= rep.c_upper.value + opts.tol &&
                 rep.c_upper.value <= rep.nehari.infimum + opts.tol;
  return rep;
}

void to_json(nlohmann::json& j, const ToyProblem& t) {
  j = {{"n_plus", t.n_plus}, {"n_minus", t.n_minus}, {"p", t.p}, {"q", t.q}, {"lambda", t.lambda}};
}

void to_json(nlohmann::json& j, const ToyCUpper& c) {
  j = {{"value", c.value},
       {"grid_sup", c.grid_sup},
       {"t", c.t},
       {"density", c.density},
       {"evaluations", c.evaluations},
       {"kind", "upper bound on c (identity homotopy)"}};
}

void to_json(nlohmann::json& j, const ToyNehari& n) {
  j = {{"infimum", n.infimum}, {"found", n.found}, {"failed", n.failed}, {"max_stationarity", n.max_stationarity}};
}

void to_json(nlohmann::json& j, const ToyA4Report& a) {
  j = {{"samples", a.samples},
       {"violations", a.violations},
       {"worst_gap", std::isfinite(a.worst_gap) ? nlohmann::json(a.worst_gap) : nlohmann::json(nullptr)},
       {"max_identity_residual", a.max_identity_residual},
       {"equality_gap", a.equality_gap},
       {"identity_checked", a.identity_checked}};
}

void to_json(nlohmann::json& j, const ToyReport& r) {
  j = {{"problem", r.problem},
       {"r", r.r},
       {"inf_sphere", r.inf_sphere},
       {"R", r.R},
       {"c_upper", r.c_upper},
       {"nehari", r.nehari},
       {"inequality_check", r.a4},
       {"tol", r.tol},
       {"chain_ok", r.chain_ok},
       {"chain", {r.inf_sphere, r.c_upper.value, r.nehari.infimum}}};
}

}  // namespace linkvar
