#include "linkvar/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "linkvar/error.hpp"

namespace linkvar {

namespace {

constexpr int kTableNodes = 2048;
constexpr double kGolden = 0.6180339887498949;

// x^e for x >= 0, by repeated squaring when e is a small integer.
double power(double x, double e) {
  if (e >= 0.0 && e <= 32.0 && e == std::floor(e)) {
    unsigned n = static_cast<unsigned>(e);
    double r = 1.0;
    while (n) {
      if (n & 1u) r *= x;
      x *= x;
      n >>= 1u;
    }
    return r;
  }
  return std::pow(x, e);
}

double f_positive(const NonlinearitySpec& s, double c, double u) {
  switch (s.f_family) {
    case FFamily::Power:
      return power(u, s.p - 1.0);
    case FFamily::LogArctan:
      if (u < s.rho) return power(u, s.q - 1.0) * std::log1p(power(u, s.p - s.q));
      return c * (1.0 + std::atan(u)) * power(u, s.p - 1.0);
  }
  return 0.0;
}

double df_positive(const NonlinearitySpec& s, double c, double u) {
  switch (s.f_family) {
    case FFamily::Power:
      return (s.p - 1.0) * power(u, s.p - 2.0);
    case FFamily::LogArctan:
      if (u < s.rho) {
        const double w = power(u, s.p - s.q);
        return (s.q - 1.0) * power(u, s.q - 2.0) * std::log1p(w) +
               (s.p - s.q) * power(u, s.p - 2.0) / (1.0 + w);
      }
      return c * (power(u, s.p - 1.0) / (1.0 + u * u) +
                  (1.0 + std::atan(u)) * (s.p - 1.0) * power(u, s.p - 2.0));
  }
  return 0.0;
}

// 1/(1+e^u) for u >= 0 without overflow.
double logistic_tail(double u) {
  const double e = std::exp(-u);
  return e / (1.0 + e);
}

double g_positive(const NonlinearitySpec& s, double u) {
  switch (s.g_family) {
    case GFamily::Power:
      return power(u, s.q - 1.0);
    case GFamily::ExpDamped:
      return power(u, s.q - 1.0) * logistic_tail(u);
    case GFamily::ArctanDamped:
      return power(u, s.q - 1.0) / (1.0 + std::atan(u));
    case GFamily::Zero:
      return 0.0;
  }
  return 0.0;
}

double dg_positive(const NonlinearitySpec& s, double u) {
  switch (s.g_family) {
    case GFamily::Power:
      return (s.q - 1.0) * power(u, s.q - 2.0);
    case GFamily::ExpDamped: {
      const double l = logistic_tail(u);
      // d/du 1/(1+e^u) = -l (1 - l)
      return (s.q - 1.0) * power(u, s.q - 2.0) * l - power(u, s.q - 1.0) * l * (1.0 - l);
    }
    case GFamily::ArctanDamped: {
      const double d = 1.0 + std::atan(u);
      return (s.q - 1.0) * power(u, s.q - 2.0) / d -
             power(u, s.q - 1.0) / (d * d * (1.0 + u * u));
    }
    case GFamily::Zero:
      return 0.0;
  }
  return 0.0;
}

double simpson_step(const std::function<double(double)>& f, double a, double fa, double b,
                    double fb, double m, double fm, double whole, double abs_tol,
                    double rel_tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double refined = left + right;
  const double tol = std::max(abs_tol, rel_tol * std::abs(refined));
  if (depth <= 0 || std::abs(refined - whole) <= 15.0 * tol) {
    return refined + (refined - whole) / 15.0;
  }
  return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * abs_tol, rel_tol, depth - 1) +
         simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * abs_tol, rel_tol, depth - 1);
}

// Golden-section search for the maximum of h on [a, b].
double golden_max(const std::function<double(double)>& h, double a, double b, int iters = 80) {
  double c = b - kGolden * (b - a);
  double d = a + kGolden * (b - a);
  double hc = h(c);
  double hd = h(d);
  for (int i = 0; i < iters; ++i) {
    if (hc > hd) {
      b = d;
      d = c;
      hd = hc;
      c = b - kGolden * (b - a);
      hc = h(c);
    } else {
      a = c;
      c = d;
      hc = hd;
      d = a + kGolden * (b - a);
      hd = h(d);
    }
  }
  return std::max(hc, hd);
}

bool nondecreasing(const std::vector<double>& v, double rel_slack) {
  for (std::size_t k = 1; k < v.size(); ++k) {
    const double scale = std::max(std::abs(v[k]), std::abs(v[k - 1]));
    if (v[k] < v[k - 1] - rel_slack * scale) return false;
  }
  return true;
}

bool nonincreasing(const std::vector<double>& v, double rel_slack) {
  for (std::size_t k = 1; k < v.size(); ++k) {
    const double scale = std::max(std::abs(v[k]), std::abs(v[k - 1]));
    if (v[k] > v[k - 1] + rel_slack * scale) return false;
  }
  return true;
}

}  // namespace

const char* to_string(FFamily family) noexcept {
  switch (family) {
    case FFamily::Power: return "power";
    case FFamily::LogArctan: return "log-arctan";
  }
  return "?";
}

const char* to_string(GFamily family) noexcept {
  switch (family) {
    case GFamily::Power: return "power";
    case GFamily::ExpDamped: return "exp-damped";
    case GFamily::ArctanDamped: return "arctan-damped";
    case GFamily::Zero: return "zero";
  }
  return "?";
}

FFamily parse_f_family(const std::string& name) {
  if (name == "power") return FFamily::Power;
  if (name == "log-arctan") return FFamily::LogArctan;
  throw Error(ErrorKind::InvalidSpec, "unknown f family '" + name + "'");
}

GFamily parse_g_family(const std::string& name) {
  if (name == "power") return GFamily::Power;
  if (name == "exp-damped") return GFamily::ExpDamped;
  if (name == "arctan-damped") return GFamily::ArctanDamped;
  if (name == "zero") return GFamily::Zero;
  throw Error(ErrorKind::InvalidSpec, "unknown g family '" + name + "'");
}

void NonlinearitySpec::validate(int ambient_dim) const {
  const double critical = ambient_dim > 2 ? 2.0 * ambient_dim / (ambient_dim - 2.0)
                                          : std::numeric_limits<double>::infinity();
  if (!(q > 2.0 && q < p && p < critical)) {
    throw Error(ErrorKind::InvalidSpec, "exponents must satisfy 2 < q < p < 2N/(N-2); got p=" +
                                            std::to_string(p) + ", q=" + std::to_string(q));
  }
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw Error(ErrorKind::InvalidSpec, "rho must be positive");
  }
}

std::vector<double> CertificationRange::magnitudes() const {
  std::vector<double> m(static_cast<std::size_t>(samples_per_sign));
  const double la = std::log(u_min);
  const double lb = std::log(u_max);
  for (int k = 0; k < samples_per_sign; ++k) {
    m[static_cast<std::size_t>(k)] = std::exp(la + (lb - la) * k / (samples_per_sign - 1));
  }
  m.front() = u_min;
  m.back() = u_max;
  return m;
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tol, double rel_tol) {
  if (a == b) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double m = 0.5 * (a + b);
  const double fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, fa, b, fb, m, fm, whole, abs_tol, rel_tol, 48);
}

PrimitiveTable::PrimitiveTable(Integrand f, double u_max, int nodes,
                               std::vector<double> breakpoints)
    : f_(std::move(f)) {
  const double u_lo = 1e-8;
  x_.push_back(0.0);
  const double la = std::log(u_lo);
  const double lb = std::log(u_max);
  for (int k = 0; k < nodes - 1; ++k) x_.push_back(std::exp(la + (lb - la) * k / (nodes - 2)));
  x_.back() = u_max;
  for (double b : breakpoints) {
    if (b > 0.0 && b < u_max) x_.push_back(b);
  }
  std::sort(x_.begin(), x_.end());
  x_.erase(std::unique(x_.begin(), x_.end()), x_.end());

  value_.assign(x_.size(), 0.0);
  slope_.resize(x_.size());
  for (std::size_t k = 0; k < x_.size(); ++k) slope_[k] = f_(x_[k]);
  for (std::size_t k = 1; k < x_.size(); ++k) {
    value_[k] = value_[k - 1] + adaptive_simpson(f_, x_[k - 1], x_[k], 1e-15, 1e-13);
  }
}

double PrimitiveTable::operator()(double u) const {
  const double x = std::abs(u);
  if (x >= x_.back()) {
    return value_.back() + adaptive_simpson(f_, x_.back(), x, 1e-15, 1e-13);
  }
  const auto it = std::upper_bound(x_.begin(), x_.end(), x);
  const std::size_t k = static_cast<std::size_t>(it - x_.begin()) - 1;
  const double h = x_[k + 1] - x_[k];
  const double t = (x - x_[k]) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + t;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  return h00 * value_[k] + h10 * h * slope_[k] + h01 * value_[k + 1] + h11 * h * slope_[k + 1];
}

Nonlinearity::Nonlinearity(const NonlinearitySpec& spec) : spec_(spec) {
  auto small_int = [](double e) { return e == std::floor(e) && e >= 3.0 && e <= 16.0; };
  if (spec.f_family == FFamily::Power && small_int(spec.p) &&
      (spec.g_family == GFamily::Zero || (spec.g_family == GFamily::Power && small_int(spec.q)))) {
    int_p_ = static_cast<int>(spec.p);
    int_q_ = spec.g_family == GFamily::Power ? static_cast<int>(spec.q) : 0;
  }
  if (spec_.f_family == FFamily::LogArctan) {
    const double r = spec_.rho;
    matching_c_ = power(r, spec_.q - spec_.p) * std::log1p(power(r, spec_.p - spec_.q)) /
                  (1.0 + std::atan(r));
    const NonlinearitySpec s = spec_;
    const double c = matching_c_;
    F_table_ = std::make_shared<PrimitiveTable>(
        [s, c](double u) { return f_positive(s, c, u); }, 1e4, kTableNodes,
        std::vector<double>{spec_.rho});
  }
  if (spec_.g_family == GFamily::ExpDamped || spec_.g_family == GFamily::ArctanDamped) {
    const NonlinearitySpec s = spec_;
    G_table_ = std::make_shared<PrimitiveTable>([s](double u) { return g_positive(s, u); },
                                                1e4, kTableNodes, std::vector<double>{});
  }
}

double Nonlinearity::f(double u) const {
  return u < 0.0 ? -f_positive(spec_, matching_c_, -u) : f_positive(spec_, matching_c_, u);
}

double Nonlinearity::g(double u) const {
  return u < 0.0 ? -g_positive(spec_, -u) : g_positive(spec_, u);
}

double Nonlinearity::df(double u) const { return df_positive(spec_, matching_c_, std::abs(u)); }

double Nonlinearity::dg(double u) const { return dg_positive(spec_, std::abs(u)); }

double Nonlinearity::F(double u) const {
  if (spec_.f_family == FFamily::Power) return power(std::abs(u), spec_.p) / spec_.p;
  return (*F_table_)(u);
}

double Nonlinearity::G(double u) const {
  switch (spec_.g_family) {
    case GFamily::Power: return power(std::abs(u), spec_.q) / spec_.q;
    case GFamily::Zero: return 0.0;
    default: return (*G_table_)(u);
  }
}

namespace {

inline double ipow(double a, int n) {
  double r = a;
  for (int k = 1; k < n; ++k) r *= a;
  return r;
}

}  // namespace

double Nonlinearity::weighted_primitive_sum(const double* u, const double* w, std::size_t n,
                                            double lambda) const {
  double sum = 0.0;
  if (int_p_ > 0) {
    const double ip = 1.0 / int_p_;
    const double lq = int_q_ > 0 ? lambda / int_q_ : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = std::abs(u[i]);
      double v = ipow(a, int_p_) * ip;
      if (lq != 0.0) v -= lq * ipow(a, int_q_);
      sum += w[i] * v;
    }
    return sum;
  }
  for (std::size_t i = 0; i < n; ++i) {
    double v = F(u[i]);
    if (lambda != 0.0) v -= lambda * G(u[i]);
    sum += w[i] * v;
  }
  return sum;
}

void Nonlinearity::combined(const double* u, double* out, std::size_t n, double lambda) const {
  if (int_p_ > 0) {
    const double l = int_q_ > 0 ? lambda : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = std::abs(u[i]);
      double v = ipow(a, int_p_ - 2);
      if (l != 0.0) v -= l * ipow(a, int_q_ - 2);
      out[i] = v * u[i];
    }
    return;
  }
  for (std::size_t i = 0; i < n; ++i) out[i] = f(u[i]) - lambda * g(u[i]);
}

void Nonlinearity::combined_derivative(const double* u, double* out, std::size_t n, double lambda) const {
  if (int_p_ > 0) {
    const double l = int_q_ > 0 ? lambda : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = std::abs(u[i]);
      double v = (int_p_ - 1) * ipow(a, int_p_ - 2);
      if (l != 0.0) v -= l * (int_q_ - 1) * ipow(a, int_q_ - 2);
      out[i] = v;
    }
    return;
  }
  for (std::size_t i = 0; i < n; ++i) out[i] = df(u[i]) - lambda * dg(u[i]);
}

double Nonlinearity::Phi(double lambda, double u) const {
  return 0.5 * f(u) * u - F(u) + lambda * G(u) - 0.5 * lambda * g(u) * u;
}

namespace {

double growth_constant(const Nonlinearity& nl, double eps, const CertificationRange& range,
                       bool use_f) {
  const double expo = (use_f ? nl.p() : nl.q()) - 1.0;
  auto fn = [&](double u) { return use_f ? nl.f(u) : nl.g(u); };
  auto ratio = [&](double u) {
    return std::max(0.0, std::abs(fn(u)) - eps * std::abs(u)) / std::pow(std::abs(u), expo);
  };
  const auto mags = range.magnitudes();
  double best = -1.0;
  double best_u = 0.0;
  std::size_t best_k = 0;
  bool all_zero = true;
  for (std::size_t k = 0; k < mags.size(); ++k) {
    for (double u : {mags[k], -mags[k]}) {
      if (fn(u) != 0.0) all_zero = false;
      const double r = ratio(u);
      if (r > best) {
        best = r;
        best_u = u;
        best_k = k;
      }
    }
  }
  if (all_zero) {
    if (use_f) throw Error(ErrorKind::DegenerateNonlinearity, "f vanishes on the sampling range");
    return 0.0;
  }
  const double lo = std::log(mags[best_k > 0 ? best_k - 1 : 0]);
  const double hi = std::log(mags[std::min(best_k + 1, mags.size() - 1)]);
  const double sign = best_u < 0.0 ? -1.0 : 1.0;
  const double refined = golden_max([&](double lu) { return ratio(sign * std::exp(lu)); }, lo, hi);
  return std::max(best, refined);
}

}  // namespace

double growth_constant_f(const Nonlinearity& nl, double eps, const CertificationRange& range) {
  return growth_constant(nl, eps, range, true);
}

double growth_constant_g(const Nonlinearity& nl, double eps, const CertificationRange& range) {
  return growth_constant(nl, eps, range, false);
}

double lower_constant_F(const Nonlinearity& nl, double eps, const CertificationRange& range) {
  auto A = [&](double u) {
    return (nl.F(u) + eps * u * u) / std::pow(std::abs(u), nl.q());
  };
  const auto mags = range.magnitudes();
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_k = 0;
  double sign = 1.0;
  for (std::size_t k = 0; k < mags.size(); ++k) {
    for (double s : {1.0, -1.0}) {
      const double a = A(s * mags[k]);
      if (a < best) {
        best = a;
        best_k = k;
        sign = s;
      }
    }
  }
  if (!(best > 0.0) || best_k == 0 || best_k + 1 == mags.size()) {
    throw Error(ErrorKind::NonCoerciveF,
                "(F + eps u^2)/|u|^q has no positive interior minimum on the sampling range");
  }
  const double lo = std::log(mags[best_k - 1]);
  const double hi = std::log(mags[best_k + 1]);
  const double refined = -golden_max([&](double lu) { return -A(sign * std::exp(lu)); }, lo, hi);
  return std::min(best, refined);
}

std::pair<double, double> tail_power_constants(const Nonlinearity& nl,
                                               const CertificationRange& range) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  auto visit = [&](double u) {
    const double r = std::abs(nl.f(u)) / std::pow(u, nl.p() - 1.0);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  };
  visit(nl.rho());
  for (double u : range.magnitudes()) {
    if (u >= nl.rho()) visit(u);
  }
  return {lo, hi};
}

NonlinearityConstants compute_constants(const Nonlinearity& nl, double eps,
                                        const CertificationRange& range) {
  NonlinearityConstants c;
  c.eps = eps;
  c.range = range;
  c.C_f_growth = growth_constant_f(nl, eps, range);
  c.C_g_growth_raw = growth_constant_g(nl, eps, range);
  c.C_F_lower = lower_constant_F(nl, eps, range);
  c.C_g_growth = std::max(c.C_g_growth_raw, c.C_F_lower);
  c.g_over_f_at_rho = nl.g(nl.rho()) / nl.f(nl.rho());
  const auto [lo, hi] = tail_power_constants(nl, range);
  c.f_tail_lower = lo;
  c.f_tail_upper = hi;
  return c;
}

double phi_quadratic_sup(const Nonlinearity& nl, double lambda, double rho, int samples) {
  auto ratio = [&](double t) { return std::abs(nl.Phi(lambda, t)) / (t * t); };
  const double la = std::log(rho * 1e-10);
  const double lb = std::log(rho);
  double best = 0.0;
  int best_k = 0;
  for (int k = 0; k < samples; ++k) {
    const double t = k + 1 == samples ? rho : std::exp(la + (lb - la) * k / (samples - 1));
    const double r = std::max(ratio(t), ratio(-t));
    if (r > best) {
      best = r;
      best_k = k;
    }
  }
  const double lo = la + (lb - la) * std::max(best_k - 1, 0) / (samples - 1);
  const double hi = la + (lb - la) * std::min(best_k + 1, samples - 1) / (samples - 1);
  const double refined = golden_max([&](double lt) { return ratio(std::exp(lt)); }, lo, hi);
  return std::max(best, refined);
}

bool AxiomReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const AxiomCheck& c) { return c.passed; });
}

const AxiomCheck* AxiomReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

AxiomReport verify_axioms(const Nonlinearity& nl, double lambda, int ambient_dim,
                          const CertificationRange& range) {
  AxiomReport rep;
  rep.range = range;
  rep.lambda = lambda;
  const double p = nl.p();
  const double q = nl.q();
  const auto mags = range.magnitudes();
  const std::size_t n = mags.size();
  auto add = [&](std::string name, bool ok, double value, std::string detail) {
    rep.checks.push_back({std::move(name), ok, value, std::move(detail)});
  };

  {
    const double critical = ambient_dim > 2 ? 2.0 * ambient_dim / (ambient_dim - 2.0)
                                            : std::numeric_limits<double>::infinity();
    add("exponent_ordering", q > 2.0 && q < p && p < critical, p - q,
        "requires 2 < q < p < 2N/(N-2)");
  }

  double odd_f = 0.0;
  double odd_g = 0.0;
  for (double u : mags) {
    odd_f = std::max(odd_f, std::abs(nl.f(u) + nl.f(-u)));
    odd_g = std::max(odd_g, std::abs(nl.g(u) + nl.g(-u)));
  }
  add("odd_f", odd_f == 0.0, odd_f, "max |f(u) + f(-u)|");
  add("odd_g", odd_g == 0.0, odd_g, "max |g(u) + g(-u)|");

  // Growth: |h(u)| <= C(1 + |u|^{e}); the sampled ratio must not blow up in
  // the last decade of the range.
  auto growth_check = [&](const char* name, auto h, double e) {
    double c = 0.0;
    double top = 0.0;
    double prev = 0.0;
    const double u_top = range.u_max / 10.0;
    for (double u : mags) {
      const double r = std::abs(h(u)) / (1.0 + std::pow(u, e));
      c = std::max(c, r);
      if (u >= u_top) {
        top = std::max(top, r);
      } else if (u >= u_top / 10.0) {
        prev = std::max(prev, r);
      }
    }
    const bool ok = std::isfinite(c) && (prev == 0.0 ? top == 0.0 : top <= 1.1 * prev);
    add(name, ok, c, "sup |h(u)|/(1+|u|^{e}) with bounded last decade");
  };
  growth_check("growth_f", [&](double u) { return nl.f(u); }, p - 1.0);
  growth_check("growth_g", [&](double u) { return nl.g(u); }, q - 1.0);

  // o(|u|) near 0: ratio small at u_min and nondecreasing over the first decade.
  auto small_check = [&](const char* name, auto h) {
    std::vector<double> r;
    for (double u : mags) {
      if (u > 10.0 * range.u_min) break;
      r.push_back(std::abs(h(u) / u));
    }
    const double r0 = std::abs(h(range.u_min) / range.u_min);
    add(name, r0 <= 1e-3 && nondecreasing(r, 1e-9), r0, "|h(u)/u| at u_min (tolerance 1e-3)");
  };
  small_check("small_u_f", [&](double u) { return nl.f(u); });
  small_check("small_u_g", [&](double u) { return nl.g(u); });

  {
    double min_F = std::numeric_limits<double>::infinity();
    std::vector<double> ratio;
    const double mid = std::sqrt(range.u_min * range.u_max);
    for (double u : mags) {
      min_F = std::min({min_F, nl.F(u), nl.F(-u)});
      if (u >= mid) ratio.push_back(nl.F(u) / std::pow(u, q));
    }
    add("superquadratic_F", min_F >= 0.0 && nondecreasing(ratio, 1e-10),
        ratio.empty() ? 0.0 : ratio.back(), "F >= 0 and F(u)/|u|^q increasing past the midpoint");
  }

  {
    std::vector<double> pos(n), neg(n), gpos(n), gneg(n);
    double min_gu = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
      const double u = mags[k];
      pos[k] = nl.f(u) / std::pow(u, q - 1.0);
      gpos[k] = nl.g(u) / std::pow(u, q - 1.0);
      // negative half-line, walked with u increasing from -u_max to -u_min
      const double v = -mags[n - 1 - k];
      neg[k] = nl.f(v) / std::pow(-v, q - 1.0);
      gneg[k] = nl.g(v) / std::pow(-v, q - 1.0);
      min_gu = std::min({min_gu, nl.g(u) * u, nl.g(-u) * (-u)});
    }
    add("monotone_f", nondecreasing(pos, 1e-12) && nondecreasing(neg, 1e-12), 0.0,
        "f(u)/|u|^{q-1} nondecreasing on each half-line");
    add("monotone_g", nonincreasing(gpos, 1e-12) && nonincreasing(gneg, 1e-12), 0.0,
        "g(u)/|u|^{q-1} nonincreasing on each half-line");
    add("sign_g", min_gu >= 0.0, min_gu, "min g(u)u");
  }

  {
    const auto [lo, hi] = tail_power_constants(nl, range);
    rep.f_tail_lower = lo;
    rep.f_tail_upper = hi;
    add("tail_power_f", lo > 0.0 && std::isfinite(hi), hi / lo,
        "lo |u|^{p-1} <= |f(u)| <= hi |u|^{p-1} for |u| >= rho");
  }

  {
    double worst_f = std::numeric_limits<double>::infinity();
    double worst_g = std::numeric_limits<double>::infinity();
    bool ok_f = true;
    bool ok_g = true;
    for (double m : mags) {
      for (double u : {m, -m}) {
        const double qF = q * nl.F(u);
        const double fu = nl.f(u) * u;
        const double slack = 1e-9 * std::abs(fu);
        if (qF < -slack || qF > fu + slack) ok_f = false;
        if (fu != 0.0) worst_f = std::min(worst_f, (fu - qF) / fu);
        const double gu = nl.g(u) * u;
        const double qG = q * nl.G(u);
        const double gslack = 1e-9 * std::abs(qG);
        if (gu < -gslack || gu > qG + gslack) ok_g = false;
        if (qG != 0.0) worst_g = std::min(worst_g, (qG - gu) / qG);
      }
    }
    add("ar_f", ok_f, std::isfinite(worst_f) ? worst_f : 0.0, "0 <= qF(u) <= f(u)u");
    add("ar_g", ok_g, std::isfinite(worst_g) ? worst_g : 0.0, "0 <= g(u)u <= qG(u)");
  }

  {
    double min_phi = std::numeric_limits<double>::infinity();
    for (double u : mags) {
      if (lambda * nl.g(u) * u <= nl.f(u) * u) min_phi = std::min(min_phi, nl.Phi(lambda, u));
    }
    if (!std::isfinite(min_phi)) min_phi = 0.0;
    add("phi_nonnegative", min_phi >= -1e-12 * std::max(1.0, std::abs(min_phi)), min_phi,
        "Phi(u) >= 0 wherever lambda g(u)u <= f(u)u");
  }
  return rep;
}

void to_json(nlohmann::json& j, const NonlinearitySpec& s) {
  j = {{"f_family", to_string(s.f_family)},
       {"g_family", to_string(s.g_family)},
       {"p", s.p},
       {"q", s.q},
       {"rho", s.rho}};
}

void to_json(nlohmann::json& j, const CertificationRange& r) {
  j = {{"u_min", r.u_min}, {"u_max", r.u_max}, {"samples_per_sign", r.samples_per_sign}};
}

void to_json(nlohmann::json& j, const NonlinearityConstants& c) {
  j = {{"eps", c.eps},
       {"C_f_growth", c.C_f_growth},
       {"C_g_growth", c.C_g_growth},
       {"C_g_growth_raw", c.C_g_growth_raw},
       {"C_F_lower", c.C_F_lower},
       {"g_over_f_at_rho", c.g_over_f_at_rho},
       {"f_tail_lower", c.f_tail_lower},
       {"f_tail_upper", c.f_tail_upper},
       {"certification_range", c.range}};
}

void to_json(nlohmann::json& j, const AxiomCheck& c) {
  j = {{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"detail", c.detail}};
}

void to_json(nlohmann::json& j, const AxiomReport& r) {
  j = {{"checks", r.checks},
       {"all_passed", r.all_passed()},
       {"lambda", r.lambda},
       {"f_tail_lower", r.f_tail_lower},
       {"f_tail_upper", r.f_tail_upper},
       {"certification_range", r.range}};
}

}  // namespace linkvar
