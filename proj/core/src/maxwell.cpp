#include "linkvar/maxwell.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "linkvar/error.hpp"
#include "linkvar/parallel.hpp"

namespace linkvar {

namespace {

void require_maxwell(const ProblemSpec& spec) {
  if (!spec.is_maxwell_case()) {
    throw Error(ErrorKind::NotMaxwellCase, "the vector field ansatz needs N = 3, K = 2, a = 1");
  }
}

// Second derivatives of the natural cubic spline through (x_i, y_i).
Vector natural_spline(const Vector& x, const Vector& y) {
  const Eigen::Index n = x.size();
  Vector m = Vector::Zero(n);
  if (n < 3) return m;
  Vector diag(n), rhs(n), upper(n);
  diag[0] = 1.0;
  upper[0] = 0.0;
  rhs[0] = 0.0;
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    const double h0 = x[i] - x[i - 1];
    const double h1 = x[i + 1] - x[i];
    const double lower = h0 / 6.0;
    diag[i] = (h0 + h1) / 3.0 - lower * upper[i - 1] / diag[i - 1];
    upper[i] = h1 / 6.0;
    rhs[i] = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0 - lower * rhs[i - 1] / diag[i - 1];
  }
  m[n - 1] = 0.0;
  for (Eigen::Index i = n - 2; i >= 1; --i) m[i] = (rhs[i] - upper[i] * m[i + 1]) / diag[i];
  m[0] = 0.0;
  return m;
}

}  // namespace

FieldInterpolant::FieldInterpolant(const Grid& g, const Vector& u) : g_(&g) {
  if (static_cast<std::size_t>(u.size()) != g.size()) {
    throw Error(ErrorKind::ShapeMismatch, "field does not match the grid");
  }
  s_.resize(g.Nr);
  for (int i = 0; i < g.Nr; ++i) s_[i] = g.r[i] * g.r[i];
  value_.resize(static_cast<std::size_t>(g.Nz));
  second_.resize(static_cast<std::size_t>(g.Nz));
  for (int j = 0; j < g.Nz; ++j) {
    Vector phi(g.Nr);
    for (int i = 0; i < g.Nr; ++i) phi[i] = u[g.index(i, j)] / g.r[i];
    second_[j] = natural_spline(s_, phi);
    value_[j] = std::move(phi);
  }
}

double FieldInterpolant::spline(int j, double s) const {
  const Vector& y = value_[static_cast<std::size_t>(j)];
  const Vector& m = second_[static_cast<std::size_t>(j)];
  const Eigen::Index n = s_.size();
  const double s_max = g_->Rmax * g_->Rmax;
  if (s >= s_max) return 0.0;
  if (s > s_[n - 1]) {
    // linear decay to the Dirichlet wall
    return y[n - 1] * (s_max - s) / (s_max - s_[n - 1]);
  }
  const double* begin = s_.data();
  Eigen::Index k = std::upper_bound(begin, begin + n, s) - begin - 1;
  k = std::clamp<Eigen::Index>(k, 0, n - 2);
  const double h = s_[k + 1] - s_[k];
  const double a = (s_[k + 1] - s) / h;
  const double b = (s - s_[k]) / h;
  return a * y[k] + b * y[k + 1] + ((a * a * a - a) * m[k] + (b * b * b - b) * m[k + 1]) * h * h / 6.0;
}

double FieldInterpolant::quotient(double r, double z) const {
  const Grid& g = *g_;
  const double s = r * r;
  if (std::abs(z) >= g.Zhalf) return 0.0;
  if (z <= g.z[0]) return spline(0, s) * (z + g.Zhalf) / (g.z[0] + g.Zhalf);
  if (z >= g.z[g.Nz - 1]) return spline(g.Nz - 1, s) * (g.Zhalf - z) / (g.Zhalf - g.z[g.Nz - 1]);
  const double pos = (z - g.z[0]) / g.dz;
  const int j = std::clamp(static_cast<int>(std::floor(pos)), 0, g.Nz - 2);
  const double t = pos - j;
  return (1.0 - t) * spline(j, s) + t * spline(j + 1, s);
}

double FieldInterpolant::operator()(double r, double z) const { return r * quotient(r, z); }

VectorField3 reconstruct_E(const ProblemSpec& spec, const Grid& g, const Vector& u,
                           const LatticeSpec& lattice, double omega) {
  require_maxwell(spec);
  if (lattice.n < 3) throw Error(ErrorKind::InvalidResolution, "lattice needs at least 3 nodes per axis");
  if (!(omega > 0.0)) throw Error(ErrorKind::InvalidSpec, "omega must be positive");
  const FieldInterpolant interp(g, u);
  const double L = lattice.half_width > 0.0 ? lattice.half_width : g.r[g.Nr - 1] / std::sqrt(2.0);
  const double Z = lattice.half_height > 0.0 ? lattice.half_height : g.z[g.Nz - 1];
  const int n = lattice.n;
  VectorField3 E;
  E.n = n;
  E.omega = omega;
  E.x1 = Vector::LinSpaced(n, -L, L);
  E.x2 = E.x1;
  E.x3 = Vector::LinSpaced(n, -Z, Z);
  const std::size_t total = static_cast<std::size_t>(n) * n * n;
  E.E1.resize(static_cast<Eigen::Index>(total));
  E.E2.resize(static_cast<Eigen::Index>(total));
  E.E3 = Vector::Zero(static_cast<Eigen::Index>(total));
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t ii) {
    const int i = static_cast<int>(ii);
    for (int j = 0; j < n; ++j) {
      const double x1 = E.x1[i], x2 = E.x2[j];
      const double r = std::hypot(x1, x2);
      for (int k = 0; k < n; ++k) {
        const double q = interp.quotient(r, E.x3[k]);
        const auto idx = static_cast<Eigen::Index>(E.index(i, j, k));
        E.E1[idx] = -x2 * q;
        E.E2[idx] = x1 * q;
      }
    }
  });
  return E;
}

double divergence_residual(const VectorField3& E) {
  const int n = E.n;
  if (n < 3) throw Error(ErrorKind::InvalidResolution, "lattice needs at least 3 nodes per axis");
  const double h1 = E.x1[1] - E.x1[0];
  const double h2 = E.x2[1] - E.x2[0];
  const double h3 = E.x3[1] - E.x3[0];
  double max_div = 0.0;
  double max_grad = 0.0;
  auto at = [&](const Vector& F, int i, int j, int k) { return F[static_cast<Eigen::Index>(E.index(i, j, k))]; };
  for (int i = 1; i + 1 < n; ++i) {
    for (int j = 1; j + 1 < n; ++j) {
      for (int k = 1; k + 1 < n; ++k) {
        double grad_sq = 0.0;
        double div = 0.0;
        int comp = 0;
        for (const Vector* F : {&E.E1, &E.E2, &E.E3}) {
          const double d1 = (at(*F, i + 1, j, k) - at(*F, i - 1, j, k)) / (2.0 * h1);
          const double d2 = (at(*F, i, j + 1, k) - at(*F, i, j - 1, k)) / (2.0 * h2);
          const double d3 = (at(*F, i, j, k + 1) - at(*F, i, j, k - 1)) / (2.0 * h3);
          grad_sq += d1 * d1 + d2 * d2 + d3 * d3;
          div += comp == 0 ? d1 : (comp == 1 ? d2 : d3);
          ++comp;
        }
        max_div = std::max(max_div, std::abs(div));
        max_grad = std::max(max_grad, std::sqrt(grad_sq));
      }
    }
  }
  return max_grad > 0.0 ? max_div / max_grad : max_div;
}

EnergyMatch energy_match(const FunctionalContext& ctx, const Vector& u) {
  require_maxwell(ctx.spec());
  const Grid& g = ctx.grid();
  const SymmetricOperator& op = ctx.split().op();
  if (static_cast<std::size_t>(u.size()) != g.size()) throw Error(ErrorKind::ShapeMismatch, "field does not match the grid");
  EnergyMatch m;
  double axis = 0.0;
  double pot = 0.0;
  for (int i = 0; i < g.Nr; ++i) {
    for (int j = 0; j < g.Nz; ++j) {
      const std::size_t k = g.index(i, j);
      const double uk = u[static_cast<Eigen::Index>(k)];
      axis += g.w[static_cast<Eigen::Index>(k)] * uk * uk / (g.r[i] * g.r[i]);
      pot += g.w[static_cast<Eigen::Index>(k)] * ctx.spec().potential(g.r[i], g.z[j]) * uk * uk;
    }
  }
  m.curl_term = 0.5 * (u.dot(op.gradient * u) + axis);
  m.potential_term = 0.5 * pot;
  m.nonlinear_term = ctx.nonlinear_integral(u);
  m.E_value = m.curl_term + m.potential_term - m.nonlinear_term;
  m.J_value = J(ctx, u);
  m.gap = std::abs(m.E_value - m.J_value) / std::max(std::abs(m.J_value), 1e-300);
  return m;
}

LSeries em_energy_L(const FunctionalContext& ctx, const Vector& u, double omega,
                    const std::vector<double>& t_samples) {
  require_maxwell(ctx.spec());
  if (!(omega > 0.0)) throw Error(ErrorKind::InvalidSpec, "omega must be positive");
  const Grid& g = ctx.grid();
  const SymmetricOperator& op = ctx.split().op();
  const Vector fu = ctx.ftilde(u);
  LSeries out;
  out.omega = omega;
  double axis = 0.0;
  double electric = 0.0;
  for (int i = 0; i < g.Nr; ++i) {
    for (int j = 0; j < g.Nz; ++j) {
      const auto k = static_cast<Eigen::Index>(g.index(i, j));
      const double V = ctx.spec().potential(g.r[i], g.z[j]);
      axis += g.w[k] * u[k] * u[k] / (g.r[i] * g.r[i]);
      electric += g.w[k] * (-V * u[k] * u[k] + fu[k] * u[k]);
    }
  }
  out.magnetic = u.dot(op.gradient * u) + axis;
  out.electric = electric;
  out.variation = out.magnetic - out.electric;
  double L0 = 0.5 * out.electric;
  for (double t : t_samples) {
    const double c = std::cos(omega * t);
    const double s = std::sin(omega * t);
    const double L = 0.5 * (out.electric * c * c + out.magnetic * s * s);
    out.t.push_back(t);
    out.L.push_back(L);
    out.max_deviation = std::max(out.max_deviation, std::abs(L - L0));
  }
  return out;
}

void write_field3_csv(const std::string& path, const VectorField3& E) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::ConfigError, "cannot open " + path);
  os << "x1,x2,x3,E1,E2,E3\n" << std::setprecision(17);
  for (int i = 0; i < E.n; ++i) {
    for (int j = 0; j < E.n; ++j) {
      for (int k = 0; k < E.n; ++k) {
        const auto idx = static_cast<Eigen::Index>(E.index(i, j, k));
        os << E.x1[i] << ',' << E.x2[j] << ',' << E.x3[k] << ',' << E.E1[idx] << ',' << E.E2[idx] << ','
           << E.E3[idx] << '\n';
      }
    }
  }
}

void write_L_csv(const std::string& path, const LSeries& L) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::ConfigError, "cannot open " + path);
  os << "t,L\n" << std::setprecision(17);
  for (std::size_t k = 0; k < L.t.size(); ++k) os << L.t[k] << ',' << L.L[k] << '\n';
}

void to_json(nlohmann::json& j, const EnergyMatch& e) {
  j = {{"E_value", e.E_value},   {"J_value", e.J_value},
       {"relative_gap", e.gap},  {"curl_term", e.curl_term},
       {"potential_term", e.potential_term}, {"nonlinear_term", e.nonlinear_term}};
}

void to_json(nlohmann::json& j, const LSeries& l) {
  j = {{"omega", l.omega},
       {"electric_term", l.electric},
       {"magnetic_term", l.magnetic},
       {"variation_coefficient", l.variation},
       {"max_deviation", l.max_deviation},
       {"L0", 0.5 * l.electric},
       {"samples", l.t.size()}};
}

}  // namespace linkvar
