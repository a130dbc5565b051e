#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <random>

#include "linkvar/functional.hpp"
#include "linkvar/grid.hpp"
#include "linkvar/spectral.hpp"

namespace linkvar::testing {

inline ProblemSpec reference_spec(double lambda = 0.0) {
  ProblemSpec s;
  s.N = 3;
  s.K = 2;
  s.a = 1.0;
  s.potential.kind = PotentialKind::Constant;
  s.potential.V0 = -9.0;
  s.lambda = lambda;
  s.nonlinearity.p = 4.0;
  s.nonlinearity.q = 3.0;
  return s;
}

/// Grid, operator, split and context, kept at stable addresses.
struct Setup {
  Grid g;
  SymmetricOperator op;
  SpectralSplit split;
  std::unique_ptr<FunctionalContext> ctx;
};

inline std::unique_ptr<Setup> make_setup(const ProblemSpec& spec, int Nr, int Nz, double Rmax = 6.0,
                                         double Zhalf = 4.0) {
  auto s = std::make_unique<Setup>();
  s->g = build_grid(spec, Nr, Nz, Rmax, Zhalf);
  s->op = assemble_operator(spec, s->g);
  s->split = eigendecompose(s->op, s->g);
  s->ctx = std::make_unique<FunctionalContext>(s->g, s->split, spec);
  return s;
}

/// Random smooth field: a few sine modes in r and z with decaying amplitudes.
inline Vector smooth_field(const Grid& g, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Vector u = Vector::Zero(static_cast<Eigen::Index>(g.size()));
  for (int m = 1; m <= 4; ++m) {
    for (int k = 1; k <= 4; ++k) {
      const double c = n01(rng) * scale / (m * k);
      for (int i = 0; i < g.Nr; ++i) {
        const double sr = std::sin(m * std::numbers::pi * g.r[i] / g.Rmax);
        for (int j = 0; j < g.Nz; ++j) {
          const double sz = std::sin(k * std::numbers::pi * (g.z[j] + g.Zhalf) / (2.0 * g.Zhalf));
          u[static_cast<Eigen::Index>(g.index(i, j))] += c * sr * sz;
        }
      }
    }
  }
  return u;
}

inline Vector noise_field(const Grid& g, std::mt19937_64& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Vector u(static_cast<Eigen::Index>(g.size()));
  for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = n01(rng);
  return u;
}

/// Golden-section minimiser of a unimodal function on [a, b].
inline double golden_min(const std::function<double(double)>& f, double a, double b, int iters = 200) {
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int k = 0; k < iters && b - a > 1e-15 * (1.0 + std::abs(a) + std::abs(b)); ++k) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = f(d);
    }
  }
  return f(0.5 * (a + b));
}

}  // namespace linkvar::testing
