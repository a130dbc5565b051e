#include <cmath>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "linkvar/error.hpp"
#include "linkvar/geometry.hpp"
#include "linkvar/nonlinearity.hpp"

using namespace linkvar;

namespace {

NonlinearitySpec power_spec(double p = 4.0, double q = 3.0) {
  NonlinearitySpec s;
  s.f_family = FFamily::Power;
  s.g_family = GFamily::Power;
  s.p = p;
  s.q = q;
  return s;
}

}  // namespace

TEST(Nonlinearity, PowerValues) {
  const Nonlinearity nl(power_spec());
  EXPECT_DOUBLE_EQ(nl.f(2.0), 8.0);
  EXPECT_NEAR(nl.F(2.0), 4.0, 1e-12);
  EXPECT_DOUBLE_EQ(nl.g(2.0), 4.0);
  EXPECT_NEAR(nl.G(2.0), 8.0 / 3.0, 1e-12);
}

TEST(Nonlinearity, OddAndVanishAtZero) {
  for (auto ff : {FFamily::Power, FFamily::LogArctan}) {
    for (auto gf : {GFamily::Power, GFamily::ExpDamped, GFamily::ArctanDamped, GFamily::Zero}) {
      NonlinearitySpec s = power_spec();
      s.f_family = ff;
      s.g_family = gf;
      s.rho = 0.7;
      const Nonlinearity nl(s);
      EXPECT_EQ(nl.f(0.0), 0.0);
      EXPECT_EQ(nl.g(0.0), 0.0);
      for (double u : {1e-3, 0.3, 0.7, 1.9, 12.0}) {
        EXPECT_EQ(nl.f(-u), -nl.f(u));
        EXPECT_EQ(nl.g(-u), -nl.g(u));
        EXPECT_NEAR(nl.F(-u), nl.F(u), 1e-14 * (1.0 + nl.F(u)));
      }
    }
  }
}

TEST(Nonlinearity, ExpDampedValue) {
  NonlinearitySpec s = power_spec();
  s.g_family = GFamily::ExpDamped;
  const Nonlinearity nl(s);
  EXPECT_NEAR(nl.g(1.0), 1.0 / (1.0 + std::exp(1.0)), 1e-15);
  EXPECT_NEAR(nl.g(1.0), 0.26894, 1e-5);
}

TEST(Nonlinearity, PrimitivesMatchQuadrature) {
  NonlinearitySpec s = power_spec();
  s.f_family = FFamily::LogArctan;
  s.g_family = GFamily::ArctanDamped;
  s.rho = 0.8;
  const Nonlinearity nl(s);
  for (double u : {0.05, 0.5, 0.8, 1.3, 7.0}) {
    const double Fq = adaptive_simpson([&](double x) { return nl.f(x); }, 0.0, u, 1e-14, 1e-12);
    const double Gq = adaptive_simpson([&](double x) { return nl.g(x); }, 0.0, u, 1e-14, 1e-12);
    EXPECT_NEAR(nl.F(u), Fq, 1e-8 * (1.0 + Fq)) << u;
    EXPECT_NEAR(nl.G(u), Gq, 1e-8 * (1.0 + Gq)) << u;
  }
}

TEST(Nonlinearity, DerivativesMatchDifferences) {
  NonlinearitySpec s = power_spec();
  s.f_family = FFamily::LogArctan;
  s.g_family = GFamily::ExpDamped;
  s.rho = 0.8;
  const Nonlinearity nl(s);
  for (double u : {0.1, 0.5, 1.3, 4.0}) {
    const double h = 1e-6 * u;
    EXPECT_NEAR(nl.df(u), (nl.f(u + h) - nl.f(u - h)) / (2 * h), 1e-6 * (1.0 + std::abs(nl.df(u))));
    EXPECT_NEAR(nl.dg(u), (nl.g(u + h) - nl.g(u - h)) / (2 * h), 1e-6 * (1.0 + std::abs(nl.dg(u))));
  }
}

TEST(Nonlinearity, LogArctanIsContinuousAtRho) {
  NonlinearitySpec s = power_spec();
  s.f_family = FFamily::LogArctan;
  s.rho = 0.6;
  const Nonlinearity nl(s);
  EXPECT_NEAR(nl.f(s.rho * (1 - 1e-12)), nl.f(s.rho), 1e-10);
}

TEST(Nonlinearity, PhiClosedForms) {
  const Nonlinearity nl(power_spec());
  for (double u : {0.3, 1.0, 2.5}) EXPECT_NEAR(nl.Phi(0.0, u), std::pow(u, 4) / 4.0, 1e-12);
  EXPECT_EQ(nl.Phi(0.0, 0.0), 0.0);
  EXPECT_EQ(nl.Phi(0.1, 0.0), 0.0);
  EXPECT_NEAR(nl.Phi(0.1, 1.0), 0.25 + 0.1 / 3.0 - 0.05, 1e-12);
}

TEST(Nonlinearity, BulkPathsMatchScalar) {
  for (auto gf : {GFamily::Power, GFamily::Zero, GFamily::ExpDamped}) {
    NonlinearitySpec s = power_spec();
    s.g_family = gf;
    const Nonlinearity nl(s);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n01(0.0, 2.0);
    std::vector<double> u(257), w(257), out(257), dout(257);
    for (std::size_t i = 0; i < u.size(); ++i) {
      u[i] = n01(rng);
      w[i] = std::abs(n01(rng));
    }
    const double lambda = 0.3;
    nl.combined(u.data(), out.data(), u.size(), lambda);
    nl.combined_derivative(u.data(), dout.data(), u.size(), lambda);
    double sum = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      EXPECT_NEAR(out[i], nl.f(u[i]) - lambda * nl.g(u[i]), 1e-12 * (1 + std::abs(out[i])));
      EXPECT_NEAR(dout[i], nl.df(u[i]) - lambda * nl.dg(u[i]), 1e-12 * (1 + std::abs(dout[i])));
      sum += w[i] * (nl.F(u[i]) - lambda * nl.G(u[i]));
    }
    EXPECT_NEAR(nl.weighted_primitive_sum(u.data(), w.data(), u.size(), lambda), sum, 1e-10 * (1 + std::abs(sum)));
  }
}

TEST(GrowthConstants, PowerFTendsToOne) {
  const Nonlinearity nl(power_spec());
  for (double eps : {0.01, 0.1, 1.0}) EXPECT_NEAR(growth_constant_f(nl, eps), 1.0, 1e-6);
}

TEST(GrowthConstants, PowerG) {
  // sup of 1 - eps/u is approached only as u grows, so it tracks the range end.
  const Nonlinearity nl(power_spec());
  CertificationRange range;
  double prev = 0.0;
  for (double u_max : {1e4, 1e6, 1e8}) {
    range.u_max = u_max;
    const double c = growth_constant_g(nl, 0.5, range);
    EXPECT_NEAR(c, 1.0 - 0.5 / u_max, 1e-9);
    EXPECT_GT(c, prev);
    prev = c;
  }
  EXPECT_NEAR(prev, 1.0, 1e-8);
}

TEST(GrowthConstants, ZeroG) {
  NonlinearitySpec s = power_spec();
  s.g_family = GFamily::Zero;
  EXPECT_EQ(growth_constant_g(Nonlinearity(s), 0.5), 0.0);
}

TEST(LowerConstantF, GoldenSectionOracle) {
  const Nonlinearity nl(power_spec());
  for (double eps : {0.1, 0.25, 0.03}) {
    // (F + eps u^2)/u^3 = u/4 + eps/u for the quartic primitive.
    const double oracle =
        linkvar::testing::golden_min([eps](double u) { return u / 4.0 + eps / u; }, 1e-6, 1e3);
    EXPECT_NEAR(oracle, std::sqrt(eps), 1e-8);
    EXPECT_NEAR(lower_constant_F(nl, eps), oracle, 1e-4) << eps;
  }
  EXPECT_NEAR(lower_constant_F(nl, 0.25), 0.5, 1e-4);
}

TEST(LowerConstantF, RatioBlowsUpAtRangeEnds) {
  const Nonlinearity nl(power_spec());
  const CertificationRange range;
  const auto ratio = [&](double u) { return (nl.F(u) + 0.1 * u * u) / std::pow(u, 3); };
  const double c = lower_constant_F(nl, 0.1, range);
  EXPECT_GT(ratio(range.u_min), 1e3 * c);
  EXPECT_GT(ratio(range.u_max), 1e3 * c);
}

TEST(Axioms, PowerFamiliesPass) {
  const Nonlinearity nl(power_spec());
  const AxiomReport rep = verify_axioms(nl, 0.1);
  EXPECT_TRUE(rep.all_passed());
  for (double u : {0.2, 1.0, 5.0}) EXPECT_NEAR(3.0 * nl.G(u), nl.g(u) * u, 1e-12 * (1 + nl.g(u) * u));
}

TEST(Axioms, LogArctanMonotoneQuotient) {
  NonlinearitySpec s = power_spec();
  s.f_family = FFamily::LogArctan;
  s.rho = 0.9;
  const Nonlinearity nl(s);
  const AxiomReport rep = verify_axioms(nl, 0.0);
  ASSERT_NE(rep.find("monotone_f"), nullptr);
  EXPECT_TRUE(rep.find("monotone_f")->passed);
  double prev = 0.0;
  for (double u = 1e-3; u < 20.0; u *= 1.05) {
    const double quotient = nl.f(u) / std::pow(u, s.q - 1.0);
    if (u < s.rho) EXPECT_NEAR(quotient, std::log1p(std::pow(u, s.p - s.q)), 1e-12);
    EXPECT_GE(quotient, prev);
    prev = quotient;
  }
}

TEST(Axioms, BrokenOrderingFlagged) {
  NonlinearitySpec s = power_spec(3.0, 4.0);
  EXPECT_THROW(s.validate(3), Error);
  const AxiomReport rep = verify_axioms(Nonlinearity(s), 0.0);
  ASSERT_NE(rep.find("exponent_ordering"), nullptr);
  EXPECT_FALSE(rep.find("exponent_ordering")->passed);
  EXPECT_FALSE(rep.all_passed());
}

TEST(PhiSup, MonotoneAndVanishing) {
  const Nonlinearity nl(power_spec());
  for (double lambda : {0.0, 0.05}) {
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 8; ++k) {
      const double rho = std::ldexp(1.0, -k);
      const double s = phi_quadratic_sup(nl, lambda, rho);
      // |t^2/4 - lambda t/6| on [0, rho], an independent scan.
      double oracle = 0.0;
      for (int i = 1; i <= 20000; ++i) {
        const double t = rho * i / 20000.0;
        oracle = std::max(oracle, std::abs(t * t / 4.0 - lambda * t / 6.0));
      }
      EXPECT_NEAR(s, oracle, 1e-6 * (1 + oracle));
      EXPECT_LE(s, prev);
      prev = s;
    }
    EXPECT_LT(prev, 1e-3);
  }
}
