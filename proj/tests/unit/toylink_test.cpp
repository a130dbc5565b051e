#include <cmath>

#include <gtest/gtest.h>

#include "linkvar/error.hpp"
#include "linkvar/toylink.hpp"

using namespace linkvar;

namespace {

ToyProblem toy(int np, int nm, double lambda = 0.0) {
  ToyProblem t;
  t.n_plus = np;
  t.n_minus = nm;
  t.lambda = lambda;
  return t;
}

// Independent brute force of sup over the half disc { t >= 0, t^2 + s^2 <= R^2 }
// for the 1+1 quartic toy.
double brute_sup_1p1(double R, int n) {
  double best = -1e300;
  for (int i = 0; i <= n; ++i) {
    const double t = R * i / n;
    for (int j = -n; j <= n; ++j) {
      const double s = R * j / n;
      if (t * t + s * s > R * R) continue;
      best = std::max(best, 0.5 * t * t - 0.5 * s * s - std::pow(t, 4) / 4 - std::pow(s, 4) / 4);
    }
  }
  return best;
}

}  // namespace

TEST(Toy, Validation) {
  EXPECT_THROW(toy(0, 1).validate(), Error);
  EXPECT_THROW(toy(4, 1).validate(), Error);
  ToyProblem bad = toy(1, 1);
  bad.q = 5.0;
  EXPECT_THROW(bad.validate(), Error);
}

TEST(Toy, GradientMatchesDifferences) {
  const ToyProblem tp = toy(2, 2, 0.2);
  Eigen::VectorXd x(4);
  x << 0.7, -0.3, 1.1, -0.4;
  const Eigen::VectorXd g = tp.gradient(x);
  for (int i = 0; i < 4; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(4);
    e[i] = 1e-6;
    EXPECT_NEAR(g[i], (tp.J(x + e) - tp.J(x - e)) / 2e-6, 1e-8);
  }
}

TEST(Toy, CUpperOneDimensionalClosedForm) {
  const ToyProblem tp = toy(1, 1);
  const ToyCUpper c = toy_c_upper(tp, Eigen::VectorXd::Ones(1), 4.0, 65);
  EXPECT_NEAR(c.value, 0.25, 1e-8);
  EXPECT_NEAR(c.t, 1.0, 1e-6);
  EXPECT_NEAR(c.argmax[1], 0.0, 1e-6);
  EXPECT_NEAR(brute_sup_1p1(4.0, 800), 0.25, 1e-4);
  EXPECT_LE(c.grid_sup, c.value + 1e-15);
}

TEST(Toy, CUpperGridRefinementMonotone) {
  const ToyProblem tp = toy(2, 2);
  Eigen::VectorXd u(2);
  u << 0.8, 0.6;
  double prev = -1e300;
  for (int d : {9, 17, 33, 65}) {
    const double s = toy_c_upper(tp, u, 4.0, d).grid_sup;
    EXPECT_GE(s, prev - 1e-15) << d;
    prev = s;
  }
}

TEST(Toy, SphereInfimumClosedForm) {
  for (int np : {1, 2, 3}) {
    const ToyProblem tp = toy(np, 1);
    const double r = 0.5;
    // the quartic term is largest along a coordinate axis
    EXPECT_NEAR(toy_sphere_infimum(tp, r, 65), 0.5 * r * r - std::pow(r, 4) / 4, 1e-10) << np;
  }
}

TEST(Toy, ClassicalNehariValue) {
  const ToyProblem tp = toy(1, 0);
  const ToyNehari n = toy_nehari_infimum(tp, 4, 4.0);
  EXPECT_NEAR(n.infimum, 0.25, 1e-8);
  EXPECT_LT(n.max_stationarity, 1e-10);
  const ToyReport rep = run_toy(tp);
  EXPECT_NEAR(rep.c_upper.value, 0.25, 1e-8);
  EXPECT_TRUE(rep.chain_ok);
}

TEST(Toy, ChainOnePlusOne) {
  const ToyReport rep = run_toy(toy(1, 1));
  EXPECT_TRUE(rep.chain_ok);
  EXPECT_LE(rep.inf_sphere, rep.c_upper.value + 1e-6);
  EXPECT_LE(rep.c_upper.value, rep.nehari.infimum + 1e-6);
  EXPECT_NEAR(rep.nehari.infimum, 0.25, 1e-8);
  EXPECT_EQ(rep.a4.violations, 0);
  EXPECT_EQ(rep.a4.samples, 10000);
}

TEST(Toy, ChainTwoPlusTwo) {
  const ToyReport rep = run_toy(toy(2, 2));
  EXPECT_TRUE(rep.chain_ok);
  EXPECT_GE(rep.nehari.infimum, 0.25 - 1e-8);  // every Nehari point has J = k/4, k >= 1
  EXPECT_LT(rep.nehari.max_stationarity, 1e-10);
  EXPECT_EQ(rep.a4.violations, 0);
}

TEST(Toy, A4EqualityCase) {
  const ToyProblem tp = toy(1, 1);
  const ToyNehari n = toy_nehari_infimum(tp, 4, 4.0);
  const ToyA4Report a = toy_check_A4(tp, n, 1000);
  EXPECT_LT(a.equality_gap, 1e-14);
  EXPECT_EQ(a.violations, 0);
  EXPECT_TRUE(a.identity_checked);
}

TEST(Toy, PositiveCouplingOnlyCounts) {
  const ToyReport rep = run_toy(toy(1, 1, 0.1));
  EXPECT_GE(rep.a4.violations, 0);
  EXPECT_FALSE(rep.a4.identity_checked);
}

TEST(Toy, TauNorm) {
  const ToyProblem tp = toy(1, 2);
  Eigen::VectorXd x(3);
  x << 0.1, 1.0, 1.0;
  EXPECT_NEAR(tp.tau_norm(x), 0.25 + 0.125, 1e-15);
}
