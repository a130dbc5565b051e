#include <cmath>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "linkvar/error.hpp"
#include "linkvar/geometry.hpp"
#include "linkvar/solver.hpp"

using namespace linkvar;
using linkvar::testing::make_setup;
using linkvar::testing::reference_spec;

namespace {

GeometryOptions light_options() {
  GeometryOptions o;
  o.starts = 8;
  o.sphere_resamples = 500;
  o.delta_samples = 2000;
  o.ray_samples = 500;
  o.kappa_samples = 500;
  o.k_search_depth = 10;
  return o;
}

class Geometry : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    setup_ = make_setup(reference_spec(), 32, 32).release();
    kappa_ = kappa_estimate(setup_->split, setup_->g, 3.0, 500, 7);
    base_ = base_constants(setup_->split, setup_->ctx->nonlinearity(), kappa_, &nlc_);
  }
  static void TearDownTestSuite() {
    delete setup_;
    setup_ = nullptr;
  }
  static linkvar::testing::Setup* setup_;
  static KappaEstimate kappa_;
  static GeometryConstants base_;
  static NonlinearityConstants nlc_;
  const FunctionalContext& ctx() const { return *setup_->ctx; }
  const SpectralSplit& split() const { return setup_->split; }

  /// Random unit X+ direction from the resolved positive modes.
  Vector plus_direction(std::mt19937_64& rng) const {
    std::normal_distribution<double> n01;
    const int first = split().first_positive();
    const int npos = split().n_resolved() - first;
    Vector c = Vector::Zero(split().n_resolved());
    double norm2 = 0.0;
    for (int i = 0; i < npos; ++i) {
      const double x = n01(rng) / (1.0 + i);
      c[first + i] = x / std::sqrt(split().eigvals()[first + i]);
      norm2 += x * x;
    }
    return split().eigvecs() * c / std::sqrt(norm2);
  }
};

linkvar::testing::Setup* Geometry::setup_ = nullptr;
KappaEstimate Geometry::kappa_;
GeometryConstants Geometry::base_;
NonlinearityConstants Geometry::nlc_;

}  // namespace

TEST(LambdaThreshold, Arithmetic) {
  EXPECT_NEAR(lambda_threshold(1.1, 3.0, 1.0, 1.0), 1.0 / (1.1 * 8.0), 1e-15);
  EXPECT_NEAR(lambda_threshold(1.1, 3.0, 0.5, 2.0), 0.5 / (1.1 * 8.0 * 2.0), 1e-15);
  EXPECT_LT(lambda_threshold(1.3, 3.0, 1.0, 1.0), lambda_threshold(1.1, 3.0, 1.0, 1.0));
  EXPECT_LT(lambda_threshold(1.1, 3.5, 1.0, 1.0), lambda_threshold(1.1, 3.0, 1.0, 1.0));
}

TEST(BoundednessK, ZeroCouplingLimit) {
  NonlinearitySpec s;
  const Nonlinearity nl(s);
  const double mu0 = 0.3;
  const double eps = mu0 / 24.0;
  double prev = 0.0;
  for (int k = 4; k <= 8; ++k) {
    const KBound b = boundedness_K(nl, 1.1, mu0, eps, std::ldexp(1.0, -k), 0.0);
    EXPECT_TRUE(b.pass);
    EXPECT_GT(b.K, eps);
    // the rho-dependent part is O(rho^2) for p = 4
    if (prev > 0.0) EXPECT_NEAR((b.K - eps) / prev, 0.25, 0.02);
    prev = b.K - eps;
  }
}

TEST_F(Geometry, BaseConstants) {
  EXPECT_DOUBLE_EQ(base_.lambda_max, lambda_threshold(base_.kappa, 3.0, base_.C_F_lower, base_.C_g_growth));
  EXPECT_NEAR(base_.mu0, split().mu0(), 0.0);
  EXPECT_GT(base_.lambda_max, 0.0);
}

TEST_F(Geometry, KSearchFindsTriple) {
  const KSearchResult ks = search_K(ctx().nonlinearity(), base_.kappa, base_.mu0, base_.lambda_max, 10);
  ASSERT_TRUE(ks.found);
  EXPECT_LT(ks.best.K, base_.mu0);
  EXPECT_TRUE(ks.best.side_ok);
}

TEST_F(Geometry, TinySpherePasses) {
  std::vector<Vector> warm = random_sphere_starts(ctx(), 4, 3);
  const SphereInfimum si = sphere_infimum(ctx(), 1e-4, light_options(), warm);
  EXPECT_TRUE(si.passed);
  EXPECT_GE(si.inf_estimate, 0.25e-8);
}

TEST_F(Geometry, LinkRadiusResampled) {
  const LinkRadiusResult lr = find_link_radius(ctx(), light_options());
  ASSERT_GT(lr.r_link, 0.0);
  EXPECT_TRUE(lr.resample_passed);
  EXPECT_GE(lr.b, lr.r_link * lr.r_link / 4.0);
  std::mt19937_64 rng(404);
  double fresh_min = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 1000; ++k) fresh_min = std::min(fresh_min, J(ctx(), lr.r_link * plus_direction(rng)));
  EXPECT_GE(fresh_min, lr.r_link * lr.r_link / 4.0);
  EXPECT_GE(fresh_min, lr.b - 1e-12);
}

TEST_F(Geometry, RadiusAndRays) {
  const GeometryOptions o = light_options();
  const LinkRadiusResult lr = find_link_radius(ctx(), o);
  const Vector u_plus = initial_direction(split());
  const LinkRResult R = find_R(ctx(), u_plus, lr.r_link, o);
  ASSERT_TRUE(std::isfinite(R.R));
  EXPECT_GT(R.R, lr.r_link);
  EXPECT_LT(std::max(R.sup_ball, R.sup_sphere), lr.b);
  std::mt19937_64 rng(8);
  for (int ray = 0; ray < 8; ++ray) {
    const Vector v = split().project_minus(linkvar::testing::smooth_field(setup_->g, rng));
    Vector w = u_plus + v / split().energy_norm(v);
    w /= split().energy_norm(w);
    double prev = J(ctx(), R.R * w);
    EXPECT_LE(prev, 0.0);
    for (double s : {2.0, 4.0, 8.0}) {
      const double val = J(ctx(), s * R.R * w);
      EXPECT_LT(val, prev);
      prev = val;
    }
  }
}

TEST_F(Geometry, DeltaBall) {
  const GeometryOptions o = light_options();
  const LinkRadiusResult lr = find_link_radius(ctx(), o);
  const DeltaResult d = find_delta(ctx(), lr.r_link, lr.b, o);
  EXPECT_LE(d.delta, 0.5 * lr.r_link + 1e-15);
  EXPECT_LE(d.delta, std::sqrt(lr.b / 3.0) + 1e-15);
  EXPECT_LE(0.75 * d.delta * d.delta, lr.b / 4.0 + 1e-15);
  EXPECT_LT(d.sampled_sup, lr.b);
  EXPECT_EQ(d.samples, o.delta_samples);
}

TEST_F(Geometry, MinusRaysNonPositiveAtThreshold) {
  const FunctionalContext c = ctx().with_lambda(base_.lambda_max);
  EXPECT_LE(minus_ray_sup(c, 1000, 5).sup, 0.0);
  EXPECT_LE(minus_ray_sup(ctx(), 1000, 5).sup, 0.0);
}

TEST_F(Geometry, CompositeCheckPasses) {
  const GeometryReport rep =
      check_geometry(ctx(), initial_direction(split()), base_, kappa_, nlc_, light_options());
  EXPECT_TRUE(rep.linking_passed);
  EXPECT_GE(rep.margin, 1e-6);
  EXPECT_TRUE(rep.lambda_admissible);
  EXPECT_TRUE(rep.k_search.found);
}

TEST_F(Geometry, Deterministic) {
  const GeometryOptions o = light_options();
  const nlohmann::json a = find_link_radius(ctx(), o);
  const nlohmann::json b = find_link_radius(ctx(), o);
  EXPECT_EQ(a.dump(), b.dump());
}
