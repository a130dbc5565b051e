#include <cmath>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "linkvar/error.hpp"
#include "linkvar/spectral.hpp"

using namespace linkvar;
using linkvar::testing::make_setup;
using linkvar::testing::reference_spec;

namespace {

SymmetricOperator diagonal_operator(const std::vector<double>& d) {
  const auto n = static_cast<Eigen::Index>(d.size());
  SymmetricOperator op;
  op.S.resize(n, n);
  op.gradient.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) op.S.insert(i, i) = d[static_cast<std::size_t>(i)];
  op.S.makeCompressed();
  op.mass = Vector::Ones(n);
  op.potential = Eigen::Map<const Vector>(d.data(), n);
  op.inv_r2 = Vector::Zero(n);
  return op;
}

class SmallSplit : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { setup_ = make_setup(reference_spec(), 24, 24).release(); }
  static void TearDownTestSuite() {
    delete setup_;
    setup_ = nullptr;
  }
  static linkvar::testing::Setup* setup_;
  const SpectralSplit& split() const { return setup_->split; }
  const Grid& grid() const { return setup_->g; }
};

linkvar::testing::Setup* SmallSplit::setup_ = nullptr;

}  // namespace

TEST(Spectral, DiagonalMu0) {
  const SpectralSplit s = eigendecompose(diagonal_operator({3.0, -0.5, 1.0, -2.0}));
  EXPECT_EQ(s.n_minus(), 2);
  EXPECT_NEAR(s.mu0(), std::sqrt(0.5), 1e-14);
  EXPECT_NEAR(s.eigvals()[0], -2.0, 1e-14);
  EXPECT_EQ(count_below(diagonal_operator({3.0, -0.5, 1.0, -2.0}), 0.0), 2);
}

TEST(Spectral, PositiveOperatorHasNoNegativeSpectrum) {
  ProblemSpec s = reference_spec();
  s.potential.V0 = 1.0;
  const Grid g = build_grid(s, 16, 16, 2.0, 1.0);
  try {
    eigendecompose(assemble_operator(s, g), g);
    FAIL() << "no throw";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoNegativeSpectrum);
  }
}

TEST(Spectral, CoarseGridAgreesOnNegativeCount) {
  const ProblemSpec s = reference_spec();
  const Grid fine = build_grid(s, 96, 96, 6.0, 4.0);
  const SpectralSplit split = eigendecompose(assemble_operator(s, fine), fine);
  const Grid coarse = build_grid(s, 48, 48, 6.0, 4.0);
  EXPECT_EQ(count_below(assemble_operator(s, coarse), 0.0), split.n_minus());
  EXPECT_GE(split.n_minus(), 1);
  EXPECT_GT(split.mu0(), 0.0);
  EXPECT_FALSE(split.complete());
  EXPECT_LT(split.max_residual(), 1e-8);
}

TEST_F(SmallSplit, EigvecProjections) {
  const SpectralSplit& s = split();
  for (int k = 0; k < s.n_minus(); k += 3) {
    const Vector v = s.eigvecs().col(k);
    EXPECT_LT(s.project_plus(v).norm(), 1e-12 * v.norm());
    EXPECT_LT((s.project_minus(v) - v).norm(), 1e-12 * v.norm());
  }
}

TEST_F(SmallSplit, EigvecNorms) {
  const SpectralSplit& s = split();
  for (int k = 0; k < s.n_resolved(); k += 37) {
    const Vector v = s.eigvecs().col(k);
    EXPECT_NEAR(inner_L2w(grid(), v, v), 1.0, 1e-10);
    EXPECT_NEAR(s.energy_norm(v), std::sqrt(std::abs(s.eigvals()[k])), 1e-8 * (1 + std::abs(s.eigvals()[k])));
  }
}

TEST_F(SmallSplit, ProjectionIdentities) {
  const SpectralSplit& s = split();
  std::mt19937_64 rng(17);
  for (int k = 0; k < 200; ++k) {
    const Vector u = (k % 2) ? linkvar::testing::noise_field(grid(), rng)
                             : linkvar::testing::smooth_field(grid(), rng);
    const Vector up = s.project_plus(u), um = s.project_minus(u);
    const double nu = std::sqrt(inner_L2w(grid(), u, u));
    EXPECT_LT((up + um - u).norm(), 1e-12 * u.norm());
    EXPECT_LT((s.project_plus(up) - up).norm(), 1e-12 * u.norm());
    EXPECT_LT(std::abs(inner_L2w(grid(), up, um)), 1e-12 * nu * nu);
    const double form = inner_L2w(grid(), s.op().apply(u), u);
    const double split_form = s.norm_plus_sq(u) - s.norm_minus_sq(u);
    EXPECT_LT(std::abs(form - split_form), 1e-10 * (s.norm_plus_sq(u) + s.norm_minus_sq(u)));
    EXPECT_LE(s.mu0() * nu, s.energy_norm(u) * (1 + 1e-10));
    const double tau = s.tau_norm(u);
    EXPECT_LE(s.norm_plus(u), tau * (1 + 1e-12));
    EXPECT_LE(tau, s.energy_norm(u) * (1 + 1e-12));
  }
}

TEST_F(SmallSplit, TauNormExamples) {
  const SpectralSplit& s = split();
  EXPECT_NEAR(s.tau_norm(s.e(0)), 0.25, 1e-12);
  EXPECT_NEAR(s.tau_norm(s.e(2)), 0.0625, 1e-12);
  std::mt19937_64 rng(2);
  const Vector up = s.project_plus(linkvar::testing::smooth_field(grid(), rng));
  EXPECT_NEAR(s.tau_norm(up), s.norm_plus(up), 1e-10 * s.norm_plus(up));
}

TEST_F(SmallSplit, RieszRepresentative) {
  const SpectralSplit& s = split();
  std::mt19937_64 rng(23);
  for (int k = 0; k < 10; ++k) {
    const Vector r = linkvar::testing::smooth_field(grid(), rng);
    const Vector v = linkvar::testing::noise_field(grid(), rng);
    const Vector g = s.riesz(r);
    EXPECT_NEAR(s.x_inner(g, v), inner_L2w(grid(), r, v), 1e-9 * (1 + std::abs(inner_L2w(grid(), r, v))));
  }
}

TEST_F(SmallSplit, KappaForQuadraticExponent) {
  const KappaEstimate k = kappa_estimate(split(), grid(), 2.0, 200, 3);
  EXPECT_NEAR(k.kappa, 1.1, 1e-9);
  EXPECT_LE(k.raw, 1.0 + 1e-12);
}

TEST(Spectral, KappaStableUnderResampling) {
  const auto setup = make_setup(reference_spec(), 96, 96);
  const KappaEstimate a = kappa_estimate(setup->split, setup->g, 3.0, 2000, 7);
  const KappaEstimate b = kappa_estimate(setup->split, setup->g, 3.0, 4000, 7);
  EXPECT_NEAR(b.kappa / a.kappa, 1.0, 0.05);
}
