#include <cmath>
#include <filesystem>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "linkvar/error.hpp"
#include "linkvar/solver.hpp"

using namespace linkvar;
using linkvar::testing::make_setup;
using linkvar::testing::reference_spec;

namespace {

class Solver : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    setup_ = make_setup(reference_spec(), 32, 32).release();
    const KappaEstimate kappa = kappa_estimate(setup_->split, setup_->g, 3.0, 500, 7);
    NonlinearityConstants nlc;
    const GeometryConstants base = base_constants(setup_->split, setup_->ctx->nonlinearity(), kappa, &nlc);
    GeometryOptions o;
    o.starts = 8;
    o.sphere_resamples = 500;
    o.delta_samples = 2000;
    o.ray_samples = 500;
    geo_ = new GeometryReport(check_geometry(*setup_->ctx, initial_direction(setup_->split), base, kappa, nlc, o));
    report_ = new SolveReport(solve(*setup_->ctx, *geo_));
  }
  static void TearDownTestSuite() {
    delete report_;
    delete geo_;
    delete setup_;
  }
  static linkvar::testing::Setup* setup_;
  static GeometryReport* geo_;
  static SolveReport* report_;
  const FunctionalContext& ctx() const { return *setup_->ctx; }
  const SpectralSplit& split() const { return setup_->split; }
};

linkvar::testing::Setup* Solver::setup_ = nullptr;
GeometryReport* Solver::geo_ = nullptr;
SolveReport* Solver::report_ = nullptr;

}  // namespace

TEST_F(Solver, InnerQuadraticHook) {
  const auto q = FunctionalContext::quadratic_only(setup_->g, split(), reference_spec());
  const double R = 3.0;
  const InnerResult in = inner_maximize(q, initial_direction(split()), R);
  EXPECT_NEAR(in.t, R, 1e-9);
  EXPECT_LT(in.s.norm(), 1e-9);
  EXPECT_TRUE(in.on_boundary);
  EXPECT_NEAR(in.value, 0.5 * R * R, 1e-9);
}

TEST_F(Solver, InnerBeatsRayClosedForm) {
  const Vector u = initial_direction(split());
  // J(t u) = t^2/2 - t^4 S with S = sum w u^4 / 4, maximal at t^2 = 1/(4S).
  const double S = (setup_->g.w.array() * u.array().pow(4)).sum() / 4.0;
  const double closed = 1.0 / (16.0 * S);
  const double oracle = -linkvar::testing::golden_min([&](double t) { return -J(ctx(), t * u); }, 0.0,
                                                      4.0 / std::sqrt(4.0 * S));
  EXPECT_NEAR(oracle, closed, 1e-9 * closed);
  const InnerResult in = inner_maximize(ctx(), u, geo_->R.R);
  EXPECT_GE(in.value, closed - 1e-12 * closed);
  EXPECT_LT(in.kkt, 1e-9 * std::max(1.0, std::abs(in.value)));
  EXPECT_FALSE(in.on_boundary);
}

TEST_F(Solver, OuterStepsDecreasePhi) {
  SolverOptions o;
  OuterState st = evaluate_direction(ctx(), initial_direction(split()), geo_->R.R, o);
  for (int k = 0; k < 5; ++k) {
    const OuterState next = outer_step(ctx(), st, o);
    EXPECT_LE(next.phi, st.phi + 1e-12 * std::abs(st.phi));
    st = next;
  }
}

TEST_F(Solver, ConvergedCriticalPoint) {
  const SolveReport& r = *report_;
  EXPECT_TRUE(r.converged);
  EXPECT_TRUE(r.nontrivial);
  EXPECT_TRUE(r.energy_bracket_ok);
  EXPECT_LT(r.cerami_residual, 1e-8);
  EXPECT_LT(r.residual_X, 1e-8);
  EXPECT_LT(r.pde_relative, 1e-6);
  EXPECT_GT(r.J_value, 0.0);
  EXPECT_GE(r.J_value, geo_->link.b - r.energy_tol);
  EXPECT_LE(r.J_value, r.c_upper + r.energy_tol);
  EXPECT_GE(r.tau_norm_value, 0.5 * geo_->delta.delta);
  EXPECT_LE(r.iterations.outer, 500);
  EXPECT_LT(r.identity_checks.dJ_ek_max, 1e-8);
}

TEST_F(Solver, SignSymmetry) {
  const Vector minus = -report_->u_star;
  EXPECT_NEAR(J(ctx(), minus), report_->J_value, 1e-12 * report_->J_value);
  EXPECT_LT(dual_norm(ctx(), minus), 1e-8);
  EXPECT_LT(report_->identity_checks.minus_residual, 1e-8);
}

TEST_F(Solver, ResolvedDirectionsAreStationary) {
  for (int k = split().n_minus(); k < split().n_resolved(); k += 50)
    EXPECT_LT(std::abs(dJ(ctx(), report_->u_star, split().eigvecs().col(k))), 1e-8);
}

TEST_F(Solver, RefineAtSolutionIsIdle) {
  const SolveReport again = refine(ctx(), report_->u_star, geo_->delta.delta);
  EXPECT_EQ(again.iterations.refine, 0);
  EXPECT_TRUE(again.converged);
}

TEST_F(Solver, RefineFromZeroCollapses) {
  try {
    refine(ctx(), Vector::Zero(static_cast<Eigen::Index>(setup_->g.size())), geo_->delta.delta);
    FAIL() << "no throw";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CollapseToZero);
  }
}

TEST_F(Solver, SnapshotRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "linkvar_solver_test.lnkv";
  write_snapshot(path.string(), setup_->g, report_->u_star);
  const Vector back = read_snapshot(path.string(), setup_->g);
  EXPECT_EQ(back, report_->u_star);
  const Grid other = build_grid(reference_spec(), 16, 16, 6.0, 4.0);
  EXPECT_THROW(read_snapshot(path.string(), other), Error);
  std::filesystem::remove(path);
}

TEST_F(Solver, RejectsInadmissibleLambda) {
  const FunctionalContext c = ctx().with_lambda(10.0 * geo_->constants.lambda_max);
  EXPECT_THROW(solve(c, *geo_), Error);
}
