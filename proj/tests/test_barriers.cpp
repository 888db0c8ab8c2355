#include <cmath>

#include <gtest/gtest.h>

#include <hkflow/barriers.hpp>
#include <hkflow/solver.hpp>

using namespace hkflow;

namespace {

DomainSpec unit_disk() { return DomainSpec::ball(make_point({0, 0}), 1.0); }

const ScalarFunction zero = [](const Point&) { return 0.0; };

} // namespace

TEST(Barriers, ZeroDataConstants)
{
  const BarrierSpec s = barrier_constants(unit_disk(), zero, OperatorParams{2, 1.0}, 0.5);
  EXPECT_DOUBLE_EQ(s.c3, 1e-6);
  EXPECT_NEAR(s.H0, 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(s.nu, 2.0);
  EXPECT_DOUBLE_EQ(s.a, 0.0);
  EXPECT_DOUBLE_EQ(s.d1, 0.5);
  EXPECT_DOUBLE_EQ(gradient_bound(s), s.k / s.c3);
}

TEST(Barriers, PsiIdentities)
{
  for (double alpha : {0.5, 1.0, 2.0}) {
    const ScalarFunction phi = [](const Point& x) { return 0.3 * x(0) * x(1); };
    const BarrierSpec s = barrier_constants(unit_disk(), phi, OperatorParams{2, alpha}, 1.0);
    const PsiValue p0 = psi_eval(s, 0.0);
    EXPECT_EQ(p0.psi, 0.0);
    EXPECT_NEAR(p0.dpsi, s.k / s.c3, 1e-12 * s.k / s.c3);
    double prev = p0.dpsi;
    for (int i = 1; i <= 100; ++i) {
      const double d = s.d1 * i / 100.0;
      const PsiValue v = psi_eval(s, d);
      EXPECT_LE(std::abs(v.d2psi + s.c3 * v.dpsi * v.dpsi), 1e-12 * std::abs(v.d2psi));
      EXPECT_GE(v.dpsi, s.nu);
      EXPECT_LT(v.d2psi, 0.0);
      EXPECT_LT(v.dpsi, prev);
      prev = v.dpsi;
    }
    EXPECT_GE(psi_eval(s, s.d1).psi, s.a + s.m);
    EXPECT_THROW(psi_eval(s, -0.1), Error);
    EXPECT_THROW(psi_eval(s, 2 * s.d1), Error);
  }
}

TEST(Barriers, VerifyOnDisk)
{
  for (double alpha : {0.5, 1.0, 2.0}) {
    const OperatorParams P{2, alpha};
    const BarrierSpec s = barrier_constants(unit_disk(), zero, P, 1.0);
    const auto xs = collar_samples(unit_disk(), s.d1, 10000, 3);
    const BarrierReport r = barrier_verify(s, unit_disk(), zero, P, xs);
    EXPECT_TRUE(r.pass) << "alpha=" << alpha;
    EXPECT_LT(r.max_upper, 0.0);
    EXPECT_LT(r.max_lower, 0.0);
  }
}

TEST(Barriers, VerifyWithNonzeroData)
{
  const ScalarFunction phi = [](const Point& x) { return 0.2 * (x(0) * x(0) - x(1) * x(1)); };
  const OperatorParams P{2, 1.0};
  const BarrierSpec s = barrier_constants(unit_disk(), phi, P, 1.0);
  EXPECT_GT(s.c3, 1e-6);
  EXPECT_TRUE(barrier_verify(s, unit_disk(), phi, P, collar_samples(unit_disk(), s.d1, 2000, 4)).pass);
}

TEST(Barriers, SamplesOutsideCollarRejected)
{
  const OperatorParams P{2, 1.0};
  const BarrierSpec s = barrier_constants(unit_disk(), zero, P, 1.0);
  EXPECT_THROW(barrier_verify(s, unit_disk(), zero, P, {make_point({0, 0})}), Error);
}

TEST(Barriers, BoundIncreasesWithM)
{
  const OperatorParams P{2, 1.0};
  double prev = 0.0;
  for (double m : {0.1, 1.0, 10.0, 100.0}) {
    const double b = gradient_bound(barrier_constants(unit_disk(), zero, P, m));
    EXPECT_GT(b, prev);
    prev = b;
  }
}

TEST(Barriers, CollarSamplesInsideLayer)
{
  const auto cap = DomainSpec::truncation(DomainSpec::rounded_strip(0.5, make_point({1, 0})), 3.0);
  for (const auto& x : collar_samples(cap, 0.2, 500, 9)) {
    const double s = signed_distance(cap, x);
    EXPECT_GT(s, 0.0);
    EXPECT_LT(s, 0.2);
  }
  EXPECT_DOUBLE_EQ(convex_collar_width(cap), 0.5);
  EXPECT_THROW(convex_collar_width(DomainSpec::box(make_point({0, 0}), make_point({1, 1}))), Error);
}

TEST(Barriers, NonMeanConvexRejected)
{
  const auto ann = DomainSpec::annulus(make_point({0, 0}), 0.5, 1.0);
  EXPECT_THROW(barrier_constants(ann, zero, OperatorParams{2, 1.0}, 1.0), Error);
}

TEST(Barriers, SolutionTrappedAndGradientBounded)
{
  const OperatorParams P{2, 1.0};
  const auto g = classify_nodes(unit_disk(), 1.0 / 16);
  const auto [u, rep] = solve_dirichlet(g, zero, P);
  const double m = u.values.cwiseAbs().maxCoeff();
  const BarrierSpec s = barrier_constants(unit_disk(), zero, P, m);
  for (int k = 0; k < g->num_nodes(); ++k) {
    const double dist = signed_distance(unit_disk(), g->position(k));
    if (dist < s.d1)
      EXPECT_LE(std::abs(u(k)), psi_eval(s, dist).psi + 1e-10);
  }
  EXPECT_LE(gradient_diagnostics(u).max_boundary, gradient_bound(s));
}

TEST(Barriers, FiniteDifferenceHelpers)
{
  const ScalarFunction f = [](const Point& x) { return x(0) * x(0) * x(1) + std::sin(x(1)); };
  const Point x = make_point({0.4, -0.3});
  const Eigen::VectorXd g = fd_gradient(f, x);
  EXPECT_NEAR(g(0), 2 * 0.4 * -0.3, 1e-8);
  EXPECT_NEAR(g(1), 0.16 + std::cos(-0.3), 1e-8);
  const Eigen::MatrixXd H = fd_hessian(f, x);
  EXPECT_NEAR(H(0, 0), -0.6, 1e-6);
  EXPECT_NEAR(H(0, 1), 0.8, 1e-6);
  EXPECT_NEAR(H(1, 1), -std::sin(-0.3), 1e-6);
}
