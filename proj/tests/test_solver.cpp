#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include <hkflow/solver.hpp>

using namespace hkflow;

namespace {

DomainSpec unit_disk() { return DomainSpec::ball(make_point({0, 0}), 1.0); }

double oracle_error(double h, const OperatorParams& P, const RadialProfile& prof, int* iterations = nullptr)
{
  const auto g = classify_nodes(unit_disk(), h);
  const ScalarFunction phi = [&](const Point& x) { return prof.value(x.norm()); };
  const auto [u, rep] = solve_dirichlet(g, phi, P);
  if (iterations)
    *iterations = rep.iterations;
  return (u.values - radial_field(g, prof, make_point({0, 0})).values).lpNorm<Eigen::Infinity>();
}

ScalarFunction smooth_data(std::mt19937_64& rng, double lift)
{
  std::uniform_real_distribution<double> U(-0.5, 0.5);
  const double a = U(rng), b = U(rng), c = U(rng), w = 1 + 2 * (U(rng) + 0.5);
  return [=](const Point& x) { return lift + a * x(0) + b * std::sin(w * x(1)) + c * x(0) * x(1); };
}

} // namespace

TEST(Solver, DiskOrderOfAccuracy)
{
  const OperatorParams P{2, 1.0};
  const RadialProfile prof = radial_oracle(P, 0.0, 1.0, 1e-3);
  std::vector<double> err;
  for (double h : {1.0 / 8, 1.0 / 16, 1.0 / 32}) {
    int it = 0;
    err.push_back(oracle_error(h, P, prof, &it));
    EXPECT_LE(it, 30);
  }
  for (std::size_t i = 1; i < err.size(); ++i) {
    const double ratio = err[i - 1] / err[i];
    EXPECT_GE(ratio, 3.0) << i;
    EXPECT_LE(ratio, 5.0) << i;
  }
}

TEST(Solver, ShiftEquivariance)
{
  const OperatorParams P{2, 1.0};
  const auto g = classify_nodes(unit_disk(), 1.0 / 16);
  std::mt19937_64 rng(2);
  const ScalarFunction phi = smooth_data(rng, 0.0);
  const auto u = solve_dirichlet(g, phi, P).first;
  const auto v = solve_dirichlet(g, [&](const Point& x) { return phi(x) + 2.5; }, P).first;
  EXPECT_LE((v.values.array() - 2.5 - u.values.array()).abs().maxCoeff(), 1e-10);
}

TEST(Solver, DiscreteComparison)
{
  const OperatorParams P{2, 1.0};
  const auto g = classify_nodes(unit_disk(), 1.0 / 8);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> gap(0.0, 0.3);
  for (int t = 0; t < 20; ++t) {
    const ScalarFunction lo = smooth_data(rng, 0.0);
    const ScalarFunction bump = smooth_data(rng, 0.0);
    const double s = gap(rng);
    // hi >= lo on the boundary, with a non-constant difference.
    const ScalarFunction hi = [=](const Point& x) { return lo(x) + s + 0.5 * (1 + std::tanh(bump(x))); };
    const auto u1 = solve_dirichlet(g, lo, P).first;
    const auto u2 = solve_dirichlet(g, hi, P).first;
    const Comparison c = compare_fields(u1, u2);
    EXPECT_TRUE(c.leq) << t << " " << c.max_violation;
  }
}

TEST(Solver, MinimalModeReproducesAffineData)
{
  const auto g = classify_nodes(unit_disk(), 1.0 / 16);
  const ScalarFunction phi = [](const Point& x) { return 0.3 + 1.5 * x(0) - 0.7 * x(1); };
  const auto u = solve_dirichlet(g, phi, OperatorParams{2, 1.0}, Mode::minimal).first;
  for (int k = 0; k < g->num_dofs(); ++k)
    EXPECT_NEAR(u(k), phi(g->position(k)), 1e-10);
}

TEST(Solver, MinimalSolutionLiesBelow)
{
  const OperatorParams P{2, 1.0};
  const auto g = classify_nodes(unit_disk(), 1.0 / 16);
  const ScalarFunction phi = [](const Point& x) { return 0.2 * x(0) * x(1); };
  const auto v0 = solve_dirichlet(g, phi, P, Mode::minimal).first;
  const auto u = solve_dirichlet(g, phi, P).first;
  const ScalarField r = residual_Q(v0, P);
  for (int k = 0; k < g->num_nodes(); ++k)
    EXPECT_GT(r(k), 0.0);
  EXPECT_TRUE(compare_fields(v0, u).leq);
}

TEST(Solver, RadialOracleStart)
{
  for (int n : {2, 3}) {
    const RadialProfile prof = radial_oracle(OperatorParams{n, 1.0}, 0.0, 0.5, 1e-4);
    EXPECT_NEAR(prof.du[1] / prof.r[1], -1.0 / n, 1e-6);
    EXPECT_NEAR(prof.u[1], -0.5 * prof.r[1] * prof.r[1] / n, 1e-10);
  }
  EXPECT_THROW(radial_oracle(OperatorParams{2, 1.0}, 0.0, -1.0, 1e-3), Error);
}

TEST(Solver, RadialOracleStepOrder)
{
  const OperatorParams P{2, 1.0};
  std::vector<double> v;
  for (double s : {1e-2, 5e-3, 2.5e-3})
    v.push_back(radial_oracle(P, 0.0, 2.0, s).u.back());
  EXPECT_GE(std::log2(std::abs(v[0] - v[1]) / std::abs(v[1] - v[2])), 3.5);
}

TEST(Solver, RadialInterpolantMatchesTable)
{
  const RadialProfile prof = radial_oracle(OperatorParams{2, 1.0}, 1.0, 1.0, 1e-2);
  EXPECT_DOUBLE_EQ(prof.value(0.0), 1.0);
  EXPECT_NEAR(prof.value(prof.r[37]), prof.u[37], 1e-15);
  EXPECT_NEAR(prof.interpolate(prof.r[37]).second, prof.du[37], 1e-12);
  EXPECT_THROW(prof.value(1.5), Error);
}

TEST(Solver, CompareFieldsExamples)
{
  const auto g = classify_nodes(unit_disk(), 0.25);
  ScalarField a(g), b(g);
  b.values.setConstant(1.0);
  EXPECT_TRUE(compare_fields(a, b).leq);
  EXPECT_DOUBLE_EQ(compare_fields(a, b).max_violation, -1.0);
  a.values(0) = 1.0 + 1e-9;
  EXPECT_TRUE(compare_fields(a, b).leq);
  a.values(0) = 1.1;
  EXPECT_FALSE(compare_fields(a, b).leq);
  const ScalarField c(classify_nodes(unit_disk(), 0.25));
  EXPECT_THROW(compare_fields(a, c), Error);
}

TEST(Solver, GradientDiagnostics)
{
  const auto g = classify_nodes(unit_disk(), 1.0 / 16);
  const auto [u, rep] = solve_dirichlet(g, [](const Point&) { return 0.0; }, OperatorParams{2, 1.0});
  const GradientReport gr = gradient_diagnostics(u);
  EXPECT_TRUE(gr.max_principle_ok);
  EXPECT_DOUBLE_EQ(gr.h, 1.0 / 16);
  EXPECT_DOUBLE_EQ(rep.max_boundary_gradient, gr.max_boundary);
  EXPECT_GE(gr.max_boundary, gradient_max_where(u, [](const Point& x) { return x.norm() < 0.5; }));
}

TEST(Solver, RotationEquivariance)
{
  const OperatorParams P{2, 0.5};
  const double h = 1.0 / 16;
  const auto g = classify_nodes(unit_disk(), h);
  const ScalarFunction phi = [](const Point& x) { return 0.4 * x(0) * x(0) + 0.2 * x(0) * x(1) - 0.1 * x(1); };
  const ScalarFunction rphi = [&](const Point& x) { return phi(make_point({x(1), -x(0)})); };
  const auto u = solve_dirichlet(g, phi, P).first;
  const auto v = solve_dirichlet(g, rphi, P).first;
  int matched = 0;
  for (int k = 0; k < g->num_nodes(); ++k) {
    const Point& x = g->position(k);
    const int j = g->find_node({static_cast<int>(std::lround(x(1) / h)), static_cast<int>(std::lround(-x(0) / h))});
    ASSERT_GE(j, 0);
    ASSERT_NEAR((g->position(j) - make_point({x(1), -x(0)})).norm(), 0.0, 1e-12);
    EXPECT_NEAR(v(k), u(j), 1e-10);
    ++matched;
  }
  EXPECT_EQ(matched, g->num_nodes());
}

TEST(Solver, QuadraticConvergenceReported)
{
  const auto g = classify_nodes(unit_disk(), 1.0 / 16);
  SolveOptions opt;
  opt.harmonic_start = false;
  const auto [u, rep] = solve_dirichlet(g, [](const Point& x) { return 0.3 * x(0); }, OperatorParams{2, 1.0},
                                        Mode::translator, opt);
  EXPECT_LE(rep.final_residual, opt.tolerance);
  EXPECT_GE(rep.residual_history.size(), 2u);
  EXPECT_TRUE(std::isfinite(rep.quadratic_constant));
  EXPECT_GT(rep.quadratic_constant, 0.0);
  EXPECT_LT(rep.quadratic_constant, 1.0);
  // Above the round-off floor each residual is bounded by the square of its predecessor.
  const auto& r = rep.residual_history;
  int pairs = 0;
  for (std::size_t i = 0; i + 1 < r.size(); ++i)
    if (r[i] < 1e-2 && r[i + 1] > 1e-10) {
      EXPECT_LE(r[i + 1], r[i] * r[i]) << i;
      ++pairs;
    }
  EXPECT_GE(pairs, 1);
}

TEST(Solver, ThreeDimensionalBall)
{
  const OperatorParams P{3, 1.0};
  const RadialProfile prof = radial_oracle(P, 0.0, 1.0, 1e-3);
  const auto g = classify_nodes(DomainSpec::ball(make_point({0, 0, 0}), 1.0), 0.125);
  const auto u = solve_dirichlet(g, [&](const Point& x) { return prof.value(x.norm()); }, P).first;
  EXPECT_LT((u.values - radial_field(g, prof, make_point({0, 0, 0})).values).lpNorm<Eigen::Infinity>(), 5e-3);
}

TEST(Solver, InvalidOptionsRejected)
{
  const auto g = classify_nodes(unit_disk(), 0.25);
  SolveOptions opt;
  opt.tolerance = 0.0;
  EXPECT_THROW(solve_dirichlet(g, [](const Point&) { return 0.0; }, OperatorParams{2, 1.0}, Mode::translator, opt), Error);
}
