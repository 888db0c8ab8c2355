#include <random>

#include <gtest/gtest.h>

#include <hkflow/operator.hpp>
#include <hkflow/solver.hpp>

using namespace hkflow;

namespace {

std::shared_ptr<const Grid> disk_grid(double h) { return classify_nodes(DomainSpec::ball(make_point({0, 0}), 1.0), h); }

ScalarField smooth_field(std::shared_ptr<const Grid> g, std::mt19937_64& rng)
{
  std::uniform_real_distribution<double> U(-1, 1);
  const double a = U(rng), b = U(rng), c = U(rng), d = U(rng);
  return ScalarField::from_function(std::move(g), [=](const Point& x) {
    return a * std::sin(x(0) + b) + c * x(0) * x(1) + d * std::exp(0.5 * x(1));
  });
}

} // namespace

TEST(Operator, CoefficientExamples)
{
  const OperatorParams p{2, 1.0};
  Coefficients c = coeff_a_b(make_point({0, 0}), p);
  EXPECT_TRUE(c.a.isApprox(Eigen::MatrixXd::Identity(2, 2)));
  EXPECT_DOUBLE_EQ(c.b, 1.0);
  c = coeff_a_b(make_point({1, 0}), p);
  EXPECT_DOUBLE_EQ(c.a(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(c.a(1, 1), 2.0);
  EXPECT_DOUBLE_EQ(c.a(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(coeff_a_b(make_point({1, 0}), OperatorParams{2, 3.0}).b, 1.0);
}

TEST(Operator, CoefficientEigenvalues)
{
  std::mt19937_64 rng(1);
  std::normal_distribution<double> N;
  for (int n : {2, 3, 4}) {
    Point p(n);
    for (int i = 0; i < n; ++i)
      p(i) = N(rng);
    const Coefficients c = coeff_a_b(p, OperatorParams{n, 1.0});
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c.a);
    const double q = 1 + p.squaredNorm();
    EXPECT_NEAR(es.eigenvalues()(0), 1.0, 1e-12);
    for (int i = 1; i < n; ++i)
      EXPECT_NEAR(es.eigenvalues()(i), q, 1e-12 * q);
    EXPECT_NEAR((c.a * p - p).norm(), 0.0, 1e-12 * q);
  }
  EXPECT_THROW(OperatorParams({1, 1.0}).validate(), Error);
  EXPECT_THROW(OperatorParams({2, 0.0}).validate(), Error);
}

TEST(Operator, ResidualOfConstantAndAffine)
{
  const auto g = disk_grid(0.125);
  const ScalarField c = ScalarField::from_function(g, [](const Point&) { return 5.0; });
  const ScalarField r = residual_Q(c, OperatorParams{2, 1.0});
  for (int k = 0; k < g->num_nodes(); ++k)
    EXPECT_NEAR(r(k), 1.0, 1e-12);
  const ScalarField a = ScalarField::from_function(g, [](const Point& x) { return x(0); });
  for (double alpha : {0.5, 1.0, 2.0}) {
    const ScalarField ra = residual_Q(a, OperatorParams{2, alpha});
    for (int k = 0; k < g->num_nodes(); ++k)
      EXPECT_NEAR(ra(k), std::pow(2.0, 0.5 * (3 - alpha)), 1e-9);
  }
  for (int b = g->num_nodes(); b < g->num_dofs(); ++b)
    EXPECT_EQ(r(b), 0.0);
}

TEST(Operator, FormConsistency)
{
  std::mt19937_64 rng(4);
  const auto g = disk_grid(0.1);
  const OperatorParams p{2, 0.7};
  for (int t = 0; t < 10; ++t) {
    const ScalarField u = smooth_field(g, rng);
    const ScalarField rn = residual_Q(u, p, Form::nondivergence);
    const ScalarField rd = residual_Q(u, p, Form::divergence);
    for (int k = 0; k < g->num_nodes(); ++k) {
      const NodalDerivatives d = nodal_derivatives(*g, u.values, k);
      const double W3 = std::pow(1 + d.p.squaredNorm(), 1.5);
      EXPECT_NEAR(rn(k), W3 * rd(k), 1e-10 * std::max(1.0, std::abs(rn(k))));
    }
  }
}

TEST(Operator, ShiftInvariance)
{
  std::mt19937_64 rng(8);
  const auto g = disk_grid(0.1);
  const ScalarField u = smooth_field(g, rng);
  ScalarField v = u;
  v.values.array() += 3.0;
  const OperatorParams p{2, 1.0};
  EXPECT_LE((residual_Q(u, p).values - residual_Q(v, p).values).lpNorm<Eigen::Infinity>(), 1e-10);
}

TEST(Operator, RadialProfileResidualIsSecondOrder)
{
  const OperatorParams p{2, 1.0};
  const RadialProfile prof = radial_oracle(p, 0.0, 1.0, 1e-3);
  // Away from the first-order boundary layer.
  std::vector<double> res;
  for (double h : {0.1, 0.05, 0.025}) {
    const auto g = disk_grid(h);
    const ScalarField u = radial_field(g, prof, make_point({0, 0}));
    const ScalarField r = residual_Q(u, p);
    double m = 0;
    for (int k = 0; k < g->num_nodes(); ++k)
      if (g->position(k).norm() < 0.7)
        m = std::max(m, std::abs(r(k)));
    res.push_back(m);
  }
  EXPECT_GT(res[0] / res[1], 3.0);
  EXPECT_GT(res[1] / res[2], 3.0);
}

TEST(Operator, JacobianMatchesDirectionalDifferences)
{
  std::mt19937_64 rng(12);
  const auto g = disk_grid(0.125);
  const OperatorParams p{2, 0.5};
  for (Form form : {Form::nondivergence, Form::divergence}) {
    const ScalarField u = smooth_field(g, rng);
    ScalarField v = smooth_field(g, rng);
    const LinearSystem sys = linearize_Q(u, p, form);
    const Eigen::VectorXd Jv = sys.matrix * v.values;
    std::vector<double> err;
    for (double eps : {1e-3, 1e-4}) {
      ScalarField up = u, um = u;
      up.values += eps * v.values;
      um.values -= eps * v.values;
      const Eigen::VectorXd fd = (residual_Q(up, p, form).values - residual_Q(um, p, form).values) / (2 * eps);
      err.push_back((fd - Jv).head(g->num_nodes()).lpNorm<Eigen::Infinity>());
    }
    EXPECT_LT(err[1], 1e-4 * Jv.lpNorm<Eigen::Infinity>());
    // Central differences: error falls at least like eps.
    EXPECT_LT(err[1], 0.2 * err[0] + 1e-9);
    // Dirichlet rows.
    for (int b = g->num_nodes(); b < g->num_dofs(); ++b)
      EXPECT_DOUBLE_EQ(Jv(b), v(b));
  }
}

TEST(Operator, JacobianAtZeroIsLaplacian)
{
  const auto g = disk_grid(0.125);
  const ScalarField z(g);
  const LinearSystem sys = linearize_Q(z, OperatorParams{2, 1.0});
  const Eigen::SparseMatrix<double> JT = sys.matrix.transpose();
  for (int k = 0; k < g->num_nodes(); ++k) {
    Stencil lap;
    lap.add(g->hessian_stencil(k, 0, 0), 1.0);
    lap.add(g->hessian_stencil(k, 1, 1), 1.0);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(g->num_dofs());
    for (std::size_t t = 0; t < lap.index.size(); ++t)
      e(lap.index[t]) += lap.weight[t];
    EXPECT_NEAR((Eigen::VectorXd(JT.col(k)) - e).norm(), 0.0, 1e-9);
    EXPECT_NEAR(sys.rhs(k), -1.0, 1e-15);
  }
}

TEST(Operator, FlowCheckOnOracleDecreases)
{
  const OperatorParams p{2, 1.0};
  const RadialProfile prof = radial_oracle(p, 0.0, 1.0, 1e-3);
  double prev = std::numeric_limits<double>::infinity();
  for (double h : {1.0 / 16, 1.0 / 32, 1.0 / 64}) {
    const auto g = disk_grid(h);
    const double dev = flow_translation_check(radial_field(g, prof, make_point({0, 0})), p);
    EXPECT_LE(dev, 5 * (h * h + h));
    EXPECT_LT(dev, prev);
    prev = dev;
  }
}

TEST(Operator, FlowCheckRejectsFlatProfile)
{
  const auto g = disk_grid(0.25);
  const ScalarField c = ScalarField::from_function(g, [](const Point&) { return 2.0; });
  EXPECT_THROW(flow_translation_check(c, OperatorParams{2, 1.0}), Error);
}

TEST(Operator, FlowCheckAgreesWithResidualAtAlphaOne)
{
  // For alpha = 1 the deviation equals |W Q_div u|.
  const auto g = disk_grid(0.1);
  const OperatorParams p{2, 1.0};
  const RadialProfile prof = radial_oracle(p, 0.0, 1.0, 1e-3);
  const ScalarField u = radial_field(g, prof, make_point({0, 0}));
  const ScalarField dev = flow_translation_deviation(u, p);
  const ScalarField rd = residual_Q(u, p, Form::divergence);
  for (int k = 0; k < g->num_nodes(); ++k) {
    const NodalDerivatives d = nodal_derivatives(*g, u.values, k);
    const double W = std::sqrt(1 + d.p.squaredNorm());
    EXPECT_NEAR(dev(k), std::abs(W * rd(k)), 1e-10);
  }
}
