#ifndef HKFLOW_OPERATOR_HPP
#define HKFLOW_OPERATOR_HPP

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Sparse>

#include "grid.hpp"

namespace hkflow {

struct OperatorParams {
  int n = 2;
  double alpha = 1.0;

  void validate() const
  {
    if (n < 2)
      throw Error("operator dimension n must be at least 2");
    if (!(alpha > 0) || !std::isfinite(alpha))
      throw Error("operator exponent alpha must be positive");
  }
};

enum class Form { nondivergence, divergence };

/// translator: b = (1+|p|^2)^((3-alpha)/2); minimal: b = 0.
enum class Mode { translator, minimal };

struct Coefficients {
  Eigen::MatrixXd a;
  double b;
};

/// a^{ij}(p) = (1+|p|^2) delta_ij - p_i p_j,  b(p) = (1+|p|^2)^((3-alpha)/2).
inline Coefficients coeff_a_b(const Eigen::VectorXd& p, const OperatorParams& params)
{
  const double q = 1.0 + p.squaredNorm();
  Eigen::MatrixXd a = q * Eigen::MatrixXd::Identity(p.size(), p.size()) - p * p.transpose();
  return {std::move(a), std::pow(q, 0.5 * (3.0 - params.alpha))};
}

struct NodalDerivatives {
  Eigen::VectorXd p;
  Eigen::MatrixXd H;
};

inline NodalDerivatives nodal_derivatives(const Grid& g, const Eigen::VectorXd& u, int node)
{
  const int n = g.dim();
  NodalDerivatives d{Eigen::VectorXd(n), Eigen::MatrixXd(n, n)};
  for (int i = 0; i < n; ++i) {
    d.p(i) = g.gradient_stencil(node, i).apply(u);
    for (int j = 0; j < n; ++j)
      d.H(i, j) = g.hessian_stencil(node, i, j).apply(u);
  }
  return d;
}

namespace detail {

inline void require_hessians(const Grid& g)
{
  if (!g.hessian_ok())
    throw Error("grid too coarse for a Hessian stencil");
}

inline double b_value(double q, const OperatorParams& params, Mode mode)
{
  return mode == Mode::translator ? std::pow(q, 0.5 * (3.0 - params.alpha)) : 0.0;
}

inline double nodal_residual(const NodalDerivatives& d, const OperatorParams& params, Form form, Mode mode)
{
  const double q = 1.0 + d.p.squaredNorm();
  const double aH = q * d.H.trace() - d.p.dot(d.H * d.p);
  const double r = aH + b_value(q, params, mode);
  if (form == Form::nondivergence)
    return r;
  return r / (q * std::sqrt(q));
}

} // namespace detail

/// Q u at every grid node; boundary-point entries are zero.
inline ScalarField residual_Q(const ScalarField& u, const OperatorParams& params, Form form = Form::nondivergence,
                              Mode mode = Mode::translator)
{
  params.validate();
  const Grid& g = *u.grid;
  detail::require_hessians(g);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(g.num_dofs());
  for (int k = 0; k < g.num_nodes(); ++k)
    r(k) = detail::nodal_residual(nodal_derivatives(g, u.values, k), params, form, mode);
  return ScalarField(u.grid, std::move(r));
}

/// Size of the floating-point noise in the nondivergence residual: machine epsilon times
/// max_k [ q sum_i |D_ii|u| + |p|^2 max_ij |D_ij|u| + b ], with |D|u evaluated on |u|.
inline double residual_roundoff(const ScalarField& u, const OperatorParams& params, Mode mode = Mode::translator)
{
  const Grid& g = *u.grid;
  const Eigen::VectorXd au = u.values.cwiseAbs();
  const int n = g.dim();
  double m = 0.0;
  for (int k = 0; k < g.num_nodes(); ++k) {
    const NodalDerivatives d = nodal_derivatives(g, u.values, k);
    const double q = 1.0 + d.p.squaredNorm();
    double diag = 0.0, offd = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const Stencil& s = g.hessian_stencil(k, i, j);
        double t = 0.0;
        for (std::size_t c = 0; c < s.index.size(); ++c)
          t += std::abs(s.weight[c]) * au(s.index[c]);
        offd = std::max(offd, t);
        if (i == j)
          diag += t;
      }
    m = std::max(m, q * diag + n * d.p.squaredNorm() * offd + detail::b_value(q, params, mode));
  }
  return std::numeric_limits<double>::epsilon() * m;
}

struct LinearSystem {
  Eigen::SparseMatrix<double> matrix;
  Eigen::VectorXd rhs;
};

/// Jacobian of the discrete residual at u.  Rows of boundary points are identity rows;
/// rhs holds -Q(u) at nodes and zero at boundary points, so J du = rhs is a Newton step.
inline LinearSystem linearize_Q(const ScalarField& u, const OperatorParams& params, Form form = Form::nondivergence,
                                Mode mode = Mode::translator)
{
  params.validate();
  const Grid& g = *u.grid;
  detail::require_hessians(g);
  const int n = g.dim();
  const int N = g.num_dofs();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(g.num_nodes()) * (4 * n * n + 2 * n + 1) + g.num_boundary());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(N);
  for (int k = 0; k < g.num_nodes(); ++k) {
    const NodalDerivatives d = nodal_derivatives(g, u.values, k);
    const double q = 1.0 + d.p.squaredNorm();
    const double aH = q * d.H.trace() - d.p.dot(d.H * d.p);
    const double R = aH + detail::b_value(q, params, mode);
    Eigen::VectorXd dp = 2.0 * d.p * d.H.trace() - 2.0 * d.H * d.p;
    if (mode == Mode::translator)
      dp += (3.0 - params.alpha) * std::pow(q, 0.5 * (1.0 - params.alpha)) * d.p;
    double scale = 1.0;
    if (form == Form::divergence) {
      scale = 1.0 / (q * std::sqrt(q));
      // d(R W^-3) = W^-3 dR - 3 R W^-5 p.dp
      dp = scale * dp - 3.0 * R * scale / q * d.p;
    }
    Stencil row;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double aij = (i == j ? q : 0.0) - d.p(i) * d.p(j);
        row.add(g.hessian_stencil(k, i, j), scale * aij);
      }
      row.add(g.gradient_stencil(k, i), dp(i));
    }
    for (std::size_t t = 0; t < row.index.size(); ++t)
      trip.emplace_back(k, row.index[t], row.weight[t]);
    rhs(k) = -R * scale;
  }
  for (int b = g.num_nodes(); b < N; ++b)
    trip.emplace_back(b, b, 1.0);
  Eigen::SparseMatrix<double> J(N, N);
  J.setFromTriplets(trip.begin(), trip.end());
  return {std::move(J), std::move(rhs)};
}

/// Pointwise deviation of the translating flow speed from 1 for V = -u:
/// |W (div(DV/W))^(1/alpha) - 1| with W = sqrt(1+|Du|^2).
inline ScalarField flow_translation_deviation(const ScalarField& u, const OperatorParams& params)
{
  params.validate();
  const Grid& g = *u.grid;
  detail::require_hessians(g);
  Eigen::VectorXd dev = Eigen::VectorXd::Zero(g.num_dofs());
  for (int k = 0; k < g.num_nodes(); ++k) {
    const NodalDerivatives d = nodal_derivatives(g, u.values, k);
    const double q = 1.0 + d.p.squaredNorm();
    const double W = std::sqrt(q);
    // div(Du/W) = (q tr H - p.Hp) / W^3; V = -u flips its sign.
    const double base = -(q * d.H.trace() - d.p.dot(d.H * d.p)) / (q * W);
    if (!(base > 0.0))
      throw Error("profile not mean-convex at node " + std::to_string(k));
    dev(k) = std::abs(W * std::pow(base, 1.0 / params.alpha) - 1.0);
  }
  return ScalarField(u.grid, std::move(dev));
}

inline double flow_translation_check(const ScalarField& u, const OperatorParams& params)
{
  const ScalarField dev = flow_translation_deviation(u, params);
  return dev.values.head(u.grid->num_nodes()).lpNorm<Eigen::Infinity>();
}

} // namespace hkflow

#endif
