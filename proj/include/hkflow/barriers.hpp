#ifndef HKFLOW_BARRIERS_HPP
#define HKFLOW_BARRIERS_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "operator.hpp"

namespace hkflow {

struct BarrierSpec {
  double c1 = 0, c2 = 0, c3 = 0;
  double nu = 1;
  double d1 = 0;
  double k = 0;
  double a = 0; // sup |phi| on the collar
  double m = 0; // bound for sup |u|
  double H0 = 0;
  double collar_width = 0;
  double sup_Dphi = 0;
  double sup_D2phi = 0;
  double sup_D2d = 0;
};

inline Eigen::VectorXd fd_gradient(const ScalarFunction& f, const Point& x, double step = 1e-5)
{
  const Eigen::Index n = x.size();
  Eigen::VectorXd g(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Point xp = x, xm = x;
    xp(i) += step;
    xm(i) -= step;
    g(i) = (f(xp) - f(xm)) / (2 * step);
  }
  return g;
}

inline Eigen::MatrixXd fd_hessian(const ScalarFunction& f, const Point& x, double step = 1e-4)
{
  const Eigen::Index n = x.size();
  Eigen::MatrixXd H(n, n);
  const double f0 = f(x);
  for (Eigen::Index i = 0; i < n; ++i) {
    Point xp = x, xm = x;
    xp(i) += step;
    xm(i) -= step;
    H(i, i) = (f(xp) - 2 * f0 + f(xm)) / (step * step);
    for (Eigen::Index j = 0; j < i; ++j) {
      Point pp = x, pm = x, mp = x, mm = x;
      pp(i) += step, pp(j) += step;
      pm(i) += step, pm(j) -= step;
      mp(i) -= step, mp(j) += step;
      mm(i) -= step, mm(j) -= step;
      H(i, j) = H(j, i) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4 * step * step);
    }
  }
  return H;
}

/// Width of the boundary layer on which the distance function is smooth and its Laplacian
/// stays below -(n-1)H0.
inline double convex_collar_width(const DomainSpec& d)
{
  if (d.is<Ball>())
    return d.as<Ball>().radius;
  if (d.is<RoundedStrip>())
    return d.as<RoundedStrip>().rho;
  if (d.is<Truncation>() && d.as<Truncation>().base->is<RoundedStrip>())
    return d.as<Truncation>().base->as<RoundedStrip>().rho;
  throw Error("collar width unavailable for " + d.kind_name());
}

/// Random points x with 0 < dist(x, boundary) < depth.
inline std::vector<Point> collar_samples(const DomainSpec& d, double depth, std::size_t count, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const int n = d.dim();
  std::vector<Point> out;
  out.reserve(count);
  if (d.is<Ball>()) {
    const auto& b = d.as<Ball>();
    depth = std::min(depth, b.radius);
    while (out.size() < count) {
      const double r = b.radius - depth * U(rng);
      if (r >= b.radius || r <= b.radius - depth)
        continue;
      out.push_back(b.center + r * random_direction(n, rng));
    }
    return out;
  }
  const BoundingBox bb = bounding_box(d);
  long tries = 0;
  while (out.size() < count) {
    if (++tries > 1000L * static_cast<long>(count) + 100000)
      throw Error("collar sampling failed");
    Point x(n);
    for (int i = 0; i < n; ++i)
      x(i) = bb.lo(i) + U(rng) * (bb.hi(i) - bb.lo(i));
    const double s = signed_distance(d, x);
    if (s > 0 && s < depth)
      out.push_back(x);
  }
  return out;
}

/// Minimum of the boundary mean curvature over random boundary points.
inline double min_boundary_curvature(const DomainSpec& d, std::size_t count, std::uint64_t seed,
                                     double x1_limit = std::numeric_limits<double>::infinity())
{
  std::mt19937_64 rng(seed);
  double H0 = std::numeric_limits<double>::infinity();
  for (const auto& y : sample_boundary(d, count, rng, x1_limit))
    H0 = std::min(H0, boundary_mean_curvature(d, y));
  return H0;
}

/// (n-1)H0 - ((1 + 2 sup|Dphi|^2)/nu^2 + 2)^((1-alpha)/2) nu^-alpha.
inline double nu_positivity(double nu, double H0, double sup_Dphi, const OperatorParams& params)
{
  const double base = (1.0 + 2.0 * sup_Dphi * sup_Dphi) / (nu * nu) + 2.0;
  return (params.n - 1) * H0 - std::pow(base, 0.5 * (1.0 - params.alpha)) * std::pow(nu, -params.alpha);
}

struct BarrierOptions {
  std::size_t samples = 4000;
  std::uint64_t seed = 7;
};

inline BarrierSpec barrier_constants(const DomainSpec& domain, const ScalarFunction& phi, const OperatorParams& params,
                                     double m, const BarrierOptions& opt = {})
{
  params.validate();
  const int n = params.n;
  if (domain.dim() != n)
    throw Error("domain dimension does not match operator");
  BarrierSpec s;
  s.m = m;
  s.H0 = min_boundary_curvature(domain, opt.samples, opt.seed);
  if (!(s.H0 > 0))
    throw Error("mean convexity violated");
  s.collar_width = convex_collar_width(domain);

  // Sup norms over the collar of width min(width, 1)/2, by finite differences.
  const double depth = 0.5 * std::min(s.collar_width, 1.0);
  for (const auto& x : collar_samples(domain, depth, opt.samples, opt.seed + 1)) {
    s.a = std::max(s.a, std::abs(phi(x)));
    s.sup_Dphi = std::max(s.sup_Dphi, fd_gradient(phi, x).norm());
    s.sup_D2phi = std::max(s.sup_D2phi, fd_hessian(phi, x).cwiseAbs().maxCoeff());
    s.sup_D2d = std::max(s.sup_D2d, distance_derivatives(domain, x).hessian.cwiseAbs().maxCoeff());
  }
  std::mt19937_64 rng(opt.seed + 2);
  for (const auto& y : sample_boundary(domain, opt.samples, rng))
    s.a = std::max(s.a, std::abs(phi(y)));

  if (params.alpha < 1.0) {
    const double target = 0.1 * (n - 1) * s.H0;
    s.nu = 0.0;
    for (int j = -10; j <= 60; ++j)
      if (nu_positivity(std::ldexp(1.0, j), s.H0, s.sup_Dphi, params) >= target) {
        s.nu = std::ldexp(1.0, j);
        break;
      }
    if (s.nu == 0.0)
      throw Error("no admissible nu found");
  } else {
    s.nu = std::max(1.0, 2.0 / ((n - 1) * s.H0));
  }

  const double Dp2 = s.sup_Dphi * s.sup_Dphi;
  s.c1 = 2.0 * n * n * ((1.0 + 2.0 * Dp2) / s.nu + 2.0) * s.sup_D2phi;
  s.c2 = s.sup_D2d * (n * n * Dp2 / s.nu + 2.0 * n * s.sup_Dphi);
  s.c3 = std::max(s.c1 + s.c2, 1e-6);
  s.d1 = 0.5 * std::min({1.0 / (s.nu * s.c3), s.collar_width, 1.0});
  s.k = std::expm1(s.c3 * (s.a + s.m)) / s.d1 + s.nu * s.c3 / (1.0 - s.nu * s.c3 * s.d1);
  return s;
}

struct PsiValue {
  double psi;
  double dpsi;
  double d2psi;
};

/// psi(d) = ln(1 + k d) / c3.
inline PsiValue psi_eval(const BarrierSpec& s, double dval)
{
  if (!(dval >= 0) || !(dval <= s.d1))
    throw Error("distance outside [0, d1]");
  const double q = 1.0 + s.k * dval;
  return {std::log1p(s.k * dval) / s.c3, s.k / (s.c3 * q), -s.k * s.k / (s.c3 * q * q)};
}

struct BarrierReport {
  double max_upper; // max Q w+
  double max_lower; // max -Q w-
  double max_pm_residual;
  bool pass;
};

/// Evaluates +Q(phi + psi(d)) and -Q(phi - psi(d)) at collar samples.
inline BarrierReport barrier_verify(const BarrierSpec& s, const DomainSpec& domain, const ScalarFunction& phi,
                                    const OperatorParams& params, const std::vector<Point>& samples)
{
  BarrierReport rep{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(), 0, false};
  for (const auto& x : samples) {
    const double dist = signed_distance(domain, x);
    if (!(dist > 0) || !(dist < s.d1))
      throw Error("barrier sample outside the collar");
    const PsiValue ps = psi_eval(s, dist);
    const DistanceDerivatives dd = distance_derivatives(domain, x);
    const Eigen::VectorXd Dphi = fd_gradient(phi, x);
    const Eigen::MatrixXd D2phi = fd_hessian(phi, x);
    const Eigen::MatrixXd D2psi = ps.d2psi * dd.gradient * dd.gradient.transpose() + ps.dpsi * dd.hessian;
    for (int sign : {1, -1}) {
      const Eigen::VectorXd p = Dphi + sign * ps.dpsi * dd.gradient;
      const Eigen::MatrixXd H = D2phi + sign * D2psi;
      const Coefficients c = coeff_a_b(p, params);
      const double Q = (c.a.cwiseProduct(H)).sum() + c.b;
      if (sign > 0)
        rep.max_upper = std::max(rep.max_upper, Q);
      else
        rep.max_lower = std::max(rep.max_lower, -Q);
    }
  }
  rep.max_pm_residual = std::max(rep.max_upper, rep.max_lower);
  rep.pass = rep.max_pm_residual < 0.0;
  return rep;
}

/// sup |Du| on the boundary is at most sup |Dphi| + k / c3.
inline double gradient_bound(const BarrierSpec& s) { return s.sup_Dphi + s.k / s.c3; }

} // namespace hkflow

#endif
