#ifndef HKFLOW_SPECIAL_FUNCTIONS_HPP
#define HKFLOW_SPECIAL_FUNCTIONS_HPP

#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "operator.hpp"

namespace hkflow {

/// Phi(rho) = rho^-2 on (0,1), n-1 on [1, inf).
inline double phi_cap(double rho, int n)
{
  if (!(rho > 0))
    throw Error("phi_cap requires rho > 0");
  return rho < 1.0 ? 1.0 / (rho * rho) : static_cast<double>(n - 1);
}

/// Breakpoint 1/(2(n-1)) where the two branches of xi and eta meet.
inline double xi_break(int n) { return 0.5 / (n - 1); }

/// xi(t) = int_t^inf d rho / (rho^3 Phi(rho)).
inline double xi(double t, int n)
{
  if (!(t > 0))
    throw Error("xi requires t > 0");
  if (t >= 1.0)
    return xi_break(n) / (t * t);
  return -std::log(t) + xi_break(n);
}

/// Inverse of xi.
inline double eta(double beta, int n)
{
  if (!(beta > 0))
    throw Error("eta requires beta > 0");
  if (beta < xi_break(n))
    return 1.0 / std::sqrt(2.0 * (n - 1) * beta);
  return std::exp(-beta + xi_break(n));
}

enum class ProfileCase { cylinder, cone };

struct AuxProfile {
  int n = 2;
  double alpha = 1.0;
  double mu = 0.5;
  double L = 1.0;
  double Hstar = 2.0;
  double d = 0.0;
  double tau = 0.0;
};

/// t^-3 (1+t^2)^((3-alpha)/2).  Strictly decreasing in t for alpha > 0, so its supremum
/// over [H, inf) is its value at H.
inline double profile_tail_term(double t, double alpha)
{
  return std::pow(1.0 + t * t, 0.5 * (3.0 - alpha)) / (t * t * t);
}

inline void validate_profile_inputs(int n, double alpha, double mu, double L)
{
  OperatorParams{n, alpha}.validate();
  if (!(mu > 0) || !(mu < 1))
    throw Error("mu must lie in (0, 1)");
  if (!(L > 0))
    throw Error("L must be positive");
}

/// Profile with a prescribed H*; d defaults to xi(H*)/mu.
inline AuxProfile make_profile(int n, double alpha, double mu, double L, double Hstar, double d = -1.0)
{
  validate_profile_inputs(n, alpha, mu, L);
  if (!(Hstar > 1))
    throw Error("H* must exceed 1");
  const double dmax = xi(Hstar, n) / mu;
  if (d < 0)
    d = dmax;
  if (!(d > 0) || d > dmax * (1 + 1e-14))
    throw Error("d must lie in (0, xi(H*)/mu]");
  return AuxProfile{n, alpha, mu, L, Hstar, d, L * std::exp(d)};
}

/// Feasibility of H* for the shell (L, L e^d): sup_{t>=H*} tail <= (n-1)(1-mu)/(L e^d).
inline bool profile_feasible(const AuxProfile& p)
{
  return profile_tail_term(p.Hstar, p.alpha) <= (p.n - 1) * (1.0 - p.mu) / (p.L * std::exp(p.d));
}

/// Smallest H* in {2, 3, ..., 10^6} satisfying the tail inequality.  For cones d is capped
/// at ln(1/sin theta)/2 so that 1 - e^d sin theta > 0.
inline AuxProfile build_profile(int n, double alpha, double mu, double L, ProfileCase kind = ProfileCase::cylinder,
                                double theta = 0.0)
{
  validate_profile_inputs(n, alpha, mu, L);
  double dcap = std::numeric_limits<double>::infinity();
  if (kind == ProfileCase::cone) {
    if (!(theta > 0) || !(theta < std::numbers::pi / 2))
      throw Error("cone angle must lie in (0, pi/2)");
    dcap = 0.5 * std::log(1.0 / std::sin(theta));
  }
  for (int H = 2; H <= 1'000'000; ++H) {
    const AuxProfile p = make_profile(n, alpha, mu, L, H, std::min(xi(H, n) / mu, dcap));
    if (profile_feasible(p))
      return p;
  }
  throw Error("profile infeasible for given (n, alpha, mu, L)");
}

struct ProfileValue {
  double h;
  double dh;
  double d2h;
};

namespace detail {

/// int_{b0}^{b1} eta(beta) e^{beta/mu} d beta, with beta = sigma^2 on the singular branch.
inline double weighted_eta_integral(double b0, double b1, int n, double mu)
{
  using boost::math::quadrature::gauss_kronrod;
  const double bc = xi_break(n);
  double total = 0.0;
  if (b0 < bc) {
    const double top = std::min(b1, bc);
    const double c = 2.0 / std::sqrt(2.0 * (n - 1));
    auto f = [&](double s) { return c * std::exp(s * s / mu); };
    total += gauss_kronrod<double, 31>::integrate(f, std::sqrt(b0), std::sqrt(top), 10, 1e-12);
  }
  if (b1 > bc) {
    const double bottom = std::max(b0, bc);
    auto f = [&](double b) { return std::exp(-b + bc + b / mu); };
    total += gauss_kronrod<double, 31>::integrate(f, bottom, b1, 10, 1e-12);
  }
  return total;
}

inline double check_profile_radius(const AuxProfile& p, double r)
{
  const double slack = 1e-12 * p.tau;
  if (!(r >= p.L - slack) || !(r <= p.tau + slack))
    throw Error("radius outside the profile interval [L, tau]");
  return std::clamp(r, p.L, p.tau);
}

/// h' = -eta(mu ln(r/L)) and h'' from h''/(h')^3 = -(mu/r) Phi(-h').
inline ProfileValue profile_slopes(const AuxProfile& p, double r)
{
  const double beta = p.mu * std::log(r / p.L);
  if (beta <= 0.0) {
    const double inf = std::numeric_limits<double>::infinity();
    return {0.0, -inf, inf};
  }
  const double dh = -eta(beta, p.n);
  return {0.0, dh, dh * dh * dh * (-p.mu / r) * phi_cap(-dh, p.n)};
}

} // namespace detail

/// h(r) = int_r^tau eta(mu ln(t/L)) dt with its first two derivatives.  At r = L the
/// slope is reported as -infinity.
inline ProfileValue h_eval(const AuxProfile& p, double r)
{
  r = detail::check_profile_radius(p, r);
  ProfileValue v = detail::profile_slopes(p, r);
  const double beta = p.mu * std::log(r / p.L);
  v.h = (p.L / p.mu) * detail::weighted_eta_integral(std::max(beta, 0.0), p.mu * p.d, p.n, p.mu);
  return v;
}

/// Profile scaled to radius L: h_L(r) = L h_1(r / L) when (mu, d) are shared.
inline ProfileValue h_eval_scaled(const AuxProfile& unit, double L, double r)
{
  const ProfileValue v = h_eval(unit, r / L * unit.L);
  const double s = L / unit.L;
  return {s * v.h, v.dh, v.d2h / s};
}

/// w(x) = h(|x - center|) on the closed shell L <= |x - center| <= tau.
inline double supersolution_w(const AuxProfile& p, const Point& center, const Point& x)
{
  const double r = (x - center).norm();
  const double slack = 1e-12 * p.tau;
  if (r < p.L - slack || r > p.tau + slack)
    throw Error("point outside the profile shell");
  return h_eval(p, r).h;
}

/// Q w for the radial function w = h(r): h'' + (n-1)(1+h'^2)h'/r + (1+h'^2)^((3-alpha)/2).
inline double radial_Q(const AuxProfile& p, double r)
{
  const ProfileValue v = detail::profile_slopes(p, detail::check_profile_radius(p, r));
  const double q = 1.0 + v.dh * v.dh;
  return v.d2h + (p.n - 1) * q * v.dh / r + std::pow(q, 0.5 * (3.0 - p.alpha));
}

struct SupersolutionReport {
  double max_residual;
  double argmax_radius;
  bool pass;
};

inline SupersolutionReport verify_supersolution_radii(const AuxProfile& p, const std::vector<double>& radii)
{
  SupersolutionReport rep{-std::numeric_limits<double>::infinity(), 0.0, false};
  for (double r : radii) {
    if (!(r > p.L) || !(r < p.tau))
      throw Error("supersolution samples must lie strictly inside the shell");
    const double q = radial_Q(p, r);
    if (q > rep.max_residual) {
      rep.max_residual = q;
      rep.argmax_radius = r;
    }
  }
  rep.pass = rep.max_residual <= 0.0;
  return rep;
}

inline SupersolutionReport verify_supersolution(const AuxProfile& p, const Point& center, const std::vector<Point>& samples,
                                                const OperatorParams& params)
{
  if (params.n != p.n || params.alpha != p.alpha)
    throw Error("operator parameters do not match the profile");
  std::vector<double> radii;
  radii.reserve(samples.size());
  for (const auto& x : samples)
    radii.push_back((x - center).norm());
  return verify_supersolution_radii(p, radii);
}

/// Evenly spaced radii strictly inside (L, tau).
inline std::vector<double> shell_radii(const AuxProfile& p, int count)
{
  std::vector<double> r(count);
  for (int i = 0; i < count; ++i)
    r[i] = p.L + (p.tau - p.L) * (i + 1.0) / (count + 1.0);
  return r;
}

/// int_0^inf eta(beta) d beta.
inline double eta_integral(int n)
{
  using boost::math::quadrature::gauss_kronrod;
  const double bc = xi_break(n);
  const double c = 2.0 / std::sqrt(2.0 * (n - 1));
  const double head = gauss_kronrod<double, 31>::integrate([&](double s) { return c + 0.0 * s; }, 0.0, std::sqrt(bc), 10, 1e-12);
  const double tail = gauss_kronrod<double, 31>::integrate([&](double b) { return eta(b, n); }, bc,
                                                           std::numeric_limits<double>::infinity(), 10, 1e-12);
  return head + tail;
}

} // namespace hkflow

#endif
