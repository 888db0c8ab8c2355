#ifndef HKFLOW_COVERING_HPP
#define HKFLOW_COVERING_HPP

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <random>
#include <vector>

#include "domain.hpp"

namespace hkflow {

enum class CoveringCase { cylinder, cone };

/// Shells A(x_k) along the x1 axis: centre (c_k, 0, ..., 0), radii (r_k, r_k e^d), cut x1 < c_k,
/// intersected with the container C_N(M) or C(theta).
struct CoveringSeq {
  CoveringCase kind = CoveringCase::cylinder;
  int n = 2;
  double d = 0.0;
  // cylinder
  double N = 0.0;
  double M = 1.0;
  double eps = 0.9;
  // cone
  double theta = 0.0;
  double b1 = 0.0;
  double delta0 = 0.0;
  std::vector<double> centers; // a_k or b_k

  int size() const { return static_cast<int>(centers.size()); }

  double center_x1(int k) const { return centers.at(k - 1); }

  Point center(int k) const
  {
    Point c = Point::Zero(n);
    c(0) = center_x1(k);
    return c;
  }

  double inner_radius(int k) const { return kind == CoveringCase::cylinder ? M : center_x1(k) * std::sin(theta); }
  double outer_radius(int k) const { return inner_radius(k) * std::exp(d); }

  DomainSpec container() const
  {
    return kind == CoveringCase::cylinder ? DomainSpec::cylinder(N, M, n) : DomainSpec::cone(theta, n);
  }
};

inline CoveringSeq covering_build_cylinder(double N, double M, double d, int K, int n = 2, double eps = 0.9)
{
  if (!(M > 0))
    throw Error("cylinder radius M must be positive");
  if (!(d > 0))
    throw Error("shell exponent d must be positive");
  if (!(eps > 0) || !(eps < 1))
    throw Error("eps must lie in (0, 1)");
  if (K < 1)
    throw Error("covering needs at least one member");
  CoveringSeq s;
  s.kind = CoveringCase::cylinder;
  s.n = n;
  s.d = d;
  s.N = N;
  s.M = M;
  s.eps = eps;
  const double step = eps * M * std::expm1(d);
  for (int k = 1; k <= K; ++k)
    s.centers.push_back(N + (k - 1) * step);
  return s;
}

/// Upper end (1 - sin theta)/(1 - e^d sin theta) of the admissible ratio interval.
inline double cone_delta_bound(double theta, double d)
{
  const double s = std::sin(theta);
  const double gap = 1.0 - std::exp(d) * s;
  if (!(gap > 0))
    throw Error("shell too thick for cone angle");
  return (1.0 - s) / gap;
}

/// Smallest delta0 for which S_k and S_{k+1} do not meet on {x1 < b_k}: (1 + sin^2 t)/cos^2 t.
/// Below it part of S_k lies inside the inner ball of member k+1.
inline double cone_handoff_min_ratio(double theta)
{
  const double c = std::cos(theta);
  return 2.0 / (c * c) - 1.0;
}

/// Cone covering with an explicit ratio delta0; only delta0 > 1 is enforced.
inline CoveringSeq covering_build_cone_with_ratio(double b1, double theta, double d, double delta0, int K, int n = 2)
{
  if (!(theta > 0) || !(theta < std::numbers::pi / 2))
    throw Error("cone angle must lie in (0, pi/2)");
  if (!(b1 > 0) || !(d > 0))
    throw Error("b1 and d must be positive");
  if (!(delta0 > 1))
    throw Error("delta0 must exceed 1");
  if (K < 1)
    throw Error("covering needs at least one member");
  CoveringSeq s;
  s.kind = CoveringCase::cone;
  s.n = n;
  s.d = d;
  s.theta = theta;
  s.b1 = b1;
  s.delta0 = delta0;
  for (int k = 1; k <= K; ++k)
    s.centers.push_back(b1 * std::pow(delta0, k - 1));
  return s;
}

/// delta0 = sqrt of the admissible upper bound.
inline CoveringSeq covering_build_cone(double b1, double theta, double d, int K, int n = 2)
{
  const double bound = cone_delta_bound(theta, d);
  return covering_build_cone_with_ratio(b1, theta, d, std::sqrt(bound), K, n);
}

/// x in A(x_k) (cylinder) or the cone shell (cone), k is 1-based.
inline bool member_contains(const CoveringSeq& s, int k, const Point& x)
{
  if (k < 1 || k > s.size())
    throw Error("covering member index out of range");
  if (!contains(s.container(), x))
    return false;
  const double r = (x - s.center(k)).norm();
  return r > s.inner_radius(k) && r < s.outer_radius(k) && x(0) < s.center_x1(k);
}

inline int first_member_containing(const CoveringSeq& s, const Point& x)
{
  for (int k = 1; k <= s.size(); ++k)
    if (member_contains(s, k, x))
      return k;
  return 0;
}

/// Largest x1 up to which the members cover the container.
inline double covered_x1_limit(const CoveringSeq& s)
{
  if (s.kind == CoveringCase::cylinder)
    return s.centers.back() - s.M * std::exp(s.d);
  // Members beyond K only reach points with x1 < b_{K+1}(1 - e^d sin theta).
  return s.centers.back() * (1.0 - std::exp(s.d) * std::sin(s.theta));
}

struct CoveringReport {
  long coverage_samples = 0;
  long coverage_violations = 0;
  long handoff_samples = 0;
  long handoff_violations = 0;
  bool pass() const { return coverage_violations == 0 && handoff_violations == 0; }
};

/// Sampled checks of union coverage and of the hand-off containments between neighbours.
inline CoveringReport covering_verify(const CoveringSeq& s, long samples, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const int n = s.n;
  CoveringReport rep;
  const double x1_hi = covered_x1_limit(s);

  // Union coverage.
  if (s.kind == CoveringCase::cylinder) {
    if (x1_hi > s.N)
      for (long i = 0; i < samples; ++i) {
        Point x(n);
        x(0) = s.N + U(rng) * (x1_hi - s.N);
        x.tail(n - 1) = random_in_ball(n - 1, s.M, rng);
        if (!contains(s.container(), x))
          continue;
        ++rep.coverage_samples;
        if (first_member_containing(s, x) == 0)
          ++rep.coverage_violations;
      }
  } else if (x1_hi > s.b1) {
    const double t = std::tan(s.theta);
    for (long i = 0; i < samples; ++i) {
      Point x(n);
      x(0) = s.b1 * std::exp(U(rng) * std::log(x1_hi / s.b1));
      x.tail(n - 1) = random_in_ball(n - 1, x(0) * t, rng);
      if (!contains(s.container(), x))
        continue;
      ++rep.coverage_samples;
      if (first_member_containing(s, x) == 0)
        ++rep.coverage_violations;
    }
  }

  // Hand-off: cylinder outer sphere of k+1 inside A(x_k); cone inner sphere S_k inside member k+1.
  const int K = s.size();
  if (K >= 2) {
    const long per = std::max<long>(1, samples / (K - 1));
    for (int k = 1; k < K; ++k)
      for (long i = 0; i < per; ++i) {
        if (s.kind == CoveringCase::cylinder) {
          const Point xp = random_in_ball(n - 1, s.M, rng);
          const double R = s.outer_radius(k + 1);
          Point x(n);
          x(0) = s.center_x1(k + 1) - std::sqrt(R * R - xp.squaredNorm());
          x.tail(n - 1) = xp;
          if (!contains(s.container(), x))
            continue;
          ++rep.handoff_samples;
          if (!member_contains(s, k, x))
            ++rep.handoff_violations;
        } else {
          const double R = s.inner_radius(k);
          const Point xp = random_in_ball(n - 1, R, rng);
          Point x(n);
          x(0) = s.center_x1(k) - std::sqrt(std::max(0.0, R * R - xp.squaredNorm()));
          x.tail(n - 1) = xp;
          if (!contains(s.container(), x))
            continue;
          ++rep.handoff_samples;
          if (!member_contains(s, k + 1, x))
            ++rep.handoff_violations;
        }
      }
  }
  return rep;
}

/// x1 of the intersection of the spheres |x - c1 e1| = r1 and |x - c2 e1| = r2.
inline double sphere_intersection_x1(double c1, double r1, double c2, double r2)
{
  if (c1 == c2)
    throw Error("concentric spheres have no unique intersection plane");
  return (r1 * r1 - r2 * r2 + c2 * c2 - c1 * c1) / (2.0 * (c2 - c1));
}

/// Closed form of the x1 coordinate of S_k intersect T_{k+1} (inner sphere of member k,
/// outer sphere of member k+1): b_k/2 [1 + delta0 - sin^2(theta)(delta0^2 e^{2d} - 1)/(delta0 - 1)].
inline double cone_handoff_intersection_x1(double bk, double theta, double d, double delta0)
{
  const double s2 = std::sin(theta) * std::sin(theta);
  return 0.5 * bk * (1.0 + delta0 - s2 * (delta0 * delta0 * std::exp(2 * d) - 1.0) / (delta0 - 1.0));
}

/// rhs - lhs of (1 - sin t)/(1 - sin t e^d) < 1/(1 - tan t sqrt(e^{2d} - 1)).
inline double cone_ratio_inequality_margin(double theta, double d)
{
  const double s = std::sin(theta);
  const double lhs = (1.0 - s) / (1.0 - s * std::exp(d));
  const double rhs = 1.0 / (1.0 - std::tan(theta) * std::sqrt(std::expm1(2 * d)));
  return rhs - lhs;
}

/// Distances from the vertex to S_k, T_{k+1}, S_{k+1}.
struct ConeDistances {
  double to_S_k;
  double to_T_next;
  double to_S_next;
};

inline ConeDistances cone_shell_distances(const CoveringSeq& s, int k)
{
  const double sn = std::sin(s.theta);
  const double bk = s.center_x1(k), bn = s.center_x1(k + 1);
  return {bk * (1 - sn), bn * (1 - std::exp(s.d) * sn), bn * (1 - sn)};
}

/// k, center x1, inner radius, outer radius, cap (largest x1 reached by the outer sphere).
inline void write_covering_csv(std::ostream& os, const CoveringSeq& s)
{
  os << "k,center,inner_radius,outer_radius,cap\n" << std::setprecision(17);
  for (int k = 1; k <= s.size(); ++k)
    os << k << ',' << s.center_x1(k) << ',' << s.inner_radius(k) << ',' << s.outer_radius(k) << ','
       << s.center_x1(k) + s.outer_radius(k) << '\n';
}

} // namespace hkflow

#endif
