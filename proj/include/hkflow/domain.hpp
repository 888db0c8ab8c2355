#ifndef HKFLOW_DOMAIN_HPP
#define HKFLOW_DOMAIN_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "common.hpp"

namespace hkflow {

class DomainSpec;

struct Ball {
  Point center;
  double radius;
};

struct Box {
  Point lo;
  Point hi;
};

struct Annulus {
  Point center;
  double r_in;
  double r_out;
};

/// C_N(M) = { x1 > N, |x'| < M }.
struct Cylinder {
  double N;
  double M;
};

/// C(theta) = { x1 > 0, |x'| < x1 tan(theta) }.
struct Cone {
  double theta;
};

/// Half-infinite tube of radius rho along +e1 with a spherical cap centred at cap_center.
struct RoundedStrip {
  double rho;
  Point cap_center;
};

/// Bounded piece of an unbounded domain, cut at x1 = x1_max.  Rounded strips are
/// closed with a spherical cap (a capsule); cylinders and cones with a flat face.
struct Truncation {
  std::shared_ptr<const DomainSpec> base;
  double x1_max;
};

class DomainSpec {
public:
  using Shape = std::variant<Ball, Box, Annulus, Cylinder, Cone, RoundedStrip, Truncation>;

  static DomainSpec ball(Point center, double radius)
  {
    if (!(radius > 0))
      throw Error("ball radius must be positive");
    const int n = static_cast<int>(center.size());
    return DomainSpec(Ball{std::move(center), radius}, n);
  }

  static DomainSpec box(Point lo, Point hi)
  {
    if (lo.size() != hi.size())
      throw Error("box corners have different dimensions");
    for (Eigen::Index i = 0; i < lo.size(); ++i)
      if (!(hi(i) > lo(i)))
        throw Error("box requires lo < hi in every coordinate");
    const int n = static_cast<int>(lo.size());
    return DomainSpec(Box{std::move(lo), std::move(hi)}, n);
  }

  static DomainSpec annulus(Point center, double r_in, double r_out)
  {
    if (!(r_in > 0) || !(r_out > r_in))
      throw Error("annulus radii must satisfy 0 < r_in < r_out");
    const int n = static_cast<int>(center.size());
    return DomainSpec(Annulus{std::move(center), r_in, r_out}, n);
  }

  static DomainSpec cylinder(double N, double M, int n)
  {
    if (!(M > 0))
      throw Error("cylinder radius M must be positive");
    return DomainSpec(Cylinder{N, M}, n);
  }

  static DomainSpec cone(double theta, int n)
  {
    if (!(theta > 0) || !(theta < std::numbers::pi / 2))
      throw Error("cone angle must lie in (0, pi/2)");
    return DomainSpec(Cone{theta}, n);
  }

  static DomainSpec rounded_strip(double rho, Point cap_center)
  {
    if (!(rho > 0))
      throw Error("rounded strip half-width must be positive");
    const int n = static_cast<int>(cap_center.size());
    return DomainSpec(RoundedStrip{rho, std::move(cap_center)}, n);
  }

  static DomainSpec truncation(const DomainSpec& base, double x1_max);

  int dim() const { return dim_; }
  const Shape& shape() const { return shape_; }

  template <class T>
  bool is() const
  {
    return std::holds_alternative<T>(shape_);
  }
  template <class T>
  const T& as() const
  {
    return std::get<T>(shape_);
  }

  std::string kind_name() const
  {
    static const char* names[] = {"ball", "box", "annulus", "cylinder", "cone", "rounded_strip", "truncation"};
    return names[shape_.index()];
  }

private:
  DomainSpec(Shape s, int n) : shape_(std::move(s)), dim_(n)
  {
    if (dim_ < 2)
      throw Error("domain dimension must be at least 2");
  }

  Shape shape_;
  int dim_;
};

namespace detail {

/// Distance from x to the segment {c + t e1 : 0 <= t <= len} (len may be +inf),
/// together with the nearest point and whether it lies strictly inside the segment.
struct AxisProjection {
  double distance;
  Point nearest;
  bool on_side; // true when the nearest point is not an endpoint
};

inline AxisProjection project_to_axis_segment(const Point& x, const Point& c, double len)
{
  const double t = std::clamp(x(0) - c(0), 0.0, len);
  Point q = c;
  q(0) += t;
  return {(x - q).norm(), q, t > 0.0 && t < len};
}

inline double capsule_length(const RoundedStrip& s, double x1_max)
{
  return std::max(0.0, x1_max - s.rho - s.cap_center(0));
}

} // namespace detail

inline double inlet_x1(const DomainSpec& d)
{
  if (d.is<Cylinder>())
    return d.as<Cylinder>().N;
  if (d.is<Cone>())
    return 0.0;
  if (d.is<RoundedStrip>()) {
    const auto& s = d.as<RoundedStrip>();
    return s.cap_center(0) - s.rho;
  }
  throw Error("inlet coordinate is only defined for cylinder, cone and rounded strip domains");
}

inline DomainSpec DomainSpec::truncation(const DomainSpec& base, double x1_max)
{
  if (!(base.is<Cylinder>() || base.is<Cone>() || base.is<RoundedStrip>()))
    throw Error("only cylinder, cone and rounded strip domains can be truncated");
  if (!(x1_max > inlet_x1(base)))
    throw Error("truncation x1_max must exceed the inlet coordinate of the base domain");
  return DomainSpec(Truncation{std::make_shared<const DomainSpec>(base), x1_max}, base.dim());
}

inline bool is_bounded(const DomainSpec& d)
{
  return !(d.is<Cylinder>() || d.is<Cone>() || d.is<RoundedStrip>());
}

/// Positive inside, negative outside, zero on the boundary.  Equals the distance to
/// the boundary for interior points; outside only the sign is meaningful.
inline double signed_distance(const DomainSpec& d, const Point& x)
{
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Ball>) {
          return s.radius - (x - s.center).norm();
        } else if constexpr (std::is_same_v<T, Box>) {
          return std::min((x - s.lo).minCoeff(), (s.hi - x).minCoeff());
        } else if constexpr (std::is_same_v<T, Annulus>) {
          const double r = (x - s.center).norm();
          return std::min(s.r_out - r, r - s.r_in);
        } else if constexpr (std::is_same_v<T, Cylinder>) {
          return std::min(x(0) - s.N, s.M - radial_part(x));
        } else if constexpr (std::is_same_v<T, Cone>) {
          return x(0) * std::sin(s.theta) - radial_part(x) * std::cos(s.theta);
        } else if constexpr (std::is_same_v<T, RoundedStrip>) {
          return s.rho - detail::project_to_axis_segment(x, s.cap_center, std::numeric_limits<double>::infinity()).distance;
        } else {
          const DomainSpec& base = *s.base;
          if (base.is<RoundedStrip>()) {
            const auto& rs = base.as<RoundedStrip>();
            return rs.rho - detail::project_to_axis_segment(x, rs.cap_center, detail::capsule_length(rs, s.x1_max)).distance;
          }
          return std::min(signed_distance(base, x), s.x1_max - x(0));
        }
      },
      d.shape());
}

inline bool contains(const DomainSpec& d, const Point& x)
{
  return signed_distance(d, x) > 0.0;
}

/// d(x) = dist(x, boundary) for x in the closure of the domain.
inline double boundary_distance(const DomainSpec& d, const Point& x)
{
  if (x.size() != d.dim())
    throw Error("point dimension does not match domain dimension");
  const double sd = signed_distance(d, x);
  if (sd < -1e-12)
    throw Error("point lies outside the domain");
  return std::max(sd, 0.0);
}

struct BoundingBox {
  Point lo;
  Point hi;
};

inline BoundingBox bounding_box(const DomainSpec& d)
{
  const int n = d.dim();
  return std::visit(
      [&](const auto& s) -> BoundingBox {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Ball>) {
          return {s.center.array() - s.radius, s.center.array() + s.radius};
        } else if constexpr (std::is_same_v<T, Box>) {
          return {s.lo, s.hi};
        } else if constexpr (std::is_same_v<T, Annulus>) {
          return {s.center.array() - s.r_out, s.center.array() + s.r_out};
        } else if constexpr (std::is_same_v<T, Truncation>) {
          const DomainSpec& base = *s.base;
          Point lo(n), hi(n);
          if (base.is<RoundedStrip>()) {
            const auto& rs = base.as<RoundedStrip>();
            lo = rs.cap_center.array() - rs.rho;
            hi = rs.cap_center.array() + rs.rho;
            hi(0) = std::max(s.x1_max, hi(0));
          } else if (base.is<Cylinder>()) {
            lo.setConstant(-base.as<Cylinder>().M);
            hi.setConstant(base.as<Cylinder>().M);
            lo(0) = base.as<Cylinder>().N;
            hi(0) = s.x1_max;
          } else {
            const double w = s.x1_max * std::tan(base.as<Cone>().theta);
            lo.setConstant(-w);
            hi.setConstant(w);
            lo(0) = 0.0;
            hi(0) = s.x1_max;
          }
          return {lo, hi};
        } else {
          throw Error("unbounded domain requires truncation");
        }
      },
      d.shape());
}

/// Cut the unbounded domain at schedule[j]; the schedule must be strictly increasing.
inline DomainSpec truncate(const DomainSpec& d, std::size_t j, std::span<const double> schedule)
{
  if (j >= schedule.size())
    throw Error("truncation index outside the schedule");
  for (std::size_t i = 1; i < schedule.size(); ++i)
    if (!(schedule[i] > schedule[i - 1]))
      throw Error("truncation schedule must be strictly increasing");
  return DomainSpec::truncation(d, schedule[j]);
}

/// Nearest point of the boundary, for shapes where it is available in closed form.
inline Point project_to_boundary(const DomainSpec& d, const Point& x)
{
  auto radial_push = [](const Point& c, const Point& x, double r) {
    Point v = x - c;
    double len = v.norm();
    if (len == 0.0) {
      v.setZero();
      v(0) = -1.0;
      len = 1.0;
    }
    return Point(c + v * (r / len));
  };
  auto sausage = [&](const RoundedStrip& s, double len) {
    const auto proj = detail::project_to_axis_segment(x, s.cap_center, len);
    if (proj.on_side) {
      Point v = x - proj.nearest;
      double r = v.norm();
      if (r == 0.0) {
        v.setZero();
        v(1) = 1.0;
        r = 1.0;
      }
      return Point(proj.nearest + v * (s.rho / r));
    }
    return radial_push(proj.nearest, x, s.rho);
  };
  if (d.is<Ball>())
    return radial_push(d.as<Ball>().center, x, d.as<Ball>().radius);
  if (d.is<Annulus>()) {
    const auto& a = d.as<Annulus>();
    const double r = (x - a.center).norm();
    return radial_push(a.center, x, (a.r_out - r < r - a.r_in) ? a.r_out : a.r_in);
  }
  if (d.is<RoundedStrip>())
    return sausage(d.as<RoundedStrip>(), std::numeric_limits<double>::infinity());
  if (d.is<Truncation>() && d.as<Truncation>().base->is<RoundedStrip>()) {
    const auto& t = d.as<Truncation>();
    const auto& rs = t.base->as<RoundedStrip>();
    return sausage(rs, detail::capsule_length(rs, t.x1_max));
  }
  if (d.is<Box>()) {
    const auto& b = d.as<Box>();
    Point y = x;
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index axis = 0;
    bool upper = false;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (x(i) - b.lo(i) < best) {
        best = x(i) - b.lo(i);
        axis = i;
        upper = false;
      }
      if (b.hi(i) - x(i) < best) {
        best = b.hi(i) - x(i);
        axis = i;
        upper = true;
      }
    }
    y(axis) = upper ? b.hi(axis) : b.lo(axis);
    return y;
  }
  throw Error("boundary projection unavailable for " + d.kind_name());
}

/// Mean of the principal curvatures of the boundary at y, with respect to the inner normal.
inline double boundary_mean_curvature(const DomainSpec& d, const Point& y)
{
  const int n = d.dim();
  const double tol = 1e-8;
  auto check_on_boundary = [&]() {
    if (std::abs(signed_distance(d, y)) > tol)
      throw Error("point is not on the boundary");
  };
  auto sausage = [&](const RoundedStrip& s, double len) {
    check_on_boundary();
    const auto proj = detail::project_to_axis_segment(y, s.cap_center, len);
    // Tube wall: n-2 principal curvatures 1/rho and one zero.
    if (proj.on_side)
      return (n - 2) / ((n - 1) * s.rho);
    return 1.0 / s.rho;
  };
  if (d.is<Ball>()) {
    check_on_boundary();
    return 1.0 / d.as<Ball>().radius;
  }
  if (d.is<Annulus>()) {
    check_on_boundary();
    const auto& a = d.as<Annulus>();
    const double r = (y - a.center).norm();
    return (std::abs(r - a.r_out) < std::abs(r - a.r_in)) ? 1.0 / a.r_out : -1.0 / a.r_in;
  }
  if (d.is<RoundedStrip>())
    return sausage(d.as<RoundedStrip>(), std::numeric_limits<double>::infinity());
  if (d.is<Truncation>() && d.as<Truncation>().base->is<RoundedStrip>()) {
    const auto& t = d.as<Truncation>();
    const auto& rs = t.base->as<RoundedStrip>();
    return sausage(rs, detail::capsule_length(rs, t.x1_max));
  }
  throw Error("curvature unavailable for " + d.kind_name());
}

/// Gradient and Hessian of the distance function d(x) at an interior point.
/// Closed form for balls, annuli and capsules; central differences otherwise.
struct DistanceDerivatives {
  Point gradient;
  Eigen::MatrixXd hessian;
};

inline DistanceDerivatives distance_derivatives(const DomainSpec& d, const Point& x)
{
  const int n = d.dim();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  auto sphere = [&](const Point& c, double sign) {
    const Point v = x - c;
    const double r = v.norm();
    const Point u = v / r;
    // sign = -1 for d = R - |x-c|, +1 for d = |x-c| - r_in.
    return DistanceDerivatives{sign * u, sign * (I - u * u.transpose()) / r};
  };
  auto sausage = [&](const RoundedStrip& s, double len) {
    const auto proj = detail::project_to_axis_segment(x, s.cap_center, len);
    if (!proj.on_side)
      return sphere(proj.nearest, -1.0);
    const Point v = x - proj.nearest;
    const double r = v.norm();
    const Point u = v / r;
    Eigen::MatrixXd P = I - u * u.transpose();
    P(0, 0) -= 1.0;
    return DistanceDerivatives{-u, -P / r};
  };
  if (d.is<Ball>())
    return sphere(d.as<Ball>().center, -1.0);
  if (d.is<Annulus>()) {
    const auto& a = d.as<Annulus>();
    const double r = (x - a.center).norm();
    return (a.r_out - r < r - a.r_in) ? sphere(a.center, -1.0) : sphere(a.center, 1.0);
  }
  if (d.is<RoundedStrip>())
    return sausage(d.as<RoundedStrip>(), std::numeric_limits<double>::infinity());
  if (d.is<Truncation>() && d.as<Truncation>().base->is<RoundedStrip>()) {
    const auto& t = d.as<Truncation>();
    const auto& rs = t.base->as<RoundedStrip>();
    return sausage(rs, detail::capsule_length(rs, t.x1_max));
  }
  const double eps = 1e-4;
  DistanceDerivatives out{Point::Zero(n), Eigen::MatrixXd::Zero(n, n)};
  const double f0 = signed_distance(d, x);
  for (int i = 0; i < n; ++i) {
    Point xp = x, xm = x;
    xp(i) += eps;
    xm(i) -= eps;
    const double fp = signed_distance(d, xp), fm = signed_distance(d, xm);
    out.gradient(i) = (fp - fm) / (2 * eps);
    out.hessian(i, i) = (fp - 2 * f0 + fm) / (eps * eps);
    for (int j = 0; j < i; ++j) {
      Point pp = x, pm = x, mp = x, mm = x;
      pp(i) += eps, pp(j) += eps;
      pm(i) += eps, pm(j) -= eps;
      mp(i) -= eps, mp(j) += eps;
      mm(i) -= eps, mm(j) -= eps;
      const double v = (signed_distance(d, pp) - signed_distance(d, pm) - signed_distance(d, mp) + signed_distance(d, mm)) /
                       (4 * eps * eps);
      out.hessian(i, j) = out.hessian(j, i) = v;
    }
  }
  return out;
}

inline Point random_direction(int n, std::mt19937_64& rng)
{
  std::normal_distribution<double> g(0.0, 1.0);
  Point v(n);
  do {
    for (int i = 0; i < n; ++i)
      v(i) = g(rng);
  } while (v.norm() < 1e-12);
  return v / v.norm();
}

/// Uniform point in the ball of radius r centred at the origin of R^m.
inline Point random_in_ball(int m, double r, std::mt19937_64& rng)
{
  std::uniform_real_distribution<double> U(0.0, 1.0);
  return random_direction(m, rng) * (r * std::pow(U(rng), 1.0 / m));
}

/// Random boundary points.  For unbounded strips the sample stops at x1 <= x1_limit.
inline std::vector<Point> sample_boundary(const DomainSpec& d, std::size_t count, std::mt19937_64& rng,
                                          double x1_limit = std::numeric_limits<double>::infinity())
{
  const int n = d.dim();
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<Point> out;
  out.reserve(count);
  auto sausage = [&](const RoundedStrip& s, double len, bool closed_end) {
    len = std::min(len, std::max(0.0, x1_limit - s.cap_center(0)));
    const double sphere_area = n * unit_ball_volume(n) * std::pow(s.rho, n - 1);
    const double wall_area = len * (n - 1) * unit_ball_volume(n - 1) * std::pow(s.rho, n - 2);
    const double caps = closed_end ? sphere_area : 0.5 * sphere_area;
    while (out.size() < count) {
      if (U(rng) * (caps + wall_area) < caps) {
        Point v = random_direction(n, rng);
        Point c = s.cap_center;
        if (v(0) > 0) {
          if (!closed_end)
            v(0) = -v(0);
          else
            c(0) += len;
        }
        out.push_back(c + s.rho * v);
      } else {
        Point y = s.cap_center;
        y(0) += U(rng) * len;
        Point w = random_direction(n - 1, rng);
        y.tail(n - 1) += s.rho * w;
        out.push_back(y);
      }
    }
  };
  if (d.is<Ball>()) {
    const auto& b = d.as<Ball>();
    while (out.size() < count)
      out.push_back(b.center + b.radius * random_direction(n, rng));
  } else if (d.is<Annulus>()) {
    const auto& a = d.as<Annulus>();
    const double w_out = std::pow(a.r_out, n - 1), w_in = std::pow(a.r_in, n - 1);
    while (out.size() < count) {
      const double r = (U(rng) * (w_out + w_in) < w_out) ? a.r_out : a.r_in;
      out.push_back(a.center + r * random_direction(n, rng));
    }
  } else if (d.is<Box>()) {
    const auto& b = d.as<Box>();
    while (out.size() < count) {
      Point y(n);
      for (int i = 0; i < n; ++i)
        y(i) = b.lo(i) + U(rng) * (b.hi(i) - b.lo(i));
      const int axis = static_cast<int>(U(rng) * n) % n;
      y(axis) = (U(rng) < 0.5) ? b.lo(axis) : b.hi(axis);
      out.push_back(y);
    }
  } else if (d.is<RoundedStrip>()) {
    if (!std::isfinite(x1_limit))
      throw Error("sampling an unbounded boundary needs a finite x1 limit");
    sausage(d.as<RoundedStrip>(), std::numeric_limits<double>::infinity(), false);
  } else if (d.is<Truncation>() && d.as<Truncation>().base->is<RoundedStrip>()) {
    const auto& t = d.as<Truncation>();
    const auto& rs = t.base->as<RoundedStrip>();
    sausage(rs, detail::capsule_length(rs, t.x1_max), std::isinf(x1_limit) || x1_limit >= t.x1_max);
  } else {
    throw Error("boundary sampling unavailable for " + d.kind_name());
  }
  return out;
}

/// Monte Carlo estimate of the volume of a bounded domain.
inline double estimate_volume(const DomainSpec& d, std::size_t samples, std::uint64_t seed)
{
  const BoundingBox bb = bounding_box(d);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const int n = d.dim();
  std::size_t hits = 0;
  Point x(n);
  for (std::size_t s = 0; s < samples; ++s) {
    for (int i = 0; i < n; ++i)
      x(i) = bb.lo(i) + U(rng) * (bb.hi(i) - bb.lo(i));
    if (contains(d, x))
      ++hits;
  }
  return (bb.hi - bb.lo).prod() * static_cast<double>(hits) / static_cast<double>(samples);
}

/// |Omega| < n^n alpha_n, the sufficient volume condition for bounded solvability.
struct VolumeCheck {
  double volume;
  double limit;
  bool satisfied;
};

inline VolumeCheck check_volume_condition(const DomainSpec& d, std::size_t samples = 100000, std::uint64_t seed = 1)
{
  const int n = d.dim();
  const double limit = std::pow(static_cast<double>(n), n) * unit_ball_volume(n);
  const double vol = estimate_volume(d, samples, seed);
  return {vol, limit, vol < limit};
}

} // namespace hkflow

#endif
