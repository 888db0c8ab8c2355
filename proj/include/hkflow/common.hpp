#ifndef HKFLOW_COMMON_HPP
#define HKFLOW_COMMON_HPP

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace hkflow {

using Point = Eigen::VectorXd;
using ScalarFunction = std::function<double(const Point&)>;

/// All recoverable failures in the library are reported through this type.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline Point make_point(std::initializer_list<double> coords)
{
  Point p(static_cast<Eigen::Index>(coords.size()));
  Eigen::Index i = 0;
  for (double c : coords)
    p(i++) = c;
  return p;
}

/// Volume of the unit ball in R^n.
inline double unit_ball_volume(int n)
{
  return std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

/// Euclidean norm of the components 2..n (the distance to the x1 axis).
inline double radial_part(const Point& x)
{
  return x.tail(x.size() - 1).norm();
}

} // namespace hkflow

#endif
