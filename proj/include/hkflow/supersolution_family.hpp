#ifndef HKFLOW_SUPERSOLUTION_FAMILY_HPP
#define HKFLOW_SUPERSOLUTION_FAMILY_HPP

#include <functional>
#include <limits>
#include <vector>

#include "covering.hpp"
#include "special_functions.hpp"

namespace hkflow {

/// Members w_k(x) = h_k(|x - x_k|) + offset_k + s_k on the covering shells.
struct SupersolutionFamily {
  CoveringSeq covering;
  std::vector<AuxProfile> profiles; // one per member
  std::vector<double> offsets;      // (k-1) h(M) or sum_{j<k} B_j
  std::vector<double> boundary_sup; // s_k

  int size() const { return covering.size(); }

  double evaluate(int k, const Point& x) const
  {
    if (!member_contains(covering, k, x))
      throw Error("point outside covering member " + std::to_string(k));
    const double r = (x - covering.center(k)).norm();
    return h_eval(profiles[k - 1], r).h + offsets[k - 1] + boundary_sup[k - 1];
  }

  bool covers(const Point& x) const { return first_member_containing(covering, x) != 0; }

  /// min_k w_k(x) over the members containing x.
  double cap(const Point& x) const
  {
    double best = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= size(); ++k)
      if (member_contains(covering, k, x))
        best = std::min(best, evaluate(k, x));
    if (!std::isfinite(best))
      throw Error("extend covering: point outside every member");
    return best;
  }
};

/// phi_sup(t) = sup{|phi(x)| : x on the boundary, x1 <= t}.
using BoundarySup = std::function<double(double)>;

/// Members built from per-member profiles whose inner radii match the covering.
inline SupersolutionFamily family_build(const CoveringSeq& cov, const BoundarySup& phi_sup, const std::vector<AuxProfile>& profiles)
{
  if (static_cast<int>(profiles.size()) != cov.size())
    throw Error("one profile per covering member is required");
  SupersolutionFamily f{cov, profiles, {}, {}};
  double acc = 0.0;
  for (int k = 1; k <= cov.size(); ++k) {
    const AuxProfile& p = profiles[k - 1];
    if (std::abs(p.L - cov.inner_radius(k)) > 1e-12 * p.L || std::abs(p.d - cov.d) > 1e-12 * cov.d)
      throw Error("profile shell does not match covering member " + std::to_string(k));
    f.offsets.push_back(acc);
    acc += h_eval(p, p.L).h;
    f.boundary_sup.push_back(phi_sup(cov.center_x1(k)));
  }
  return f;
}

/// Cylinder family: shared profile with L = M and d = xi(H*)/mu.
inline SupersolutionFamily family_build_cylinder(double N, double M, int K, const OperatorParams& params, double mu,
                                                 const BoundarySup& phi_sup, double eps = 0.9)
{
  const AuxProfile p = build_profile(params.n, params.alpha, mu, M, ProfileCase::cylinder);
  const CoveringSeq cov = covering_build_cylinder(N, M, p.d, K, params.n, eps);
  return family_build(cov, phi_sup, std::vector<AuxProfile>(K, p));
}

struct ConeParameters {
  double Hstar;
  double d;
  CoveringSeq covering;
};

/// Common (H*, d) for K cone members: d starts at ln(1/sin theta)/2 and shrinks by 5% until the
/// smallest feasible H* for the largest member L_K still admits d <= xi(H*)/mu. delta0 is the
/// geometric midpoint of the hand-off floor and the ratio bound.
inline ConeParameters select_cone_parameters(const OperatorParams& params, double mu, double theta, double b1, int K)
{
  params.validate();
  const double floor = cone_handoff_min_ratio(theta);
  double d = 0.5 * std::log(1.0 / std::sin(theta));
  for (int attempt = 0; attempt < 400; ++attempt, d *= 0.95) {
    // Smaller d only shrinks the ratio bound, so stop once it drops below the hand-off floor.
    const double ratio_bound = cone_delta_bound(theta, d);
    if (!(ratio_bound > floor))
      break;
    const double delta0 = std::sqrt(floor * ratio_bound);
    const CoveringSeq cov = covering_build_cone_with_ratio(b1, theta, d, delta0, K, params.n);
    const double LK = cov.inner_radius(K);
    const double bound = (params.n - 1) * (1.0 - mu) / (LK * std::exp(d));
    for (int H = 2; H <= 1'000'000; ++H) {
      if (profile_tail_term(H, params.alpha) > bound)
        continue;
      if (xi(H, params.n) / mu >= d)
        return {static_cast<double>(H), d, cov};
      break;
    }
  }
  throw Error("no common cone profile parameters found");
}

inline SupersolutionFamily family_build_cone(double theta, double b1, int K, const OperatorParams& params, double mu,
                                             const BoundarySup& phi_sup)
{
  const ConeParameters cp = select_cone_parameters(params, mu, theta, b1, K);
  std::vector<AuxProfile> profiles;
  for (int k = 1; k <= K; ++k)
    profiles.push_back(make_profile(params.n, params.alpha, mu, cp.covering.inner_radius(k), cp.Hstar, cp.d));
  return family_build(cp.covering, phi_sup, profiles);
}

} // namespace hkflow

#endif
