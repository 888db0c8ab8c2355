#ifndef HKFLOW_PERRON_HPP
#define HKFLOW_PERRON_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "solver.hpp"
#include "supersolution_family.hpp"

namespace hkflow {

/// Nodes of the grid strictly inside the subdomain O.
inline std::vector<char> nodes_inside(const Grid& g, const DomainSpec& O)
{
  std::vector<char> mask(g.num_nodes(), 0);
  for (int k = 0; k < g.num_nodes(); ++k)
    mask[k] = contains(O, g.position(k)) ? 1 : 0;
  return mask;
}

/// M_O(v): v outside O, and inside O the translator solution whose data are the values of v
/// at the surrounding degrees of freedom.
inline ScalarField lift(const ScalarField& v, const DomainSpec& O, const OperatorParams& params, const SolveOptions& base = {})
{
  const std::vector<char> mask = nodes_inside(*v.grid, O);
  ScalarField z = v;
  if (std::none_of(mask.begin(), mask.end(), [](char c) { return c != 0; }))
    return z;
  SolveOptions opt = base;
  opt.harmonic_start = false;
  opt.check_volume = false;
  solve_fixed(z, mask, params, Mode::translator, opt);
  return z;
}

struct LiftSchedule {
  std::vector<DomainSpec> sets;
  int max_sweeps = 200;
};

/// Balls of radius 0.9 s centred on the lattice s Z^n, kept when they contain a grid node.
inline LiftSchedule ball_schedule(const Grid& g, double s)
{
  if (!(s > 0))
    throw Error("schedule spacing must be positive");
  const BoundingBox bb = bounding_box(g.domain());
  const int n = g.dim();
  std::vector<int> lo(n), cnt(n);
  long total = 1;
  for (int i = 0; i < n; ++i) {
    lo[i] = static_cast<int>(std::floor(bb.lo(i) / s));
    cnt[i] = static_cast<int>(std::ceil(bb.hi(i) / s)) - lo[i] + 1;
    total *= cnt[i];
  }
  LiftSchedule sched;
  for (long key = 0; key < total; ++key) {
    long rem = key;
    Point c(n);
    for (int i = 0; i < n; ++i) {
      c(i) = (lo[i] + static_cast<int>(rem % cnt[i])) * s;
      rem /= cnt[i];
    }
    DomainSpec O = DomainSpec::ball(c, 0.9 * s);
    const auto mask = nodes_inside(g, O);
    if (std::any_of(mask.begin(), mask.end(), [](char m) { return m != 0; }))
      sched.sets.push_back(std::move(O));
  }
  return sched;
}

struct CapCheck {
  long samples = 0;
  double max_violation = -std::numeric_limits<double>::infinity(); // max(v - w_k)
};

/// v <= w_k at every grid node lying in some member k.
inline CapCheck check_caps(const ScalarField& v, const SupersolutionFamily& fam)
{
  CapCheck c;
  const Grid& g = *v.grid;
  for (int k = 0; k < g.num_dofs(); ++k) {
    const Point& x = g.position(k);
    for (int m = 1; m <= fam.size(); ++m)
      if (member_contains(fam.covering, m, x)) {
        ++c.samples;
        c.max_violation = std::max(c.max_violation, v(k) - fam.evaluate(m, x));
      }
  }
  return c;
}

struct SubfunctionReport {
  bool below_data = false;
  double data_violation = 0.0;
  bool lift_monotone = false;
  double lift_violation = 0.0;
  bool below_caps = true;
  double cap_violation = -std::numeric_limits<double>::infinity();
  bool pass() const { return below_data && lift_monotone && below_caps; }
};

/// Probe balls of radius in [3h, diam/10] centred at random grid nodes.
inline std::vector<DomainSpec> probe_balls(const Grid& g, int count, std::uint64_t seed)
{
  const BoundingBox bb = bounding_box(g.domain());
  const double diam = (bb.hi - bb.lo).norm();
  const double rmin = 3 * g.spacing(), rmax = std::max(rmin, diam / 10);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, g.num_nodes() - 1);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<DomainSpec> out;
  for (int i = 0; i < count; ++i)
    out.push_back(DomainSpec::ball(g.position(pick(rng)), rmin + U(rng) * (rmax - rmin)));
  return out;
}

/// Sampled membership test for the subfunction class: v <= phi on the boundary,
/// v <= M_O(v) for the probes, v <= w_k on the family members.
inline SubfunctionReport subfunction_check(const ScalarField& v, const SupersolutionFamily* family, const ScalarFunction& phi,
                                           const std::vector<DomainSpec>& probes, const OperatorParams& params,
                                           const SolveOptions& opt = {}, double slack = 1e-8)
{
  const Grid& g = *v.grid;
  SubfunctionReport r;
  for (int b = g.num_nodes(); b < g.num_dofs(); ++b)
    r.data_violation = std::max(r.data_violation, v(b) - phi(g.position(b)));
  r.below_data = r.data_violation <= slack;
  for (const auto& O : probes) {
    const ScalarField z = lift(v, O, params, opt);
    r.lift_violation = std::max(r.lift_violation, (v.values - z.values).maxCoeff());
  }
  r.lift_monotone = r.lift_violation <= slack;
  if (family) {
    const CapCheck c = check_caps(v, *family);
    r.cap_violation = c.max_violation;
    r.below_caps = c.samples == 0 || c.max_violation <= slack;
  }
  return r;
}

struct PerronReport {
  int sweeps = 0;
  int lifts = 0;
  std::vector<double> sweep_change;
  double min_increment = 0.0; // most negative lift - v seen
  double final_residual = 0.0;
  double max_cap_violation = -std::numeric_limits<double>::infinity();
};

/// Monotone lift sweeps from the minimal-mode solution v0.
inline std::pair<ScalarField, PerronReport> perron_solve(std::shared_ptr<const Grid> grid, const ScalarFunction& phi,
                                                         const OperatorParams& params, const LiftSchedule& schedule,
                                                         double tol, const SupersolutionFamily* family = nullptr,
                                                         const SolveOptions& opt = {})
{
  PerronReport rep;
  ScalarField v = solve_dirichlet(grid, phi, params, Mode::minimal, opt).first;
  for (int sweep = 0; sweep < schedule.max_sweeps; ++sweep) {
    const Eigen::VectorXd before = v.values;
    for (const auto& O : schedule.sets) {
      const ScalarField z = lift(v, O, params, opt);
      ++rep.lifts;
      const double inc = (z.values - v.values).minCoeff();
      rep.min_increment = std::min(rep.min_increment, inc);
      if (inc < -1e-8)
        throw Error("monotonicity violated");
      v.values = v.values.cwiseMax(z.values);
    }
    ++rep.sweeps;
    if (family)
      rep.max_cap_violation = std::max(rep.max_cap_violation, check_caps(v, *family).max_violation);
    const double change = (v.values - before).lpNorm<Eigen::Infinity>();
    rep.sweep_change.push_back(change);
    if (change < tol)
      break;
  }
  rep.final_residual = residual_Q(v, params).values.head(grid->num_nodes()).lpNorm<Eigen::Infinity>();
  return {std::move(v), std::move(rep)};
}

struct ExhaustionLevel {
  double R = 0.0;
  ScalarField u_sub;
  ScalarField u_sup;
  double gap = 0.0;
  int iterations = 0;
  double order_violation = 0.0;    // max(u_sub - u_sup)
  double cap_violation = 0.0;      // max over both fields of (u - w_k)
  int artificial_points = 0;
};

struct ExhaustionResult {
  std::vector<ExhaustionLevel> levels;
  bool gaps_nonincreasing(double slack = 1e-8) const
  {
    for (std::size_t j = 1; j < levels.size(); ++j)
      if (levels[j].gap > levels[j - 1].gap + slack)
        return false;
    return true;
  }
};

struct ExhaustionOptions {
  double h = 1.0 / 16;
  double compact_x1 = 2.0;
  /// Length in x1 over which the super data on the real boundary rises from phi to the cut level.
  double ramp_length = 1.0;
  SolveOptions solve;
};

/// Sub/super pair on each truncation.  Real boundary carries phi.  On the artificial cut the
/// sub data is phi at the nearest real boundary point and the super data is the family cap
/// min_k w_k.  On the real boundary within ramp_length of the cut the super data rises
/// linearly from phi to the cap, so it stays continuous, >= phi and <= every w_k.
inline ExhaustionResult exhaustion_solve(const DomainSpec& base, const ScalarFunction& phi, const OperatorParams& params,
                                         const std::vector<double>& schedule, const SupersolutionFamily& family,
                                         const ExhaustionOptions& xo = {})
{
  if (!(xo.ramp_length > 0))
    throw Error("ramp length must be positive");
  ExhaustionResult res;
  for (std::size_t j = 0; j < schedule.size(); ++j) {
    const DomainSpec dom = truncate(base, j, schedule);
    const auto grid = classify_nodes(dom, xo.h);
    ExhaustionLevel lev;
    lev.R = schedule[j];
    ScalarField sub(grid), sup(grid);
    std::vector<char> artificial(grid->num_dofs(), 0);
    double junction = std::numeric_limits<double>::infinity();
    for (int b = grid->num_nodes(); b < grid->num_dofs(); ++b) {
      const Point& y = grid->position(b);
      if (std::abs(signed_distance(base, y)) > 1e-9) {
        artificial[b] = 1;
        ++lev.artificial_points;
        junction = std::min(junction, y(0));
      }
    }
    for (int b = grid->num_nodes(); b < grid->num_dofs(); ++b) {
      const Point& y = grid->position(b);
      if (artificial[b]) {
        sub.values(b) = phi(project_to_boundary(base, y));
        sup.values(b) = family.cap(y);
      } else {
        sub.values(b) = sup.values(b) = phi(y);
        const double lam = std::clamp(1.0 - (junction - y(0)) / xo.ramp_length, 0.0, 1.0);
        if (lam > 0)
          sup.values(b) += lam * std::max(0.0, family.cap(y) - phi(y));
      }
    }
    SolveReport rs = solve_fixed(sub, {}, params, Mode::translator, xo.solve);
    SolveReport rp = solve_fixed(sup, {}, params, Mode::translator, xo.solve);
    lev.iterations = rs.iterations + rp.iterations;
    lev.order_violation = (sub.values - sup.values).maxCoeff();
    lev.gap = 0.0;
    for (int k = 0; k < grid->num_nodes(); ++k)
      if (grid->position(k)(0) <= xo.compact_x1)
        lev.gap = std::max(lev.gap, sup(k) - sub(k));
    lev.cap_violation = std::max(check_caps(sub, family).max_violation, check_caps(sup, family).max_violation);
    lev.u_sub = std::move(sub);
    lev.u_sup = std::move(sup);
    res.levels.push_back(std::move(lev));
  }
  return res;
}

} // namespace hkflow

#endif
