// One PASS/FAIL line per acceptance criterion; exit status 1 if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <hkflow/barriers.hpp>
#include <hkflow/covering.hpp>
#include <hkflow/perron.hpp>
#include <hkflow/solver.hpp>
#include <hkflow/special_functions.hpp>

using namespace hkflow;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args)
{
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

DomainSpec unit_disk() { return DomainSpec::ball(make_point({0, 0}), 1.0); }

const ScalarFunction zero = [](const Point&) { return 0.0; };

Outcome inverse_pair()
{
  double worst = 0.0, xi1 = 0.0;
  for (int n : {2, 3}) {
    for (int i = 0; i <= 400; ++i) {
      const double beta = 1e-3 * std::pow(1e4, i / 400.0);
      worst = std::max(worst, std::abs(xi(eta(beta, n), n) - beta));
    }
    xi1 = std::max(xi1, std::abs(xi(1.0, n) - 0.5 / (n - 1)));
  }
  return {worst <= 1e-10 && xi1 <= 1e-12, fmt("max |xi(eta(b)) - b| = %.2e, |xi(1) - 1/(2(n-1))| = %.2e", worst, xi1)};
}

Outcome profile_identity()
{
  double worst = 0.0;
  for (int n : {2, 3})
    for (double alpha : {0.5, 1.0, 2.0})
      for (double mu : {0.3, 0.5, 0.8}) {
        const AuxProfile p = build_profile(n, alpha, mu, 1.0);
        for (double r : shell_radii(p, 100)) {
          const double e = 1e-5 * (r - p.L);
          const double fd = (h_eval(p, r + e).dh - h_eval(p, r - e).dh) / (2 * e);
          worst = std::max(worst, std::abs(h_eval(p, r).d2h - fd) / std::abs(fd));
        }
      }
  return {worst <= 1e-6, fmt("max relative error of h'' = %.2e over 18 profiles x 100 radii", worst)};
}

Outcome claim_certification()
{
  const AuxProfile p = build_profile(2, 1.0, 0.5, 1.0);
  const SupersolutionReport pos = verify_supersolution_radii(p, shell_radii(p, 10000));
  const AuxProfile q = make_profile(2, 1.0, 0.5, 1.0, 1.01);
  const SupersolutionReport neg = verify_supersolution_radii(q, shell_radii(q, 10000));
  return {p.Hstar == 3.0 && pos.max_residual < 0 && neg.max_residual > 0,
          fmt("H* = %g, max Qw = %.4g; negative control H* = 1.01 max Qw = %.4g", p.Hstar, pos.max_residual,
              neg.max_residual)};
}

Outcome barrier_certification()
{
  bool ok = true;
  std::string d;
  for (double alpha : {0.5, 1.0, 2.0}) {
    const OperatorParams P{2, alpha};
    const BarrierSpec s = barrier_constants(unit_disk(), zero, P, 1.0);
    const BarrierReport r = barrier_verify(s, unit_disk(), zero, P, collar_samples(unit_disk(), s.d1, 10000, 5));
    double ode = 0.0;
    for (int i = 0; i <= 1000; ++i) {
      const PsiValue v = psi_eval(s, s.d1 * i / 1000.0);
      ode = std::max(ode, std::abs(v.d2psi + s.c3 * v.dpsi * v.dpsi));
    }
    const bool reach = psi_eval(s, s.d1).psi >= s.a + s.m;
    ok = ok && r.pass && ode <= 1e-12 && reach;
    d += fmt("alpha=%g: max +-Qw = %.3g, psi ode %.1e, psi(d1)-(a+m) = %.3g; ", alpha, r.max_pm_residual, ode,
             psi_eval(s, s.d1).psi - s.a - s.m);
  }
  return {ok, d};
}

struct DiskRun {
  double h;
  ScalarField u;
  int iterations;
  double error;
};

std::vector<DiskRun> disk_runs;

Outcome solver_order()
{
  const OperatorParams P{2, 1.0};
  bool ok = true;
  std::string d;
  for (int cells : {32, 64, 128}) {
    const double h = 2.0 / cells;
    const RadialProfile prof = radial_oracle(P, 0.0, 1.0, std::min(1e-3, h / 16));
    const auto g = classify_nodes(unit_disk(), h);
    auto [u, rep] = solve_dirichlet(g, [&](const Point& x) { return prof.value(x.norm()); }, P);
    const double err = (u.values - radial_field(g, prof, make_point({0, 0})).values).lpNorm<Eigen::Infinity>();
    ok = ok && rep.iterations <= 30;
    d += fmt("%d^2: err %.3e, %d Newton; ", cells + 1, err, rep.iterations);
    disk_runs.push_back({h, std::move(u), rep.iterations, err});
  }
  for (std::size_t i = 1; i < disk_runs.size(); ++i) {
    const double ratio = disk_runs[i - 1].error / disk_runs[i].error;
    ok = ok && ratio >= 3 && ratio <= 5;
    d += fmt("ratio %.3f; ", ratio);
  }
  return {ok, d};
}

Outcome flow_check()
{
  if (disk_runs.size() != 3)
    return {false, "disk solutions unavailable"};
  const OperatorParams P{2, 1.0};
  bool ok = true;
  double prev = std::numeric_limits<double>::infinity();
  std::string d;
  for (const auto& r : disk_runs) {
    const double dev = flow_translation_check(r.u, P);
    const double bound = 5 * (r.h * r.h + r.h);
    ok = ok && dev <= bound && dev < prev;
    prev = dev;
    // Context only: the same check on the sampled oracle, which carries the truncation error.
    const RadialProfile prof = radial_oracle(P, 0.0, 1.0, std::min(1e-3, r.h / 16));
    const double oracle_dev = flow_translation_check(radial_field(r.u.grid, prof, make_point({0, 0})), P);
    d += fmt("h=%g: %.3e (bound %.3e, oracle %.3e); ", r.h, dev, bound, oracle_dev);
  }
  return {ok, d};
}

ScalarFunction smooth_data(std::mt19937_64& rng)
{
  std::uniform_real_distribution<double> U(-0.5, 0.5);
  const double a = U(rng), b = U(rng), c = U(rng), w = 1 + 2 * (U(rng) + 0.5);
  return [=](const Point& x) { return a * x(0) + b * std::sin(w * x(1)) + c * x(0) * x(1); };
}

Outcome structural_invariants()
{
  const OperatorParams P{2, 1.0};
  const SolveOptions opt;
  const auto g = classify_nodes(unit_disk(), 1.0 / 16);
  std::mt19937_64 rng(2024);

  const ScalarFunction phi = smooth_data(rng);
  const ScalarField u = solve_dirichlet(g, phi, P).first;
  const ScalarField us = solve_dirichlet(g, [&](const Point& x) { return phi(x) + 2.5; }, P).first;
  const double shift = (us.values.array() - 2.5 - u.values.array()).abs().maxCoeff();

  double cmp = -std::numeric_limits<double>::infinity();
  std::uniform_real_distribution<double> gap(0.0, 0.3);
  for (int t = 0; t < 20; ++t) {
    const ScalarFunction lo = smooth_data(rng), bump = smooth_data(rng);
    const double s = gap(rng);
    const ScalarField u1 = solve_dirichlet(g, lo, P).first;
    const ScalarField u2 =
        solve_dirichlet(g, [=](const Point& x) { return lo(x) + s + 0.5 * (1 + std::tanh(bump(x))); }, P).first;
    cmp = std::max(cmp, compare_fields(u1, u2).max_violation);
  }

  const ScalarField v0 = solve_dirichlet(g, phi, P, Mode::minimal).first;
  double idem = 0.0, mono = -std::numeric_limits<double>::infinity(), raise = -std::numeric_limits<double>::infinity();
  for (const auto& O : probe_balls(*g, 5, 9)) {
    const ScalarField z1 = lift(v0, O, P, opt);
    const ScalarField z2 = lift(z1, O, P, opt);
    idem = std::max(idem, (z2.values - z1.values).lpNorm<Eigen::Infinity>());
    raise = std::max(raise, (v0.values - z1.values).maxCoeff());
    ScalarField v1 = v0;
    for (int k = 0; k < g->num_nodes(); ++k)
      v1.values(k) += 0.05 * (1 - g->position(k).squaredNorm());
    mono = std::max(mono, compare_fields(z1, lift(v1, O, P, opt)).max_violation);
  }
  const double t2 = 2 * opt.tolerance;
  return {shift <= 1e-10 && cmp <= 1e-8 && idem <= t2 && mono <= t2 && raise <= t2,
          fmt("shift %.1e, comparison max(u1-u2) %.2e, idempotence %.1e, lift order %.2e, v0 - M(v0) %.2e", shift, cmp,
              idem, mono, raise)};
}

Outcome covering_certification()
{
  const CoveringSeq cyl = covering_build_cylinder(0.0, 1.0, std::log(2.0), 10, 2, 0.9);
  const CoveringSeq cone = covering_build_cone(1.0, std::numbers::pi / 6, std::log(1.8), 8);
  const CoveringSeq bad = covering_build_cone_with_ratio(1.0, std::numbers::pi / 6, std::log(1.8), 6.0, 8);
  const CoveringReport a = covering_verify(cyl, 100000, 1), b = covering_verify(cone, 100000, 1),
                       c = covering_verify(bad, 100000, 1);
  const bool ok = a.pass() && b.pass() && !c.pass() && std::abs(cone.delta0 - std::sqrt(5.0)) < 1e-12;
  return {ok, fmt("cylinder %ld/%ld violations, cone %ld/%ld, negative control delta0=6: %ld/%ld",
                  a.coverage_violations + a.handoff_violations, a.coverage_samples + a.handoff_samples,
                  b.coverage_violations + b.handoff_violations, b.coverage_samples + b.handoff_samples,
                  c.coverage_violations + c.handoff_violations, c.coverage_samples + c.handoff_samples)};
}

Outcome perron_exhaustion()
{
  const OperatorParams P{2, 1.0};
  const SolveOptions opt;
  const auto g = classify_nodes(unit_disk(), 1.0 / 16);
  const ScalarFunction phi = [](const Point& x) { return 0.2 * x(0) * x(1); };
  const ScalarField u = solve_dirichlet(g, phi, P).first;
  const auto fam = family_build_cylinder(-1.5, 1.5, 40, P, 0.5, [](double) { return 0.2; });
  const auto [v, pr] = perron_solve(g, phi, P, ball_schedule(*g, 0.5), 1e-11, &fam, opt);
  const double diff = (u.values - v.values).lpNorm<Eigen::Infinity>();
  const bool perron_ok = diff <= 10 * opt.tolerance && pr.min_increment >= -2 * opt.tolerance && pr.max_cap_violation <= 0;

  const auto strip = DomainSpec::rounded_strip(0.5, make_point({1, 0}));
  const auto fam2 = family_build_cylinder(0.0, 1.0, 200, P, 0.5, [](double) { return 0.0; });
  const ExhaustionResult ex = exhaustion_solve(strip, zero, P, {4, 8, 16}, fam2);
  double cap = -std::numeric_limits<double>::infinity();
  for (const auto& l : ex.levels)
    cap = std::max(cap, l.cap_violation);
  const bool ex_ok = ex.gaps_nonincreasing() && ex.levels.back().gap < 1e-3 && cap <= 1e-8;
  return {perron_ok && ex_ok, fmt("perron |u - v| = %.2e over %d sweeps, min increment %.1e; gaps %.3e %.3e %.3e, max cap "
                                  "violation %.2e",
                                  diff, pr.sweeps, pr.min_increment, ex.levels[0].gap, ex.levels[1].gap,
                                  ex.levels[2].gap, cap)};
}

} // namespace

int main()
{
  struct Criterion {
    int id;
    double limit_seconds;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all{{1, 1, inverse_pair},           {2, 10, profile_identity},
                                   {3, 1, claim_certification},    {4, 5, barrier_certification},
                                   {5, 60, solver_order},          {6, 10, flow_check},
                                   {7, 120, structural_invariants}, {8, 10, covering_certification},
                                   {9, 600, perron_exhaustion}};
  int failures = 0;
  for (const auto& c : all) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o{false, ""};
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = o.pass && secs < c.limit_seconds;
    failures += pass ? 0 : 1;
    std::printf("%s criterion %d: %s [%.2f s, limit %.0f s]\n", pass ? "PASS" : "FAIL", c.id, o.detail.c_str(), secs,
                c.limit_seconds);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
