#ifndef HKFLOW_CLI_HPP
#define HKFLOW_CLI_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <boost/version.hpp>
#include <openssl/opensslv.h>

#include "barriers.hpp"
#include "config.hpp"
#include "covering.hpp"
#include "expression.hpp"
#include "io.hpp"
#include "perron.hpp"
#include "solver.hpp"
#include "special_functions.hpp"
#include "supersolution_family.hpp"

namespace hkflow {

inline constexpr const char* version = "0.1.0";

enum ExitStatus { exit_pass = 0, exit_error = 1, exit_fail = 2 };

struct RunOptions {
  std::filesystem::path out = "out";
  std::optional<std::uint64_t> seed;
  bool verbose = false;
};

namespace cli {

struct Context {
  const Config& cfg;
  ArtifactWriter& out;
  std::uint64_t seed;
  bool verbose;
  std::ostream& log;

  void note(const std::string& s) const
  {
    if (verbose)
      log << s << '\n';
  }
};

inline Point parse_point(const Config& cfg, const std::string& key, int n)
{
  const std::vector<double> v = cfg.get_list(key);
  if (static_cast<int>(v.size()) != n)
    throw ConfigError(cfg.where(key) + ": expected " + std::to_string(n) + " coordinates");
  return Eigen::Map<const Eigen::VectorXd>(v.data(), n);
}

inline OperatorParams read_params(const Config& cfg)
{
  const long long n = cfg.get_int("params.n", 2);
  if (n < 2 || n > 8)
    throw ConfigError(cfg.where("params.n") + ": value must lie in [2, 8]");
  const double alpha = cfg.get_in_range("params.alpha", 1.0, 0.0, 1e6);
  return OperatorParams{static_cast<int>(n), alpha};
}

inline DomainSpec read_domain(const Config& cfg, int n)
{
  const std::string shape = cfg.get_string("domain.shape");
  auto num = [&](const std::string& k) { return cfg.get_double("domain." + k); };
  auto origin = [&](const std::string& k) { return cfg.has("domain." + k) ? parse_point(cfg, "domain." + k, n) : Point(Point::Zero(n)); };
  try {
    DomainSpec d = [&]() -> DomainSpec {
      if (shape == "ball")
        return DomainSpec::ball(origin("center"), num("radius"));
      if (shape == "box")
        return DomainSpec::box(parse_point(cfg, "domain.lo", n), parse_point(cfg, "domain.hi", n));
      if (shape == "annulus")
        return DomainSpec::annulus(origin("center"), num("r_in"), num("r_out"));
      if (shape == "cylinder")
        return DomainSpec::cylinder(num("N"), num("M"), n);
      if (shape == "cone")
        return DomainSpec::cone(num("theta"), n);
      if (shape == "rounded_strip")
        return DomainSpec::rounded_strip(num("rho"), origin("cap_center"));
      throw ConfigError(cfg.where("domain.shape") + ": unknown shape '" + shape + "'");
    }();
    if (d.dim() != n)
      throw ConfigError(cfg.where("domain.shape") + ": domain dimension does not match params.n");
    if (cfg.has("domain.x1_max"))
      d = DomainSpec::truncation(d, num("x1_max"));
    return d;
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(cfg.where("domain.shape") + ": " + e.what());
  }
}

inline ScalarFunction read_phi(const Config& cfg, int n)
{
  const std::string key = "data.phi";
  const std::string text = cfg.get_string(key, "0");
  try {
    const Expression e(text);
    if (e.max_variable() > n)
      throw ExpressionError("uses x" + std::to_string(e.max_variable()) + " in dimension " + std::to_string(n));
    return e.function();
  } catch (const ExpressionError& err) {
    throw ConfigError(cfg.where(key) + ": " + err.what());
  }
}

inline double read_h(const Config& cfg) { return cfg.get_in_range("grid.h", 1.0 / 16, 0.0, 1.0, false); }

inline SolveOptions read_solve_options(const Config& cfg)
{
  SolveOptions o;
  o.tolerance = cfg.get_in_range("solve.tolerance", o.tolerance, 0.0, 1.0);
  o.max_steps = static_cast<int>(cfg.get_in_range("solve.max_steps", o.max_steps, 0.0, 1e4));
  o.scaled_residual = cfg.get_bool("solve.scaled_residual", o.scaled_residual);
  return o;
}

inline void write_field(Context& c, const std::string& name, const ScalarField& u)
{
  const int n = u.grid->dim();
  std::vector<std::string> header;
  for (int i = 1; i <= n; ++i)
    header.push_back("x" + std::to_string(i));
  header.push_back("u");
  std::vector<std::vector<double>> rows;
  rows.reserve(u.size());
  for (int k = 0; k < u.size(); ++k) {
    const Point& x = u.grid->position(k);
    std::vector<double> r(x.data(), x.data() + n);
    r.push_back(u(k));
    rows.push_back(std::move(r));
  }
  c.out.write_csv(name, header, rows);
}

inline void write_grid(Context& c, const Grid& g)
{
  std::ostringstream os;
  write_grid_csv(os, g);
  c.out.write_text("grid.csv", os.str());
}

inline ExitStatus task_solve(Context& c)
{
  const OperatorParams P = read_params(c.cfg);
  const DomainSpec dom = read_domain(c.cfg, P.n);
  const double h = read_h(c.cfg);
  const std::string mode_name = c.cfg.get_string("solve.mode", "translator");
  if (mode_name != "translator" && mode_name != "minimal")
    throw ConfigError(c.cfg.where("solve.mode") + ": expected translator or minimal");
  const Mode mode = mode_name == "minimal" ? Mode::minimal : Mode::translator;
  const bool oracle = c.cfg.get_bool("solve.oracle", false);

  const auto grid = classify_nodes(dom, h);
  ScalarFunction phi;
  RadialProfile prof;
  Point center;
  if (oracle) {
    if (!dom.is<Ball>() || mode != Mode::translator)
      throw ConfigError(c.cfg.where("solve.oracle") + ": the radial oracle needs a ball and translator mode");
    center = dom.as<Ball>().center;
    prof = radial_oracle(P, 0.0, dom.as<Ball>().radius, std::min(1e-3, h / 16));
    phi = [&](const Point& x) { return prof.value(std::min((x - center).norm(), prof.r.back())); };
  } else {
    phi = read_phi(c.cfg, P.n);
  }
  c.note("grid: " + std::to_string(grid->num_nodes()) + " nodes, " + std::to_string(grid->num_boundary()) + " boundary points");
  auto [u, rep] = solve_dirichlet(grid, phi, P, mode, read_solve_options(c.cfg));

  Json j;
  j["task"] = "solve";
  j["params"] = {{"n", P.n}, {"alpha", P.alpha}, {"mode", mode_name}};
  j["domain"] = dom.kind_name();
  j["h"] = h;
  j["nodes"] = grid->num_nodes();
  j["boundary_points"] = grid->num_boundary();
  j["iterations"] = rep.iterations;
  j["residual_history"] = rep.residual_history;
  j["final_residual"] = rep.final_residual;
  j["quadratic_constant"] = rep.quadratic_constant;
  j["alpha_steps"] = rep.alpha_steps;
  j["ramp_steps"] = rep.ramp_steps;
  j["max_interior_gradient"] = rep.max_interior_gradient;
  j["max_boundary_gradient"] = rep.max_boundary_gradient;
  j["warnings"] = rep.warnings;
  if (mode == Mode::translator) {
    try {
      j["flow_check"] = flow_translation_check(u, P);
    } catch (const Error& e) {
      j["flow_check"] = nullptr;
      j["flow_check_error"] = e.what();
    }
  }
  if (oracle) {
    double err = 0.0;
    for (int k = 0; k < grid->num_nodes(); ++k)
      err = std::max(err, std::abs(u(k) - prof.value((grid->position(k) - center).norm())));
    j["oracle_max_error"] = err;
  }
  j["pass"] = true;
  write_grid(c, *grid);
  write_field(c, "field.csv", u);
  c.out.write_json("report.json", j);
  return exit_pass;
}

inline ExitStatus task_verify_claim(Context& c)
{
  const OperatorParams P = read_params(c.cfg);
  const double mu = c.cfg.get_in_range("profile.mu", 0.5, 0.0, 1.0);
  const double L = c.cfg.get_in_range("profile.L", 1.0, 0.0, 1e12);
  const long long samples = c.cfg.get_int("profile.samples", 10000);
  if (samples < 1)
    throw ConfigError(c.cfg.where("profile.samples") + ": must be positive");
  const AuxProfile p = c.cfg.has("profile.Hstar")
                           ? make_profile(P.n, P.alpha, mu, L, c.cfg.get_in_range("profile.Hstar", 1.0, 1e12))
                           : build_profile(P.n, P.alpha, mu, L);
  const SupersolutionReport r = verify_supersolution_radii(p, shell_radii(p, static_cast<int>(samples)));

  std::vector<std::vector<double>> rows;
  for (double rad : shell_radii(p, 200)) {
    const ProfileValue v = h_eval(p, rad);
    rows.push_back({rad, v.h, v.dh, v.d2h, radial_Q(p, rad)});
  }
  c.out.write_csv("profile.csv", {"r", "h", "dh", "d2h", "Qw"}, rows);

  Json j;
  j["task"] = "verify_claim";
  j["params"] = {{"n", P.n}, {"alpha", P.alpha}, {"mu", mu}, {"L", L}};
  j["Hstar"] = p.Hstar;
  j["d"] = p.d;
  j["tau"] = p.tau;
  j["feasible"] = profile_feasible(p);
  j["samples"] = samples;
  j["max_residual"] = r.max_residual;
  j["argmax_radius"] = r.argmax_radius;
  j["pass"] = r.pass;
  c.out.write_json("report.json", j);
  return r.pass ? exit_pass : exit_fail;
}

inline ExitStatus task_verify_barrier(Context& c)
{
  const OperatorParams P = read_params(c.cfg);
  const DomainSpec dom = read_domain(c.cfg, P.n);
  const ScalarFunction phi = read_phi(c.cfg, P.n);
  const double m = c.cfg.get_in_range("barrier.m", 1.0, 0.0, 1e12, true);
  const long long samples = c.cfg.get_int("barrier.samples", 10000);
  if (samples < 1)
    throw ConfigError(c.cfg.where("barrier.samples") + ": must be positive");
  const BarrierSpec s = barrier_constants(dom, phi, P, m, BarrierOptions{4000, c.seed});
  const BarrierReport r = barrier_verify(s, dom, phi, P, collar_samples(dom, s.d1, static_cast<std::size_t>(samples), c.seed + 11));

  double ode = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const PsiValue v = psi_eval(s, s.d1 * i / 100.0);
    ode = std::max(ode, std::abs(v.d2psi + s.c3 * v.dpsi * v.dpsi));
  }
  const double psi_d1 = psi_eval(s, s.d1).psi;
  const bool pass = r.pass && ode <= 1e-12 && psi_d1 >= s.a + s.m;

  Json j;
  j["task"] = "verify_barrier";
  j["params"] = {{"n", P.n}, {"alpha", P.alpha}};
  j["constants"] = {{"c1", s.c1}, {"c2", s.c2}, {"c3", s.c3}, {"nu", s.nu}, {"d1", s.d1}, {"k", s.k}, {"a", s.a}, {"m", s.m},
                    {"H0", s.H0}, {"sup_Dphi", s.sup_Dphi}, {"sup_D2phi", s.sup_D2phi}, {"sup_D2d", s.sup_D2d}};
  j["samples"] = samples;
  j["max_upper"] = r.max_upper;
  j["max_lower"] = r.max_lower;
  j["max_pm_residual"] = r.max_pm_residual;
  j["psi_ode_residual"] = ode;
  j["psi_d1"] = psi_d1;
  j["gradient_bound"] = gradient_bound(s);
  j["pass"] = pass;
  c.out.write_json("report.json", j);
  return pass ? exit_pass : exit_fail;
}

inline CoveringSeq read_covering(const Config& cfg, int n)
{
  const std::string kind = cfg.get_string("covering.kind", "cylinder");
  const long long K = cfg.get_int("covering.K", 10);
  if (K < 1 || K > 100000)
    throw ConfigError(cfg.where("covering.K") + ": value must lie in [1, 100000]");
  double d = 0.0;
  if (cfg.has("covering.exp_d"))
    d = std::log(cfg.get_in_range("covering.exp_d", 1.0, 1e300));
  else
    d = cfg.get_in_range("covering.d", 0.0, 1e3);
  try {
    if (kind == "cylinder")
      return covering_build_cylinder(cfg.get_double("covering.N", 0.0), cfg.get_in_range("covering.M", 1.0, 0.0, 1e12), d,
                                     static_cast<int>(K), n, cfg.get_in_range("covering.eps", 0.9, 0.0, 1.0));
    if (kind == "cone") {
      const double theta = cfg.get_in_range("covering.theta", 0.0, std::numbers::pi / 2);
      const double b1 = cfg.get_in_range("covering.b1", 1.0, 0.0, 1e12);
      if (cfg.has("covering.delta0"))
        return covering_build_cone_with_ratio(b1, theta, d, cfg.get_in_range("covering.delta0", 1.0, 1e12), static_cast<int>(K), n);
      return covering_build_cone(b1, theta, d, static_cast<int>(K), n);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(cfg.where("covering.kind") + ": " + e.what());
  }
  throw ConfigError(cfg.where("covering.kind") + ": expected cylinder or cone");
}

inline ExitStatus task_verify_covering(Context& c)
{
  const OperatorParams P = read_params(c.cfg);
  const CoveringSeq s = read_covering(c.cfg, P.n);
  const long long samples = c.cfg.get_int("covering.samples", 100000);
  if (samples < 1)
    throw ConfigError(c.cfg.where("covering.samples") + ": must be positive");
  const CoveringReport r = covering_verify(s, static_cast<long>(samples), c.seed);

  std::ostringstream os;
  write_covering_csv(os, s);
  c.out.write_text("members.csv", os.str());
  Json j;
  j["task"] = "verify_covering";
  j["kind"] = s.kind == CoveringCase::cylinder ? "cylinder" : "cone";
  j["n"] = s.n;
  j["d"] = s.d;
  j["K"] = s.size();
  if (s.kind == CoveringCase::cylinder) {
    j["N"] = s.N;
    j["M"] = s.M;
    j["eps"] = s.eps;
  } else {
    j["theta"] = s.theta;
    j["b1"] = s.b1;
    j["delta0"] = s.delta0;
  }
  j["centers"] = s.centers;
  j["coverage_samples"] = r.coverage_samples;
  j["coverage_violations"] = r.coverage_violations;
  j["handoff_samples"] = r.handoff_samples;
  j["handoff_violations"] = r.handoff_violations;
  j["pass"] = r.pass();
  c.out.write_json("report.json", j);
  return r.pass() ? exit_pass : exit_fail;
}

inline ExitStatus task_radial(Context& c)
{
  const OperatorParams P = read_params(c.cfg);
  const double rmax = c.cfg.get_in_range("radial.rmax", 4.0, 0.0, 1e6);
  const double step = c.cfg.get_in_range("radial.step", 1e-2, 0.0, 1.0);
  const double u0 = c.cfg.get_double("radial.u0", 0.0);
  const double min_order = c.cfg.get_double("radial.min_order", 3.5);

  const RadialProfile a = radial_oracle(P, u0, rmax, step);
  const RadialProfile b = radial_oracle(P, u0, rmax, step / 2);
  const RadialProfile q = radial_oracle(P, u0, rmax, step / 4);
  double e1 = 0.0, e2 = 0.0;
  for (std::size_t i = 0; i < a.r.size(); ++i) {
    e1 = std::max(e1, std::abs(a.u[i] - b.u[2 * i]));
    e2 = std::max(e2, std::abs(b.u[2 * i] - q.u[4 * i]));
  }
  const double order = (e1 > 0 && e2 > 0) ? std::log2(e1 / e2) : std::numeric_limits<double>::infinity();
  const bool pass = order >= min_order;

  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < q.r.size(); ++i)
    rows.push_back({q.r[i], q.u[i], q.du[i]});
  c.out.write_csv("radial.csv", {"r", "u", "u'"}, rows);
  Json j;
  j["task"] = "radial";
  j["params"] = {{"n", P.n}, {"alpha", P.alpha}};
  j["rmax"] = rmax;
  j["steps"] = {step, step / 2, step / 4};
  j["difference_coarse"] = e1;
  j["difference_fine"] = e2;
  j["observed_order"] = std::isfinite(order) ? Json(order) : Json(nullptr);
  j["min_order"] = min_order;
  j["pass"] = pass;
  c.out.write_json("report.json", j);
  return pass ? exit_pass : exit_fail;
}

/// phi_sup(t) from boundary samples with x1 <= t.
inline BoundarySup sampled_boundary_sup(const DomainSpec& dom, const ScalarFunction& phi, double x1_limit, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::vector<std::pair<double, double>> pts;
  for (const auto& y : sample_boundary(dom, 20000, rng, x1_limit))
    pts.emplace_back(y(0), std::abs(phi(y)));
  std::sort(pts.begin(), pts.end());
  for (std::size_t i = 1; i < pts.size(); ++i)
    pts[i].second = std::max(pts[i].second, pts[i - 1].second);
  return [pts](double t) {
    auto it = std::upper_bound(pts.begin(), pts.end(), std::make_pair(t, std::numeric_limits<double>::infinity()));
    return it == pts.begin() ? 0.0 : std::prev(it)->second;
  };
}

inline SupersolutionFamily read_family(const Config& cfg, const OperatorParams& P, const BoundarySup& sup)
{
  const std::string kind = cfg.get_string("family.kind", "cylinder");
  const double mu = cfg.get_in_range("family.mu", 0.5, 0.0, 1.0);
  const long long K = cfg.get_int("family.K", 200);
  if (K < 1 || K > 100000)
    throw ConfigError(cfg.where("family.K") + ": value must lie in [1, 100000]");
  try {
    if (kind == "cylinder")
      return family_build_cylinder(cfg.get_double("family.N", 0.0), cfg.get_in_range("family.M", 1.0, 0.0, 1e12),
                                   static_cast<int>(K), P, mu, sup, cfg.get_in_range("family.eps", 0.9, 0.0, 1.0));
    if (kind == "cone")
      return family_build_cone(cfg.get_in_range("family.theta", 0.0, std::numbers::pi / 2),
                               cfg.get_in_range("family.b1", 1.0, 0.0, 1e12), static_cast<int>(K), P, mu, sup);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(cfg.where("family.kind") + ": " + e.what());
  }
  throw ConfigError(cfg.where("family.kind") + ": expected cylinder or cone");
}

inline ExitStatus task_perron(Context& c)
{
  const OperatorParams P = read_params(c.cfg);
  const DomainSpec dom = read_domain(c.cfg, P.n);
  const ScalarFunction phi = read_phi(c.cfg, P.n);
  const double h = read_h(c.cfg);
  const SolveOptions opt = read_solve_options(c.cfg);
  const double spacing = c.cfg.get_in_range("perron.spacing", 0.5, 0.0, 1e6);
  const double tol = c.cfg.get_in_range("perron.tolerance", 1e-11, 0.0, 1.0);
  const long long sweeps = c.cfg.get_int("perron.max_sweeps", 200);
  if (sweeps < 1)
    throw ConfigError(c.cfg.where("perron.max_sweeps") + ": must be positive");

  const auto grid = classify_nodes(dom, h);
  LiftSchedule sched = ball_schedule(*grid, spacing);
  sched.max_sweeps = static_cast<int>(sweeps);
  std::optional<SupersolutionFamily> fam;
  if (c.cfg.has("family.kind")) {
    const BoundingBox bb = bounding_box(dom);
    fam = read_family(c.cfg, P, sampled_boundary_sup(dom, phi, bb.hi(0) + 1.0, c.seed));
  }
  auto [v, rep] = perron_solve(grid, phi, P, sched, tol, fam ? &*fam : nullptr, opt);
  const ScalarField u = solve_dirichlet(grid, phi, P, Mode::translator, opt).first;
  const double diff = (u.values - v.values).lpNorm<Eigen::Infinity>();
  const double match_tol = 10 * opt.tolerance;
  const bool monotone = rep.min_increment >= -1e-8;
  const bool caps_ok = !fam || rep.max_cap_violation <= 1e-8;
  const bool pass = monotone && diff <= match_tol && caps_ok;

  write_field(c, "field.csv", v);
  Json j;
  j["task"] = "perron";
  j["params"] = {{"n", P.n}, {"alpha", P.alpha}};
  j["h"] = h;
  j["lift_sets"] = sched.sets.size();
  j["sweeps"] = rep.sweeps;
  j["lifts"] = rep.lifts;
  j["sweep_change"] = rep.sweep_change;
  j["min_increment"] = rep.min_increment;
  j["final_residual"] = rep.final_residual;
  j["dirichlet_difference"] = diff;
  j["match_tolerance"] = match_tol;
  if (fam)
    j["max_cap_violation"] = rep.max_cap_violation;
  j["pass"] = pass;
  c.out.write_json("report.json", j);
  return pass ? exit_pass : exit_fail;
}

inline ExitStatus task_exhaustion(Context& c)
{
  const OperatorParams P = read_params(c.cfg);
  const DomainSpec base = read_domain(c.cfg, P.n);
  const ScalarFunction phi = read_phi(c.cfg, P.n);
  ExhaustionOptions xo;
  xo.h = read_h(c.cfg);
  xo.compact_x1 = c.cfg.get_double("exhaustion.compact_x1", 2.0);
  xo.ramp_length = c.cfg.get_in_range("exhaustion.ramp_length", 1.0, 0.0, 1e6);
  xo.solve = read_solve_options(c.cfg);
  xo.solve.check_volume = false;
  const std::vector<double> schedule = c.cfg.has("exhaustion.schedule") ? c.cfg.get_list("exhaustion.schedule")
                                                                          : std::vector<double>{4, 8, 16};
  const double gap_tol = c.cfg.get_in_range("exhaustion.gap_tolerance", 1e-3, 0.0, 1e12);

  const BoundarySup sup = sampled_boundary_sup(base, phi, schedule.back() + 1.0, c.seed);
  const SupersolutionFamily fam = read_family(c.cfg, P, sup);
  const ExhaustionResult res = exhaustion_solve(base, phi, P, schedule, fam, xo);

  Json levels = Json::array();
  double worst_cap = -std::numeric_limits<double>::infinity(), worst_order = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < res.levels.size(); ++j) {
    const auto& l = res.levels[j];
    levels.push_back({{"R", l.R}, {"gap", l.gap}, {"iterations", l.iterations}, {"order_violation", l.order_violation},
                      {"cap_violation", l.cap_violation}, {"artificial_points", l.artificial_points}});
    worst_cap = std::max(worst_cap, l.cap_violation);
    worst_order = std::max(worst_order, l.order_violation);
    write_field(c, "u_sub_" + std::to_string(j + 1) + ".csv", l.u_sub);
    write_field(c, "u_sup_" + std::to_string(j + 1) + ".csv", l.u_sup);
  }
  const bool pass = res.gaps_nonincreasing() && !res.levels.empty() && res.levels.back().gap < gap_tol &&
                    worst_cap <= 1e-8 && worst_order <= 1e-8;
  Json j;
  j["task"] = "exhaustion";
  j["params"] = {{"n", P.n}, {"alpha", P.alpha}};
  j["h"] = xo.h;
  j["compact_x1"] = xo.compact_x1;
  j["family_members"] = fam.size();
  j["levels"] = levels;
  j["gaps_nonincreasing"] = res.gaps_nonincreasing();
  j["gap_tolerance"] = gap_tol;
  j["pass"] = pass;
  c.out.write_json("report.json", j);
  return pass ? exit_pass : exit_fail;
}

inline ExitStatus run_task(Context& c, const std::string& task);

/// Reruns a task for each listed value of one key, each into its own subdirectory.
inline ExitStatus task_sweep(Context& c)
{
  const std::string inner = c.cfg.get_string("sweep.task");
  if (inner == "sweep")
    throw ConfigError(c.cfg.where("sweep.task") + ": nested sweeps are not supported");
  const std::string key = c.cfg.get_string("sweep.key");
  std::vector<std::string> values;
  {
    std::stringstream ss(c.cfg.get_string("sweep.values"));
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto b = item.find_first_not_of(" \t"), e = item.find_last_not_of(" \t");
      if (b == std::string::npos)
        throw ConfigError(c.cfg.where("sweep.values") + ": empty value");
      values.push_back(item.substr(b, e - b + 1));
    }
  }
  if (values.empty())
    throw ConfigError(c.cfg.where("sweep.values") + ": empty list");

  ExitStatus worst = exit_pass;
  Json runs = Json::array();
  for (std::size_t i = 0; i < values.size(); ++i) {
    Config sub = c.cfg;
    sub.set(key, values[i]);
    sub.set("run.task", inner);
    const std::string dir = "run_" + std::to_string(i + 1);
    ArtifactWriter w(c.out.dir() / dir);
    Context cc{sub, w, c.seed, c.verbose, c.log};
    c.note("sweep " + key + " = " + values[i]);
    ExitStatus st = exit_error;
    std::string error;
    try {
      st = run_task(cc, inner);
    } catch (const std::exception& e) {
      error = e.what();
    }
    c.out.absorb(w);
    Json r{{"dir", dir}, {"value", values[i]}, {"status", static_cast<int>(st)}};
    if (!error.empty())
      r["error"] = error;
    runs.push_back(r);
    if (st == exit_error || (st == exit_fail && worst == exit_pass))
      worst = st;
  }
  c.out.write_json("sweep.json", Json{{"task", inner}, {"key", key}, {"runs", runs}});
  return worst;
}

inline ExitStatus run_task(Context& c, const std::string& task)
{
  if (task == "solve")
    return task_solve(c);
  if (task == "verify_claim")
    return task_verify_claim(c);
  if (task == "verify_barrier")
    return task_verify_barrier(c);
  if (task == "verify_covering")
    return task_verify_covering(c);
  if (task == "radial")
    return task_radial(c);
  if (task == "perron")
    return task_perron(c);
  if (task == "exhaustion")
    return task_exhaustion(c);
  if (task == "sweep")
    return task_sweep(c);
  throw ConfigError(c.cfg.where("run.task") + ": unknown task '" + task + "'");
}

} // namespace cli

/// Runs the task named by run.task and writes its artifacts plus manifest.json into opt.out.
/// Returns 0 on pass, 2 when a verification fails; errors propagate as exceptions.
inline int run(const Config& cfg, const RunOptions& opt, std::ostream& log = std::cerr)
{
  const auto t0 = std::chrono::steady_clock::now();
  const std::string task = cfg.get_string("run.task");
  std::uint64_t seed = 1;
  if (opt.seed)
    seed = *opt.seed;
  else if (cfg.has("run.seed")) {
    const long long s = cfg.get_int("run.seed");
    if (s < 0)
      throw ConfigError(cfg.where("run.seed") + ": must be nonnegative");
    seed = static_cast<std::uint64_t>(s);
  }
  ArtifactWriter out(opt.out);
  cli::Context ctx{cfg, out, seed, opt.verbose, log};
  const ExitStatus st = cli::run_task(ctx, task);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  Json m;
  m["tool"] = "hkflow";
  m["version"] = version;
  m["task"] = task;
  m["seed"] = seed;
  m["status"] = static_cast<int>(st);
  m["config_source"] = cfg.source();
  m["config"] = cfg.echo();
  m["libraries"] = {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                  std::to_string(EIGEN_MINOR_VERSION)},
                    {"boost", BOOST_LIB_VERSION},
                    {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                                          "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                    {"openssl", OPENSSL_VERSION_TEXT}};
  m["wall_time_seconds"] = wall;
  m["artifacts"] = out.listing();
  ArtifactWriter(opt.out).write_json("manifest.json", m);
  return st;
}

} // namespace hkflow

#endif
