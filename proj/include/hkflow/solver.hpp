#ifndef HKFLOW_SOLVER_HPP
#define HKFLOW_SOLVER_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/SparseLU>

#include "operator.hpp"

namespace hkflow {

struct SolveOptions {
  double tolerance = 1e-10;
  int max_steps = 50;
  double armijo = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 40;
  /// Newton steps and merit on Q u / W^3 instead of Q u (helps with steep data).
  bool scaled_residual = false;
  bool alpha_continuation = true;
  bool data_ramp = true;
  int max_ramp_halvings = 12;
  /// Start from the harmonic extension and the minimal-mode solution; otherwise start
  /// from the values passed in.
  bool harmonic_start = true;
  bool check_volume = true;
  /// Residuals below this multiple of the floating-point noise level count as converged.
  double roundoff_factor = 64.0;
};

struct SolveReport {
  int iterations = 0;
  std::vector<double> residual_history;
  double final_residual = std::numeric_limits<double>::infinity();
  double quadratic_constant = 0.0;
  double max_interior_gradient = 0.0;
  double max_boundary_gradient = 0.0;
  int alpha_steps = 0;
  int ramp_steps = 0;
  std::vector<std::string> warnings;
};

namespace detail {

inline Eigen::SparseMatrix<double> selection(const std::vector<int>& idx, int N)
{
  Eigen::SparseMatrix<double> S(static_cast<Eigen::Index>(idx.size()), N);
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i)
    t.emplace_back(static_cast<int>(i), idx[i], 1.0);
  S.setFromTriplets(t.begin(), t.end());
  return S;
}

inline double free_sup(const Eigen::VectorXd& r, const std::vector<int>& idx)
{
  double m = 0.0;
  for (int i : idx)
    m = std::max(m, std::abs(r(i)));
  return m;
}

inline Eigen::VectorXd gather(const Eigen::VectorXd& v, const std::vector<int>& idx)
{
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = v(idx[i]);
  return out;
}

inline std::vector<int> free_indices(const Grid& g, const std::vector<char>& free)
{
  std::vector<int> idx;
  for (int k = 0; k < g.num_nodes(); ++k)
    if (free.empty() || free[k])
      idx.push_back(k);
  return idx;
}

struct NewtonOutcome {
  bool converged = false;
  std::string reason;
};

/// Damped Newton on the free nodes; all other degrees of freedom stay fixed.
inline NewtonOutcome newton(ScalarField& u, const std::vector<int>& idx, const OperatorParams& params, Mode mode,
                            const SolveOptions& opt, SolveReport& rep)
{
  const Grid& g = *u.grid;
  const Form form = opt.scaled_residual ? Form::divergence : Form::nondivergence;
  if (idx.empty())
    return {true, ""};
  const Eigen::SparseMatrix<double> S = selection(idx, g.num_dofs());
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  bool analyzed = false;

  auto measure = [&](const ScalarField& v) { return free_sup(residual_Q(v, params, Form::nondivergence, mode).values, idx); };
  auto target = [&](const ScalarField& v) { return std::max(opt.tolerance, opt.roundoff_factor * residual_roundoff(v, params, mode)); };

  double sup = measure(u);
  rep.residual_history.push_back(sup);
  for (int step = 0; step < opt.max_steps; ++step) {
    if (!std::isfinite(sup))
      return {false, "non-finite iterate"};
    if (sup <= opt.tolerance || sup <= target(u)) {
      rep.final_residual = sup;
      return {true, ""};
    }
    LinearSystem sys = linearize_Q(u, params, form, mode);
    const Eigen::SparseMatrix<double> A = S * sys.matrix * S.transpose();
    const Eigen::VectorXd rhs = S * sys.rhs;
    if (!analyzed) {
      lu.analyzePattern(A);
      analyzed = true;
    }
    lu.factorize(A);
    if (lu.info() != Eigen::Success)
      return {false, "singular Jacobian"};
    const Eigen::VectorXd delta = lu.solve(rhs);
    if (!delta.allFinite())
      return {false, "non-finite iterate"};

    const double merit0 = rhs.squaredNorm();
    double t = 1.0;
    bool accepted = false;
    ScalarField trial = u;
    for (int bt = 0; bt <= opt.max_backtracks; ++bt) {
      trial.values = u.values;
      for (std::size_t i = 0; i < idx.size(); ++i)
        trial.values(idx[i]) += t * delta(static_cast<Eigen::Index>(i));
      const Eigen::VectorXd r = gather(residual_Q(trial, params, form, mode).values, idx);
      const double merit = r.squaredNorm();
      if (std::isfinite(merit) && merit <= (1.0 - 2.0 * opt.armijo * t) * merit0) {
        accepted = true;
        break;
      }
      t *= opt.backtrack;
    }
    ++rep.iterations;
    if (!accepted) {
      // A full step that lands at round-off level may fail the merit test.
      trial.values = u.values;
      for (std::size_t i = 0; i < idx.size(); ++i)
        trial.values(idx[i]) += delta(static_cast<Eigen::Index>(i));
      const double s = measure(trial);
      if (std::isfinite(s) && s <= target(trial)) {
        u = trial;
        rep.residual_history.push_back(s);
        rep.final_residual = s;
        return {true, ""};
      }
      return {false, "line search failed"};
    }
    u = trial;
    sup = measure(u);
    rep.residual_history.push_back(sup);
  }
  if (sup <= target(u)) {
    rep.final_residual = sup;
    return {true, ""};
  }
  return {false, "no convergence within the step limit"};
}

/// Discrete Laplace extension of the fixed values into the free nodes.
inline void harmonic_extension(ScalarField& u, const std::vector<int>& idx)
{
  const Grid& g = *u.grid;
  if (idx.empty())
    return;
  std::vector<int> pos(g.num_dofs(), -1);
  for (std::size_t i = 0; i < idx.size(); ++i)
    pos[idx[i]] = static_cast<int>(i);
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const int k = idx[i];
    Stencil lap;
    for (int a = 0; a < g.dim(); ++a)
      lap.add(g.hessian_stencil(k, a, a), 1.0);
    for (std::size_t t = 0; t < lap.index.size(); ++t) {
      const int c = lap.index[t];
      if (pos[c] >= 0)
        trip.emplace_back(static_cast<int>(i), pos[c], lap.weight[t]);
      else
        rhs(static_cast<Eigen::Index>(i)) -= lap.weight[t] * u.values(c);
    }
  }
  Eigen::SparseMatrix<double> A(rhs.size(), rhs.size());
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu(A);
  if (lu.info() != Eigen::Success)
    throw Error("harmonic extension: singular Laplacian");
  const Eigen::VectorXd x = lu.solve(rhs);
  for (std::size_t i = 0; i < idx.size(); ++i)
    u.values(idx[i]) = x(static_cast<Eigen::Index>(i));
}

inline std::string history_string(const std::vector<double>& h)
{
  std::ostringstream os;
  os.precision(3);
  for (std::size_t i = 0; i < h.size(); ++i)
    os << (i ? ", " : "") << h[i];
  return os.str();
}

inline double fit_quadratic_constant(const std::vector<double>& h)
{
  double C = 0.0;
  for (std::size_t i = 0; i + 1 < h.size(); ++i)
    if (h[i] < 1e-2 && h[i] > 0 && h[i + 1] > 1e-10)
      C = std::max(C, h[i + 1] / (h[i] * h[i]));
  return C;
}

/// Target-alpha solve with continuation fallbacks.  Returns false if every path failed.
inline bool solve_with_fallbacks(ScalarField& u, const std::vector<int>& idx, const OperatorParams& params, Mode mode,
                                 const SolveOptions& opt, SolveReport& rep, std::string& why)
{
  const ScalarField start = u;
  NewtonOutcome out = newton(u, idx, params, mode, opt, rep);
  if (out.converged)
    return true;
  why = out.reason;

  if (opt.alpha_continuation && mode == Mode::translator && params.alpha != 1.0) {
    u = start;
    double a = 1.0;
    bool ok = true;
    while (true) {
      ++rep.alpha_steps;
      if (!newton(u, idx, OperatorParams{params.n, a}, mode, opt, rep).converged) {
        ok = false;
        break;
      }
      if (a == params.alpha)
        break;
      a = params.alpha > a ? std::min(params.alpha, 2 * a) : std::max(params.alpha, 0.5 * a);
    }
    if (ok)
      return true;
    why += "; alpha continuation failed";
  }

  if (opt.data_ramp) {
    // Ramp the fixed data from zero: g_t = t g.
    Eigen::VectorXd data = start.values;
    std::vector<char> is_free(start.size(), 0);
    for (int k : idx)
      is_free[k] = 1;
    auto set_data = [&](double t) {
      for (int k = 0; k < u.size(); ++k)
        if (!is_free[k])
          u.values(k) = t * data(k);
    };
    u.values.setZero();
    if (!newton(u, idx, params, mode, opt, rep).converged) {
      why += "; zero-data solve failed";
      return false;
    }
    double t = 0.0, dt = 0.25;
    int halvings = 0;
    while (t < 1.0) {
      const double tn = std::min(1.0, t + dt);
      const ScalarField save = u;
      set_data(tn);
      ++rep.ramp_steps;
      if (newton(u, idx, params, mode, opt, rep).converged) {
        t = tn;
        dt = std::min(0.5, 1.5 * dt);
      } else {
        u = save;
        dt *= 0.5;
        if (++halvings > opt.max_ramp_halvings) {
          why += "; data ramp failed";
          return false;
        }
      }
    }
    return true;
  }
  return false;
}

} // namespace detail

/// Solves Q u = 0 at the free grid nodes (all nodes when `free` is empty); the values of
/// every other degree of freedom in `u` are Dirichlet data.
inline SolveReport solve_fixed(ScalarField& u, const std::vector<char>& free, const OperatorParams& params, Mode mode,
                               const SolveOptions& opt = {})
{
  params.validate();
  if (!(opt.tolerance > 0))
    throw Error("solver tolerance must be positive");
  const Grid& g = *u.grid;
  detail::require_hessians(g);
  const std::vector<int> idx = detail::free_indices(g, free);
  SolveReport rep;
  if (mode == Mode::translator && opt.check_volume && is_bounded(g.domain())) {
    const VolumeCheck vc = check_volume_condition(g.domain());
    if (!vc.satisfied)
      rep.warnings.push_back("volume condition |Omega| < n^n alpha_n not met; no existence claim");
  }

  std::string why;
  if (opt.harmonic_start) {
    detail::harmonic_extension(u, idx);
    if (mode == Mode::translator) {
      ScalarField v = u;
      SolveReport tmp;
      std::string w;
      SolveOptions mopt = opt;
      mopt.data_ramp = false;
      if (detail::solve_with_fallbacks(v, idx, params, Mode::minimal, mopt, tmp, w)) {
        u = v;
        rep.iterations += tmp.iterations;
      } else {
        rep.warnings.push_back("minimal-mode start failed; starting from harmonic extension");
      }
    }
  }
  const std::size_t hist0 = rep.residual_history.size();
  if (!detail::solve_with_fallbacks(u, idx, params, mode, opt, rep, why))
    throw Error("Newton solve failed (" + why + "); residual history: " + detail::history_string(rep.residual_history));
  rep.quadratic_constant = detail::fit_quadratic_constant(
      std::vector<double>(rep.residual_history.begin() + static_cast<long>(hist0), rep.residual_history.end()));
  return rep;
}

struct GradientReport {
  double max_interior = 0.0;
  double max_boundary = 0.0;
  double h = 0.0;
  bool max_principle_ok = false;
};

/// Max |Du| over nodes with all neighbours in the grid, and over nodes next to the boundary.
inline GradientReport gradient_diagnostics(const ScalarField& u)
{
  const Grid& g = *u.grid;
  GradientReport r;
  r.h = g.spacing();
  for (int k = 0; k < g.num_nodes(); ++k) {
    double s = 0.0;
    for (int i = 0; i < g.dim(); ++i)
      s += std::pow(g.gradient_stencil(k, i).apply(u.values), 2);
    s = std::sqrt(s);
    if (g.node_class(k) == NodeClass::interior)
      r.max_interior = std::max(r.max_interior, s);
    else
      r.max_boundary = std::max(r.max_boundary, s);
  }
  r.max_principle_ok = r.max_interior <= r.max_boundary + 10 * g.spacing();
  return r;
}

/// Max |Du| over grid nodes satisfying a predicate.
inline double gradient_max_where(const ScalarField& u, const std::function<bool(const Point&)>& pred)
{
  const Grid& g = *u.grid;
  double m = 0.0;
  for (int k = 0; k < g.num_nodes(); ++k) {
    if (!pred(g.position(k)))
      continue;
    double s = 0.0;
    for (int i = 0; i < g.dim(); ++i)
      s += std::pow(g.gradient_stencil(k, i).apply(u.values), 2);
    m = std::max(m, std::sqrt(s));
  }
  return m;
}

inline std::pair<ScalarField, SolveReport> solve_dirichlet(std::shared_ptr<const Grid> grid, const ScalarFunction& phi,
                                                           const OperatorParams& params, Mode mode = Mode::translator,
                                                           const SolveOptions& opt = {})
{
  ScalarField u(grid);
  for (int b = grid->num_nodes(); b < grid->num_dofs(); ++b)
    u.values(b) = phi(grid->position(b));
  if (!opt.harmonic_start)
    for (int k = 0; k < grid->num_nodes(); ++k)
      u.values(k) = phi(grid->position(k));
  SolveReport rep = solve_fixed(u, {}, params, mode, opt);
  const GradientReport gr = gradient_diagnostics(u);
  rep.max_interior_gradient = gr.max_interior;
  rep.max_boundary_gradient = gr.max_boundary;
  return {std::move(u), std::move(rep)};
}

inline std::pair<ScalarField, SolveReport> solve_dirichlet(const DomainSpec& domain, double h, const ScalarFunction& phi,
                                                           const OperatorParams& params, Mode mode = Mode::translator,
                                                           const SolveOptions& opt = {})
{
  return solve_dirichlet(classify_nodes(domain, h), phi, params, mode, opt);
}

struct Comparison {
  bool leq;
  double max_violation; // max(u1 - u2)
};

inline Comparison compare_fields(const ScalarField& u1, const ScalarField& u2, double slack = 1e-8)
{
  if (u1.grid != u2.grid)
    throw Error("fields live on different grids");
  const double v = (u1.values - u2.values).maxCoeff();
  return {v <= slack, v};
}

/// Radially symmetric solution: table of (r, u, u') from r = 0 with a cubic Hermite interpolant.
struct RadialProfile {
  int n = 2;
  double alpha = 1.0;
  std::vector<double> r, u, du;

  double step() const { return r.size() > 1 ? r[1] - r[0] : 0.0; }

  double value(double x) const { return interpolate(x).first; }

  std::pair<double, double> interpolate(double x) const
  {
    if (x < 0 || x > r.back() * (1 + 1e-12))
      throw Error("radius outside the radial profile table");
    const double h = step();
    std::size_t i = std::min(static_cast<std::size_t>(x / h), r.size() - 2);
    const double t = (x - r[i]) / h;
    const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
    const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
    const double val = h00 * u[i] + h10 * h * du[i] + h01 * u[i + 1] + h11 * h * du[i + 1];
    const double d00 = 6 * t * t - 6 * t, d10 = 3 * t * t - 4 * t + 1, d01 = -d00, d11 = 3 * t * t - 2 * t;
    const double der = (d00 * u[i] + d01 * u[i + 1]) / h + d10 * du[i] + d11 * du[i + 1];
    return {val, der};
  }
};

/// u'' = -(n-1) W^2 u'/r - W^(3-alpha), u(0) = u0, u'(0) = 0, with u''(0) = -1/n.
inline RadialProfile radial_oracle(const OperatorParams& params, double u0, double rmax, double step)
{
  params.validate();
  if (!(rmax > 0) || !(step > 0))
    throw Error("radial oracle needs rmax > 0 and step > 0");
  const int n = params.n;
  const double alpha = params.alpha;
  auto rhs = [&](double r, double p) {
    const double q = 1.0 + p * p;
    if (r == 0.0)
      return -1.0 / n;
    return -(n - 1) * q * p / r - std::pow(q, 0.5 * (3.0 - alpha));
  };
  const int steps = static_cast<int>(std::ceil(rmax / step - 1e-9));
  const double h = rmax / steps;
  RadialProfile prof{n, alpha, {}, {}, {}};
  prof.r.reserve(steps + 1);
  double r = 0.0, u = u0, p = 0.0;
  prof.r.push_back(r), prof.u.push_back(u), prof.du.push_back(p);
  for (int s = 0; s < steps; ++s) {
    const double k1u = p, k1p = rhs(r, p);
    const double k2u = p + 0.5 * h * k1p, k2p = rhs(r + 0.5 * h, p + 0.5 * h * k1p);
    const double k3u = p + 0.5 * h * k2p, k3p = rhs(r + 0.5 * h, p + 0.5 * h * k2p);
    const double k4u = p + h * k3p, k4p = rhs(r + h, p + h * k3p);
    u += h / 6 * (k1u + 2 * k2u + 2 * k3u + k4u);
    p += h / 6 * (k1p + 2 * k2p + 2 * k3p + k4p);
    r = (s + 1) * h;
    if (!std::isfinite(u) || !std::isfinite(p))
      throw Error("radial oracle diverged");
    prof.r.push_back(r), prof.u.push_back(u), prof.du.push_back(p);
  }
  return prof;
}

/// Grid field x -> profile(|x - center|).
inline ScalarField radial_field(std::shared_ptr<const Grid> g, const RadialProfile& prof, const Point& center)
{
  return ScalarField::from_function(std::move(g), [&](const Point& x) { return prof.value((x - center).norm()); });
}

} // namespace hkflow

#endif
