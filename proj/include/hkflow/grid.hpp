#ifndef HKFLOW_GRID_HPP
#define HKFLOW_GRID_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <ostream>
#include <vector>

#include "domain.hpp"

namespace hkflow {

enum class NodeClass { interior, boundary_cut, exterior };

inline const char* to_string(NodeClass c)
{
  switch (c) {
  case NodeClass::interior:
    return "interior";
  case NodeClass::boundary_cut:
    return "boundary_cut";
  default:
    return "exterior";
  }
}

/// Linear combination of degrees of freedom.
struct Stencil {
  std::vector<int> index;
  std::vector<double> weight;

  void add(int i, double w)
  {
    for (std::size_t k = 0; k < index.size(); ++k)
      if (index[k] == i) {
        weight[k] += w;
        return;
      }
    index.push_back(i);
    weight.push_back(w);
  }

  void add(const Stencil& s, double scale)
  {
    for (std::size_t k = 0; k < s.index.size(); ++k)
      add(s.index[k], scale * s.weight[k]);
  }

  double apply(const Eigen::VectorXd& v) const
  {
    double acc = 0.0;
    for (std::size_t k = 0; k < index.size(); ++k)
      acc += weight[k] * v(index[k]);
    return acc;
  }
};

/// Neighbour reached along one axis direction: either a grid node or a boundary point.
struct Arm {
  int target;
  double length;
};

/// Uniform lattice {h * z : z integer} restricted to a bounded domain.
///
/// Degrees of freedom are numbered as follows: [0, U) are the lattice nodes inside the
/// domain, [U, U + B) are the points where a grid line leaves the domain.  The latter
/// carry Dirichlet data.
class Grid {
public:
  Grid(const DomainSpec& domain, double h) : domain_(domain), h_(h), n_(domain.dim())
  {
    if (!(h > 0))
      throw Error("grid spacing must be positive");
    if (!is_bounded(domain))
      throw Error("unbounded domain requires truncation");
    build();
  }

  int dim() const { return n_; }
  double spacing() const { return h_; }
  const DomainSpec& domain() const { return domain_; }

  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_boundary() const { return static_cast<int>(bpoints_.size()); }
  int num_dofs() const { return num_nodes() + num_boundary(); }
  bool is_node(int dof) const { return dof < num_nodes(); }

  const Point& position(int dof) const
  {
    return dof < num_nodes() ? nodes_[dof].x : bpoints_[dof - num_nodes()].x;
  }

  NodeClass node_class(int node) const { return nodes_[node].cls; }
  const std::vector<int>& multi_index(int node) const { return nodes_[node].z; }

  /// dir = 0 for the negative direction, 1 for the positive one.
  const Arm& arm(int node, int axis, int dir) const { return nodes_[node].arms[2 * axis + dir]; }

  const Stencil& gradient_stencil(int node, int i) const { return nodes_[node].grad[i]; }
  const Stencil& hessian_stencil(int node, int i, int j) const { return nodes_[node].hess[i * n_ + j]; }
  bool hessian_available(int node) const { return nodes_[node].hessian_ok; }
  bool hessian_ok() const { return hessian_ok_; }

  /// Node owning the cut arm that produced boundary dof b.
  int boundary_owner(int dof) const { return bpoints_[dof - num_nodes()].owner; }

  /// Node id of a lattice point, or -1 when it is exterior or off the lattice.
  int find_node(const std::vector<int>& z) const
  {
    const long key = lattice_key(z);
    if (key < 0)
      return -1;
    return lattice_[key];
  }

  /// Classification counts over the whole lattice bounding box.
  std::array<int, 3> class_counts() const
  {
    std::array<int, 3> c{0, 0, 0};
    for (const auto& nd : nodes_)
      ++c[static_cast<int>(nd.cls)];
    c[2] = static_cast<int>(lattice_.size()) - num_nodes();
    return c;
  }

  long lattice_size() const { return static_cast<long>(lattice_.size()); }

private:
  struct Node {
    std::vector<int> z;
    Point x;
    NodeClass cls = NodeClass::interior;
    std::vector<Arm> arms;
    std::vector<Stencil> grad;
    std::vector<Stencil> hess;
    bool hessian_ok = true;
  };
  struct BoundaryPoint {
    Point x;
    int owner;
  };

  bool inside(const Point& x) const { return signed_distance(domain_, x) > 1e-10 * h_; }

  long lattice_key(const std::vector<int>& z) const
  {
    long key = 0;
    for (int i = n_ - 1; i >= 0; --i) {
      const int off = z[i] - zmin_[i];
      if (off < 0 || off >= extent_[i])
        return -1;
      key = key * extent_[i] + off;
    }
    return key;
  }

  void build()
  {
    const BoundingBox bb = bounding_box(domain_);
    zmin_.resize(n_);
    extent_.resize(n_);
    long total = 1;
    for (int i = 0; i < n_; ++i) {
      zmin_[i] = static_cast<int>(std::floor(bb.lo(i) / h_)) - 1;
      const int zmax = static_cast<int>(std::ceil(bb.hi(i) / h_)) + 1;
      extent_[i] = zmax - zmin_[i] + 1;
      total *= extent_[i];
    }
    if (total > 50'000'000)
      throw Error("grid too large");
    lattice_.assign(total, -1);

    std::vector<int> z(n_);
    Point x(n_);
    for (long key = 0; key < total; ++key) {
      long rem = key;
      for (int i = 0; i < n_; ++i) {
        z[i] = zmin_[i] + static_cast<int>(rem % extent_[i]);
        rem /= extent_[i];
        x(i) = z[i] * h_;
      }
      if (inside(x)) {
        lattice_[key] = static_cast<int>(nodes_.size());
        nodes_.push_back(Node{z, x});
      }
    }

    // Arms: neighbouring node or bisected boundary crossing.
    std::vector<std::pair<int, Point>> cuts;
    for (int id = 0; id < num_nodes(); ++id) {
      Node& nd = nodes_[id];
      nd.arms.resize(2 * n_);
      for (int i = 0; i < n_; ++i)
        for (int dir = 0; dir < 2; ++dir) {
          std::vector<int> zn = nd.z;
          zn[i] += dir ? 1 : -1;
          const int nb = find_node(zn);
          if (nb >= 0) {
            nd.arms[2 * i + dir] = Arm{nb, h_};
            continue;
          }
          nd.cls = NodeClass::boundary_cut;
          const double sgn = dir ? 1.0 : -1.0;
          double lo = 0.0, hi = h_;
          for (int it = 0; it < 64; ++it) {
            const double mid = 0.5 * (lo + hi);
            Point y = nd.x;
            y(i) += sgn * mid;
            (inside(y) ? lo : hi) = mid;
          }
          const double len = std::max(hi, 1e-12 * h_);
          Point y = nd.x;
          y(i) += sgn * len;
          nd.arms[2 * i + dir] = Arm{-1 - static_cast<int>(cuts.size()), len};
          cuts.emplace_back(id, y);
        }
    }
    const int U = num_nodes();
    for (auto& nd : nodes_)
      for (auto& a : nd.arms)
        if (a.target < 0)
          a.target = U + (-1 - a.target);
    for (auto& [owner, y] : cuts)
      bpoints_.push_back(BoundaryPoint{y, owner});

    for (int id = 0; id < U; ++id)
      build_first_and_second(id);
    for (int id = 0; id < U; ++id)
      build_cross(id);
    hessian_ok_ = std::all_of(nodes_.begin(), nodes_.end(), [](const Node& nd) { return nd.hessian_ok; });
  }

  void build_first_and_second(int id)
  {
    Node& nd = nodes_[id];
    nd.grad.assign(n_, Stencil{});
    nd.hess.assign(n_ * n_, Stencil{});
    for (int i = 0; i < n_; ++i) {
      const Arm& m = nd.arms[2 * i];
      const Arm& p = nd.arms[2 * i + 1];
      const double hm = m.length, hp = p.length;
      Stencil& g = nd.grad[i];
      g.add(m.target, -hp / (hm * (hm + hp)));
      g.add(id, (hp - hm) / (hm * hp));
      g.add(p.target, hm / (hp * (hm + hp)));
      Stencil& s = nd.hess[i * n_ + i];
      s.add(m.target, 2.0 / (hm * (hm + hp)));
      s.add(id, -2.0 / (hm * hp));
      s.add(p.target, 2.0 / (hp * (hm + hp)));
    }
  }

  // D_i applied to the neighbours' D_j stencils.  Returns 2 for a centred difference,
  // 1 for a one-sided one and 0 when neither i-neighbour is a grid node.
  int cross_candidate(int id, int i, int j, Stencil& out) const
  {
    const Node& nd = nodes_[id];
    const int U = num_nodes();
    const Arm& m = nd.arms[2 * i];
    const Arm& p = nd.arms[2 * i + 1];
    const bool mn = m.target < U, pn = p.target < U;
    if (mn && pn) {
      out.add(nodes_[p.target].grad[j], 1.0 / (2 * h_));
      out.add(nodes_[m.target].grad[j], -1.0 / (2 * h_));
      return 2;
    }
    if (pn) {
      out.add(nodes_[p.target].grad[j], 1.0 / h_);
      out.add(nd.grad[j], -1.0 / h_);
      return 1;
    }
    if (mn) {
      out.add(nd.grad[j], 1.0 / h_);
      out.add(nodes_[m.target].grad[j], -1.0 / h_);
      return 1;
    }
    return 0;
  }

  void build_cross(int id)
  {
    Node& nd = nodes_[id];
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j) {
        Stencil sij, sji;
        const int qij = cross_candidate(id, i, j, sij);
        const int qji = cross_candidate(id, j, i, sji);
        Stencil s;
        if (qij == 0 && qji == 0) {
          nd.hessian_ok = false;
        } else if (qij == qji) {
          s.add(sij, 0.5);
          s.add(sji, 0.5);
        } else {
          s = qij > qji ? sij : sji;
        }
        nd.hess[i * n_ + j] = s;
        nd.hess[j * n_ + i] = s;
      }
  }

  DomainSpec domain_;
  double h_;
  int n_;
  std::vector<int> zmin_;
  std::vector<int> extent_;
  std::vector<int> lattice_;
  std::vector<Node> nodes_;
  std::vector<BoundaryPoint> bpoints_;
  bool hessian_ok_ = true;
};

inline std::shared_ptr<const Grid> classify_nodes(const DomainSpec& domain, double h)
{
  return std::make_shared<const Grid>(domain, h);
}

/// Nodal values on every degree of freedom of a grid.
struct ScalarField {
  std::shared_ptr<const Grid> grid;
  Eigen::VectorXd values;

  ScalarField() = default;
  ScalarField(std::shared_ptr<const Grid> g, Eigen::VectorXd v) : grid(std::move(g)), values(std::move(v))
  {
    if (values.size() != grid->num_dofs())
      throw Error("field size does not match grid");
  }
  explicit ScalarField(std::shared_ptr<const Grid> g) : grid(std::move(g)), values(Eigen::VectorXd::Zero(grid->num_dofs())) {}

  static ScalarField from_function(std::shared_ptr<const Grid> g, const std::function<double(const Point&)>& f)
  {
    Eigen::VectorXd v(g->num_dofs());
    for (int k = 0; k < g->num_dofs(); ++k)
      v(k) = f(g->position(k));
    return ScalarField(std::move(g), std::move(v));
  }

  double operator()(int dof) const { return values(dof); }
  int size() const { return static_cast<int>(values.size()); }
};

inline void require_same_grid(const ScalarField& a, const ScalarField& b)
{
  if (a.grid != b.grid && !(a.grid && b.grid && a.grid->num_dofs() == b.grid->num_dofs() &&
                            a.grid->spacing() == b.grid->spacing()))
    throw Error("fields live on different grids");
}

/// index, x1..xn, class, arm1..armn (shorter arm per axis).
inline void write_grid_csv(std::ostream& os, const Grid& g)
{
  const int n = g.dim();
  os << "index";
  for (int i = 1; i <= n; ++i)
    os << ",x" << i;
  os << ",class";
  for (int i = 1; i <= n; ++i)
    os << ",arm" << i;
  os << '\n' << std::setprecision(17);
  for (int k = 0; k < g.num_nodes(); ++k) {
    os << k;
    for (int i = 0; i < n; ++i)
      os << ',' << g.position(k)(i);
    os << ',' << to_string(g.node_class(k));
    for (int i = 0; i < n; ++i)
      os << ',' << std::min(g.arm(k, i, 0).length, g.arm(k, i, 1).length);
    os << '\n';
  }
}

/// x1..xn, u over all degrees of freedom (grid nodes, then boundary points).
inline void write_field_csv(std::ostream& os, const ScalarField& u, const char* value_name = "u")
{
  const int n = u.grid->dim();
  for (int i = 1; i <= n; ++i)
    os << 'x' << i << ',';
  os << value_name << '\n' << std::setprecision(17);
  for (int k = 0; k < u.size(); ++k) {
    for (int i = 0; i < n; ++i)
      os << u.grid->position(k)(i) << ',';
    os << u(k) << '\n';
  }
}

} // namespace hkflow

#endif
