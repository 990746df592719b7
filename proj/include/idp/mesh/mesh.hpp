#pragma once

#include "idp/core/errors.hpp"
#include "idp/core/state.hpp"
#include "idp/mesh/sparsity.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

namespace idp {

/// Boundary treatment of a degree of freedom.
///  - slip: v.n = 0 in both substeps.
///  - noslip: v.n = 0 in the hyperbolic substep, v = 0 in the parabolic one.
///  - dirichlet: all conserved quantities prescribed.
enum class BoundaryKind { interior, dirichlet, slip, noslip };

inline const char* to_string(BoundaryKind k) {
  switch (k) {
    case BoundaryKind::interior: return "interior";
    case BoundaryKind::dirichlet: return "dirichlet";
    case BoundaryKind::slip: return "slip";
    case BoundaryKind::noslip: return "noslip";
  }
  return "?";
}

inline BoundaryKind boundary_kind_from_string(const std::string& s) {
  if (s == "dirichlet") return BoundaryKind::dirichlet;
  if (s == "slip") return BoundaryKind::slip;
  if (s == "noslip" || s == "wall") return BoundaryKind::noslip;
  throw ConfigError("unknown boundary tag '" + s + "' (expected dirichlet, slip or noslip)");
}

/// Optional per-node annotation carried by mesh files.
struct NodeTag {
  bool has_kind = false;
  BoundaryKind kind = BoundaryKind::interior;
  int periodic_partner = -1;
};

/// P1 simplicial mesh (segments in 1D, triangles in 2D) together with its
/// degree-of-freedom topology. Periodic node pairs are identified into a
/// single dof; every field and operator is indexed by dof, while cells keep
/// their geometric node indices.
template <int dim>
class MeshTopology {
 public:
  static_assert(dim == 1 || dim == 2, "only 1D segments and 2D triangles are supported");
  static constexpr int nodes_per_cell = dim + 1;
  using Cell = std::array<int, nodes_per_cell>;

  MeshTopology() = default;
  MeshTopology(std::vector<Vec<dim>> nodes, std::vector<Cell> cells,
               std::vector<NodeTag> tags = {})
      : nodes_(std::move(nodes)), cells_(std::move(cells)), tags_(std::move(tags)) {
    if (tags_.empty()) tags_.resize(nodes_.size());
    if (tags_.size() != nodes_.size()) throw MeshError("tag table size does not match node count");
  }

  const std::vector<Vec<dim>>& nodes() const { return nodes_; }
  const std::vector<Cell>& cells() const { return cells_; }
  const std::vector<NodeTag>& tags() const { return tags_; }
  int n_nodes() const { return static_cast<int>(nodes_.size()); }
  int n_cells() const { return static_cast<int>(cells_.size()); }

  /// Tag every node satisfying `pred` (typically a boundary locator).
  void set_kind_where(const std::function<bool(const Vec<dim>&)>& pred, BoundaryKind kind) {
    for (int i = 0; i < n_nodes(); ++i)
      if (pred(nodes_[i])) {
        tags_[i].has_kind = true;
        tags_[i].kind = kind;
      }
  }

  void set_periodic_pair(int a, int b) {
    tags_.at(a).periodic_partner = b;
    tags_.at(b).periodic_partner = a;
  }

  /// Compute dof identification, stencils, and boundary sets. Untagged
  /// boundary dofs receive `default_kind`.
  void finalize(BoundaryKind default_kind = BoundaryKind::noslip) {
    validate_cells();
    build_dof_map();

    std::vector<std::set<int>> rows(n_dofs_);
    for (int i = 0; i < n_dofs_; ++i) rows[i].insert(i);
    for (const auto& cell : cells_)
      for (int a : cell)
        for (int b : cell) rows[dof_of_node_[a]].insert(dof_of_node_[b]);
    graph_ = SparsityGraph(rows);

    // Boundary facets are those owned by a single cell after identification.
    boundary_.assign(n_dofs_, false);
    std::map<std::vector<int>, int> facet_count;
    for (const auto& cell : cells_) {
      for (int skip = 0; skip < nodes_per_cell; ++skip) {
        std::vector<int> facet;
        for (int a = 0; a < nodes_per_cell; ++a)
          if (a != skip) facet.push_back(dof_of_node_[cell[a]]);
        std::sort(facet.begin(), facet.end());
        ++facet_count[facet];
      }
    }
    for (const auto& [facet, count] : facet_count) {
      if (count > 2) throw MeshError("non-conforming mesh: facet shared by more than two cells");
      if (count == 1)
        for (int d : facet) boundary_[d] = true;
    }

    bc_.assign(n_dofs_, BoundaryKind::interior);
    for (int i = 0; i < n_nodes(); ++i) {
      const int d = dof_of_node_[i];
      if (!boundary_[d]) continue;
      const BoundaryKind k = tags_[i].has_kind ? tags_[i].kind : default_kind;
      if (bc_[d] == BoundaryKind::interior || precedence(k) > precedence(bc_[d])) bc_[d] = k;
    }
    finalized_ = true;
  }

  bool finalized() const { return finalized_; }
  int n_dofs() const { return n_dofs_; }
  int dof_of_node(int node) const { return dof_of_node_[node]; }
  /// Coordinates of the representative node of each dof.
  const Vec<dim>& dof_coordinates(int dof) const { return nodes_[representative_[dof]]; }
  const SparsityGraph& graph() const { return graph_; }
  bool is_boundary(int dof) const { return boundary_[dof]; }
  BoundaryKind boundary_kind(int dof) const { return bc_[dof]; }
  const std::vector<BoundaryKind>& boundary_kinds() const { return bc_; }

  /// Stencil I(i) as dof indices (includes i).
  std::vector<int> stencil(int dof) const {
    std::vector<int> out;
    for (int k = graph_.row_begin(dof); k < graph_.row_end(dof); ++k) out.push_back(graph_.col(k));
    return out;
  }

  double bounding_box_diameter() const {
    if (nodes_.empty()) return 0.0;
    Vec<dim> lo = nodes_[0], hi = nodes_[0];
    for (const auto& x : nodes_) {
      lo = lo.cwiseMin(x);
      hi = hi.cwiseMax(x);
    }
    return (hi - lo).norm();
  }

 private:
  static int precedence(BoundaryKind k) {
    switch (k) {
      case BoundaryKind::dirichlet: return 3;
      case BoundaryKind::noslip: return 2;
      case BoundaryKind::slip: return 1;
      default: return 0;
    }
  }

  void validate_cells() const {
    std::vector<bool> used(nodes_.size(), false);
    for (std::size_t c = 0; c < cells_.size(); ++c) {
      const auto& cell = cells_[c];
      for (int a = 0; a < nodes_per_cell; ++a) {
        if (cell[a] < 0 || cell[a] >= n_nodes())
          throw MeshError("cell " + std::to_string(c) + " references node " +
                          std::to_string(cell[a]) + " out of range");
        for (int b = 0; b < a; ++b)
          if (cell[a] == cell[b])
            throw MeshError("cell " + std::to_string(c) + " repeats node " + std::to_string(cell[a]));
        used[cell[a]] = true;
      }
    }
    for (std::size_t i = 0; i < used.size(); ++i)
      if (!used[i]) throw MeshError("node " + std::to_string(i) + " referenced by no cell");
  }

  void build_dof_map() {
    std::vector<int> parent(nodes_.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto root = [&](int i) {
      while (parent[i] != i) i = parent[i] = parent[parent[i]];
      return i;
    };
    for (int i = 0; i < n_nodes(); ++i) {
      const int p = tags_[i].periodic_partner;
      if (p < 0) continue;
      if (p >= n_nodes() || tags_[p].periodic_partner != i)
        throw MeshError("periodic pairing of node " + std::to_string(i) + " is not an involution");
      const int a = root(i), b = root(p);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
    dof_of_node_.assign(nodes_.size(), -1);
    representative_.clear();
    std::vector<int> dof_of_root(nodes_.size(), -1);
    for (int i = 0; i < n_nodes(); ++i) {
      const int r = root(i);
      if (dof_of_root[r] < 0) {
        dof_of_root[r] = static_cast<int>(representative_.size());
        representative_.push_back(i);
      }
      dof_of_node_[i] = dof_of_root[r];
    }
    n_dofs_ = static_cast<int>(representative_.size());
  }

  std::vector<Vec<dim>> nodes_;
  std::vector<Cell> cells_;
  std::vector<NodeTag> tags_;

  bool finalized_ = false;
  int n_dofs_ = 0;
  std::vector<int> dof_of_node_;
  std::vector<int> representative_;
  SparsityGraph graph_;
  std::vector<bool> boundary_;
  std::vector<BoundaryKind> bc_;
};

/// Uniform partition of [a, b] into N - 1 segments (N nodes).
inline MeshTopology<1> uniform_1d(double a, double b, int n_nodes, bool periodic = false) {
  if (n_nodes < 2) throw ConfigError("uniform_1d: need N >= 2 nodes, got " + std::to_string(n_nodes));
  if (!(b > a)) throw ConfigError("uniform_1d: degenerate interval");
  std::vector<Vec<1>> nodes(n_nodes);
  for (int i = 0; i < n_nodes; ++i)
    nodes[i][0] = (i == n_nodes - 1) ? b : a + (b - a) * i / (n_nodes - 1);
  std::vector<MeshTopology<1>::Cell> cells;
  for (int i = 0; i + 1 < n_nodes; ++i) cells.push_back({i, i + 1});
  MeshTopology<1> mesh(std::move(nodes), std::move(cells));
  if (periodic) {
    if (n_nodes < 3) throw ConfigError("uniform_1d: periodic mesh needs N >= 3");
    mesh.set_periodic_pair(0, n_nodes - 1);
  }
  return mesh;
}

enum class DiagonalPattern { alternating, uniform };

/// Structured triangulation of [x0,x1]x[y0,y1] with nx * ny quads, each split
/// into two right triangles. The alternating pattern flips the diagonal in a
/// checkerboard fashion.
inline MeshTopology<2> structured_tri_2d(double x0, double x1, double y0, double y1, int nx, int ny,
                                          DiagonalPattern pattern = DiagonalPattern::alternating,
                                          bool periodic_y = false) {
  if (nx < 1 || ny < 1) throw ConfigError("structured_tri_2d: nx, ny must be >= 1");
  if (!(x1 > x0) || !(y1 > y0)) throw ConfigError("structured_tri_2d: degenerate box");
  auto id = [nx](int ix, int iy) { return iy * (nx + 1) + ix; };
  std::vector<Vec<2>> nodes;
  nodes.reserve((nx + 1) * (ny + 1));
  for (int iy = 0; iy <= ny; ++iy)
    for (int ix = 0; ix <= nx; ++ix)
      nodes.emplace_back(ix == nx ? x1 : x0 + (x1 - x0) * ix / nx,
                         iy == ny ? y1 : y0 + (y1 - y0) * iy / ny);
  std::vector<MeshTopology<2>::Cell> cells;
  cells.reserve(2 * nx * ny);
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      const int a = id(ix, iy), b = id(ix + 1, iy), c = id(ix + 1, iy + 1), d = id(ix, iy + 1);
      const bool flip = pattern == DiagonalPattern::alternating && (ix + iy) % 2 == 1;
      if (!flip) {
        cells.push_back({a, b, c});
        cells.push_back({a, c, d});
      } else {
        cells.push_back({a, b, d});
        cells.push_back({b, c, d});
      }
    }
  MeshTopology<2> mesh(std::move(nodes), std::move(cells));
  if (periodic_y) {
    if (ny < 2) throw ConfigError("structured_tri_2d: periodic direction needs ny >= 2");
    for (int ix = 0; ix <= nx; ++ix) mesh.set_periodic_pair(id(ix, 0), id(ix, ny));
  }
  return mesh;
}

}  // namespace idp
