#pragma once

#include "idp/core/errors.hpp"
#include "idp/mesh/mesh.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <utility>
#include <string>
#include <unordered_map>

// ASCII mesh format:
//
//   idpmesh <dim> <n_nodes> <n_cells>
//   <x> [<y>]                     n_nodes lines
//   <i0> <i1> [<i2>]              n_cells lines, 0-based
//   boundary                      optional section
//   <node_id> <tag> [<partner>]   tag in {dirichlet, slip, noslip, periodic}
//
// Blank lines and lines starting with '#' are ignored.

namespace idp {

namespace detail {

class LineReader {
 public:
  LineReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++line_no_;
      const auto pos = line.find_first_not_of(" \t\r");
      if (pos == std::string::npos || line[pos] == '#') continue;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw MeshError(source_ + ":" + std::to_string(line_no_) + ": " + msg);
  }

  int line_no() const { return line_no_; }

 private:
  std::istream& in_;
  std::string source_;
  int line_no_ = 0;
};

template <int dim>
void check_duplicate_nodes(const std::vector<Vec<dim>>& nodes, double diameter) {
  const double tol = 1e-12 * diameter;
  if (tol <= 0.0) return;
  // Hash nodes into boxes of size tol; duplicates can only sit in adjacent boxes.
  std::map<std::array<long long, dim>, std::vector<int>> boxes;
  auto key_of = [tol](const Vec<dim>& x) {
    std::array<long long, dim> k;
    for (int d = 0; d < dim; ++d) k[d] = static_cast<long long>(std::floor(x[d] / tol));
    return k;
  };
  for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
    const auto k = key_of(nodes[i]);
    const int n_neighbors = dim == 1 ? 3 : 9;
    for (int s = 0; s < n_neighbors; ++s) {
      auto kk = k;
      kk[0] += s % 3 - 1;
      if constexpr (dim == 2) kk[1] += s / 3 - 1;
      auto it = boxes.find(kk);
      if (it == boxes.end()) continue;
      for (int j : it->second)
        if ((nodes[i] - nodes[j]).norm() <= tol)
          throw MeshError("duplicate nodes " + std::to_string(j) + " and " + std::to_string(i));
    }
    boxes[k].push_back(i);
  }
}

}  // namespace detail

/// Reads the header only, to dispatch on dimension.
inline int peek_mesh_dimension(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open mesh file '" + path + "'");
  detail::LineReader reader(in, path);
  std::string line, magic;
  int dim = 0;
  if (!reader.next(line)) reader.fail("empty file");
  std::istringstream hs(line);
  if (!(hs >> magic >> dim) || magic != "idpmesh") reader.fail("expected header 'idpmesh <dim> <n_nodes> <n_cells>'");
  return dim;
}

template <int dim>
MeshTopology<dim> read_mesh(std::istream& in, const std::string& source = "<stream>") {
  detail::LineReader reader(in, source);
  std::string line;
  if (!reader.next(line)) reader.fail("empty file");
  std::istringstream hs(line);
  std::string magic;
  int file_dim = 0;
  long long n_nodes = -1, n_cells = -1;
  if (!(hs >> magic >> file_dim >> n_nodes >> n_cells) || magic != "idpmesh")
    reader.fail("expected header 'idpmesh <dim> <n_nodes> <n_cells>'");
  if (file_dim != dim)
    reader.fail("mesh dimension " + std::to_string(file_dim) + " does not match expected " + std::to_string(dim));
  if (n_nodes < 2 || n_cells < 1) reader.fail("invalid node or cell count");

  std::vector<Vec<dim>> nodes(n_nodes);
  for (auto& x : nodes) {
    if (!reader.next(line)) reader.fail("unexpected end of file in node section");
    std::istringstream ls(line);
    for (int d = 0; d < dim; ++d)
      if (!(ls >> x[d])) reader.fail("malformed node coordinates");
    std::string extra;
    if (ls >> extra) reader.fail("too many coordinates on node line");
  }
  std::vector<typename MeshTopology<dim>::Cell> cells(n_cells);
  for (auto& c : cells) {
    if (!reader.next(line)) reader.fail("unexpected end of file in cell section");
    std::istringstream ls(line);
    for (int a = 0; a < dim + 1; ++a)
      if (!(ls >> c[a])) reader.fail("malformed cell line");
    std::string extra;
    if (ls >> extra) reader.fail("too many indices on cell line");
  }
  std::vector<NodeTag> tags(n_nodes);
  if (reader.next(line)) {
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word != "boundary") reader.fail("expected 'boundary' section, got '" + word + "'");
    while (reader.next(line)) {
      std::istringstream ts(line);
      long long id = -1;
      std::string tag;
      if (!(ts >> id >> tag)) reader.fail("malformed boundary line");
      if (id < 0 || id >= n_nodes) reader.fail("boundary node id out of range");
      if (tag == "periodic") {
        long long partner = -1;
        if (!(ts >> partner) || partner < 0 || partner >= n_nodes) reader.fail("periodic tag needs a valid partner id");
        // One line pairs both nodes; a repeated line in the other direction is accepted.
        for (const auto& [a, b] : {std::pair{id, partner}, std::pair{partner, id}}) {
          if (tags[a].periodic_partner >= 0 && tags[a].periodic_partner != b)
            reader.fail("node " + std::to_string(a) + " already has periodic partner " +
                        std::to_string(tags[a].periodic_partner));
          tags[a].periodic_partner = static_cast<int>(b);
        }
      } else {
        try {
          tags[id].kind = boundary_kind_from_string(tag);
        } catch (const ConfigError& e) {
          reader.fail(e.what());
        }
        tags[id].has_kind = true;
      }
    }
  }
  MeshTopology<dim> mesh(std::move(nodes), std::move(cells), std::move(tags));
  detail::check_duplicate_nodes<dim>(mesh.nodes(), mesh.bounding_box_diameter());
  return mesh;
}

/// Parse a mesh file and finalize its topology.
template <int dim>
MeshTopology<dim> import_mesh(const std::string& path, BoundaryKind default_kind = BoundaryKind::noslip) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open mesh file '" + path + "'");
  auto mesh = read_mesh<dim>(in, path);
  mesh.finalize(default_kind);
  return mesh;
}

template <int dim>
void write_mesh(std::ostream& out, const MeshTopology<dim>& mesh) {
  out << "idpmesh " << dim << ' ' << mesh.n_nodes() << ' ' << mesh.n_cells() << '\n';
  out << std::setprecision(17);
  for (const auto& x : mesh.nodes()) {
    for (int d = 0; d < dim; ++d) out << (d ? " " : "") << x[d];
    out << '\n';
  }
  for (const auto& c : mesh.cells()) {
    for (int a = 0; a < dim + 1; ++a) out << (a ? " " : "") << c[a];
    out << '\n';
  }
  bool any = false;
  for (const auto& t : mesh.tags()) any = any || t.has_kind || t.periodic_partner >= 0;
  if (!any) return;
  out << "boundary\n";
  for (int i = 0; i < mesh.n_nodes(); ++i) {
    const auto& t = mesh.tags()[i];
    if (t.has_kind) out << i << ' ' << to_string(t.kind) << '\n';
    if (t.periodic_partner >= 0) out << i << " periodic " << t.periodic_partner << '\n';
  }
}

template <int dim>
void export_mesh(const std::string& path, const MeshTopology<dim>& mesh) {
  std::ofstream out(path);
  if (!out) throw MeshError("cannot write mesh file '" + path + "'");
  write_mesh(out, mesh);
}

}  // namespace idp
