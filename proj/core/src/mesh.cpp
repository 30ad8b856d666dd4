#include "condensa/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>

#include "condensa/error.hpp"

namespace condensa {
namespace {

double signed_volume(int dim, const std::array<Point, 4>& v) {
  if (dim == 2) {
    const Point a = v[1] - v[0];
    const Point b = v[2] - v[0];
    return 0.5 * (a.x() * b.y() - a.y() * b.x());
  }
  return (v[1] - v[0]).dot((v[2] - v[0]).cross(v[3] - v[0])) / 6.0;
}

double simplex_measure(int dim, std::span<const Point> v) {
  // measure of a (dim-1)-simplex embedded in dim-space
  if (dim == 2) return (v[1] - v[0]).norm();
  return 0.5 * (v[1] - v[0]).cross(v[2] - v[0]).norm();
}

// Unit normal of the facet spanned by `v`, pointing away from `opposite`.
Point outward_normal(int dim, std::span<const Point> v, const Point& opposite) {
  Point n;
  if (dim == 2) {
    const Point t = v[1] - v[0];
    n = Point(t.y(), -t.x(), 0.0);
  } else {
    n = (v[1] - v[0]).cross(v[2] - v[0]);
  }
  n.normalize();
  if (n.dot(v[0] - opposite) < 0) n = -n;
  return n;
}

}  // namespace

Mesh::Mesh(int dim, std::vector<Point> vertices, std::vector<Index> cell_vertices)
    : dim_(dim), vertices_(std::move(vertices)), cells_(std::move(cell_vertices)) {
  if (dim != 2 && dim != 3) throw InvalidArgument("mesh dimension must be 2 or 3");
  if (cells_.empty() || cells_.size() % (dim + 1) != 0)
    throw InvalidArgument("cell connectivity size is not a multiple of dim+1");
  for (Index v : cells_)
    if (v < 0 || v >= num_vertices()) throw InvalidArgument("cell references unknown vertex");
  orient_cells();
  build_facets();
}

void Mesh::orient_cells() {
  for (Index c = 0; c < num_cells(); ++c) {
    Index* cv = cells_.data() + c * (dim_ + 1);
    std::array<Point, 4> x;
    for (int i = 0; i <= dim_; ++i) x[i] = vertices_[cv[i]];
    const double vol = signed_volume(dim_, x);
    if (std::abs(vol) <= 1e-300) throw InvalidArgument("degenerate cell " + std::to_string(c));
    if (vol < 0) std::swap(cv[0], cv[1]);
  }
}

void Mesh::build_facets() {
  const int nv = dim_ + 1;
  struct Incidence {
    std::array<Index, 3> key;
    Index cell;
    int local;
  };
  std::vector<Incidence> inc;
  inc.reserve(cells_.size());
  for (Index c = 0; c < num_cells(); ++c) {
    auto cv = cell_vertices(c);
    for (int i = 0; i < nv; ++i) {
      std::array<Index, 3> key{-1, -1, -1};
      int m = 0;
      for (int j = 0; j < nv; ++j)
        if (j != i) key[m++] = cv[j];
      std::sort(key.begin(), key.begin() + dim_);
      inc.push_back({key, c, i});
    }
  }
  std::sort(inc.begin(), inc.end(), [](const Incidence& a, const Incidence& b) {
    return a.key != b.key ? a.key < b.key : a.cell < b.cell;
  });

  cell_facets_.assign(cells_.size(), -1);
  for (size_t i = 0; i < inc.size();) {
    size_t j = i + 1;
    while (j < inc.size() && inc[j].key == inc[i].key) ++j;
    if (j - i > 2) throw InvalidArgument("non-manifold facet shared by more than two cells");
    const Index f = num_facets();
    for (int d = 0; d < dim_; ++d) facets_.push_back(inc[i].key[d]);
    std::array<Index, 2> fc{inc[i].cell, j - i == 2 ? inc[i + 1].cell : Index{-1}};
    facet_cells_.push_back(fc);
    for (size_t k = i; k < j; ++k) cell_facets_[inc[k].cell * nv + inc[k].local] = f;

    std::array<Point, 3> fv;
    for (int d = 0; d < dim_; ++d) fv[d] = vertices_[inc[i].key[d]];
    const Point opposite = vertices_[cell_vertices(inc[i].cell)[inc[i].local]];
    facet_normals_.push_back(outward_normal(dim_, {fv.data(), size_t(dim_)}, opposite));
    facet_areas_.push_back(simplex_measure(dim_, {fv.data(), size_t(dim_)}));
    i = j;
  }
}

Index Mesh::num_boundary_facets() const {
  return std::count_if(facet_cells_.begin(), facet_cells_.end(),
                       [](const auto& fc) { return fc[1] < 0; });
}

int Mesh::cell_facet_sign(Index c, int local_facet) const {
  return facet_cells_[cell_facets(c)[local_facet]][0] == c ? 1 : -1;
}

int Mesh::local_facet_index(Index c, Index f) const {
  auto cf = cell_facets(c);
  for (int i = 0; i <= dim_; ++i)
    if (cf[i] == f) return i;
  throw InvalidArgument("facet is not incident to cell");
}

double Mesh::facet_diameter(Index f) const {
  auto fv = facet_vertices(f);
  double h = 0;
  for (int i = 0; i < dim_; ++i)
    for (int j = i + 1; j < dim_; ++j)
      h = std::max(h, (vertices_[fv[i]] - vertices_[fv[j]]).norm());
  return h;
}

Point Mesh::facet_centroid(Index f) const {
  Point x = Point::Zero();
  for (Index v : facet_vertices(f)) x += vertices_[v];
  return x / dim_;
}

double Mesh::cell_volume(Index c) const {
  std::array<Point, 4> x;
  auto cv = cell_vertices(c);
  for (int i = 0; i <= dim_; ++i) x[i] = vertices_[cv[i]];
  return signed_volume(dim_, x);
}

double Mesh::cell_diameter(Index c) const {
  auto cv = cell_vertices(c);
  double h = 0;
  for (int i = 0; i <= dim_; ++i)
    for (int j = i + 1; j <= dim_; ++j)
      h = std::max(h, (vertices_[cv[i]] - vertices_[cv[j]]).norm());
  return h;
}

Point Mesh::cell_centroid(Index c) const {
  Point x = Point::Zero();
  for (Index v : cell_vertices(c)) x += vertices_[v];
  return x / (dim_ + 1);
}

CellGeometry Mesh::cell_geometry(Index c) const {
  if (c < 0 || c >= num_cells()) throw InvalidArgument("cell index out of range");
  CellGeometry g;
  g.volume = cell_volume(c);
  if (!(g.volume > 0)) throw InvalidArgument("degenerate cell " + std::to_string(c));
  g.diameter = cell_diameter(c);
  auto cv = cell_vertices(c);
  for (int i = 0; i <= dim_; ++i) {
    std::array<Point, 3> fv;
    int m = 0;
    for (int j = 0; j <= dim_; ++j)
      if (j != i) fv[m++] = vertices_[cv[j]];
    g.facet_area[i] = simplex_measure(dim_, {fv.data(), size_t(dim_)});
    g.facet_normal[i] = outward_normal(dim_, {fv.data(), size_t(dim_)}, vertices_[cv[i]]);
    g.boundary_measure += g.facet_area[i];
  }
  return g;
}

double Mesh::max_diameter() const {
  double h = 0;
  for (Index c = 0; c < num_cells(); ++c) h = std::max(h, cell_diameter(c));
  return h;
}

double Mesh::total_volume() const {
  double v = 0;
  for (Index c = 0; c < num_cells(); ++c) v += cell_volume(c);
  return v;
}

Mesh unit_box_mesh(int dim, int n, const BoxSpec& box) {
  if (dim != 2 && dim != 3) throw InvalidArgument("unit_box_mesh: dim must be 2 or 3");
  if (n < 1) throw InvalidArgument("unit_box_mesh: n must be at least 1");
  const Index np = n + 1;
  std::vector<Point> vertices;
  std::vector<Index> cells;
  if (dim == 2) {
    auto id = [np](Index i, Index j) { return j * np + i; };
    for (Index j = 0; j <= n; ++j)
      for (Index i = 0; i <= n; ++i)
        vertices.emplace_back(box.origin.x() + box.extent.x() * double(i) / n,
                              box.origin.y() + box.extent.y() * double(j) / n, 0.0);
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i) {
        const Index v00 = id(i, j), v10 = id(i + 1, j), v01 = id(i, j + 1), v11 = id(i + 1, j + 1);
        cells.insert(cells.end(), {v00, v10, v11, v00, v11, v01});
      }
  } else {
    auto id = [np](Index i, Index j, Index k) { return (k * np + j) * np + i; };
    for (Index k = 0; k <= n; ++k)
      for (Index j = 0; j <= n; ++j)
        for (Index i = 0; i <= n; ++i)
          vertices.emplace_back(box.origin.x() + box.extent.x() * double(i) / n,
                                box.origin.y() + box.extent.y() * double(j) / n,
                                box.origin.z() + box.extent.z() * double(k) / n);
    // Kuhn simplices: monotone lattice paths from the cube's low to high corner.
    std::array<int, 3> perm{0, 1, 2};
    std::vector<std::array<int, 3>> perms;
    do perms.push_back(perm);
    while (std::next_permutation(perm.begin(), perm.end()));
    for (Index k = 0; k < n; ++k)
      for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < n; ++i)
          for (const auto& p : perms) {
            std::array<Index, 3> at{i, j, k};
            cells.push_back(id(at[0], at[1], at[2]));
            for (int s = 0; s < 3; ++s) {
              ++at[p[s]];
              cells.push_back(id(at[0], at[1], at[2]));
            }
          }
  }
  return Mesh(dim, std::move(vertices), std::move(cells));
}

Mesh refine(const Mesh& mesh) {
  const int dim = mesh.dim();
  std::vector<Point> vertices = mesh.vertices();
  std::map<std::pair<Index, Index>, Index> midpoint;
  auto mid = [&](Index a, Index b) {
    const auto key = std::minmax(a, b);
    auto [it, inserted] = midpoint.try_emplace({key.first, key.second}, Index(vertices.size()));
    if (inserted) vertices.push_back(0.5 * (vertices[a] + vertices[b]));
    return it->second;
  };

  std::vector<Index> cells;
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    auto v = mesh.cell_vertices(c);
    if (dim == 2) {
      const Index m01 = mid(v[0], v[1]), m02 = mid(v[0], v[2]), m12 = mid(v[1], v[2]);
      cells.insert(cells.end(), {v[0], m01, m02, v[1], m12, m01, v[2], m02, m12, m01, m12, m02});
      continue;
    }
    const Index m01 = mid(v[0], v[1]), m02 = mid(v[0], v[2]), m03 = mid(v[0], v[3]);
    const Index m12 = mid(v[1], v[2]), m13 = mid(v[1], v[3]), m23 = mid(v[2], v[3]);
    cells.insert(cells.end(), {v[0], m01, m02, m03, v[1], m01, m12, m13,
                               v[2], m02, m12, m23, v[3], m03, m13, m23});
    // Inner octahedron split along its shortest diagonal.
    const std::array<std::array<Index, 2>, 3> diag{{{m01, m23}, {m02, m13}, {m03, m12}}};
    int best = 0;
    double best_len = 1e300;
    for (int d = 0; d < 3; ++d) {
      const double len = (vertices[diag[d][0]] - vertices[diag[d][1]]).norm();
      if (len < best_len - 1e-14) {
        best_len = len;
        best = d;
      }
    }
    const auto& a = diag[best];
    const auto& p = diag[(best + 1) % 3];
    const auto& q = diag[(best + 2) % 3];
    const std::array<Index, 4> ring{p[0], q[0], p[1], q[1]};
    for (int r = 0; r < 4; ++r) cells.insert(cells.end(), {a[0], a[1], ring[r], ring[(r + 1) % 4]});
  }
  return Mesh(dim, std::move(vertices), std::move(cells));
}

void write_mesh(std::ostream& out, const Mesh& mesh) {
  out << "# condensa mesh, dim " << mesh.dim() << ", " << mesh.num_vertices() << " vertices, "
      << mesh.num_cells() << " cells\n";
  out.precision(17);
  for (const Point& x : mesh.vertices()) {
    out << "vertex " << x.x() << ' ' << x.y();
    if (mesh.dim() == 3) out << ' ' << x.z();
    out << '\n';
  }
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    out << "cell";
    for (Index v : mesh.cell_vertices(c)) out << ' ' << v;
    out << '\n';
  }
}

void write_mesh(const std::string& path, const Mesh& mesh) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open mesh output file: " + path);
  write_mesh(out, mesh);
}

Mesh read_mesh(std::istream& in) {
  std::vector<Point> vertices;
  std::vector<Index> cells;
  int dim = 0;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "vertex") {
      std::vector<double> xs;
      double x;
      while (ls >> x) xs.push_back(x);
      if (xs.size() != 2 && xs.size() != 3)
        throw InvalidArgument("line " + std::to_string(lineno) + ": vertex needs 2 or 3 coordinates");
      if (dim == 0) dim = int(xs.size());
      if (int(xs.size()) != dim)
        throw InvalidArgument("line " + std::to_string(lineno) + ": inconsistent vertex dimension");
      vertices.emplace_back(xs[0], xs[1], dim == 3 ? xs[2] : 0.0);
    } else if (tag == "cell") {
      std::vector<Index> ids;
      Index v;
      while (ls >> v) ids.push_back(v);
      if (dim == 0 || int(ids.size()) != dim + 1)
        throw InvalidArgument("line " + std::to_string(lineno) + ": cell arity does not match dimension");
      cells.insert(cells.end(), ids.begin(), ids.end());
    } else {
      throw InvalidArgument("line " + std::to_string(lineno) + ": unknown record '" + tag + "'");
    }
  }
  return Mesh(dim, std::move(vertices), std::move(cells));
}

}  // namespace condensa
