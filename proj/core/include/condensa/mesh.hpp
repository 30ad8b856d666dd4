#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace condensa {

using Index = long;
/// Physical coordinates; the z component is zero in 2D.
using Point = Eigen::Vector3d;

/// Axis-aligned box [origin, origin + extent].
struct BoxSpec {
  Point origin = Point::Zero();
  Point extent = Point::Ones();

  static BoxSpec unit() { return {}; }
  /// (-1, 1)^d, the lid-driven cavity domain in 2D.
  static BoxSpec symmetric() { return {Point(-1, -1, -1), Point(2, 2, 2)}; }
};

/// Geometric data of one cell. Local facet i is the facet opposite local vertex i.
struct CellGeometry {
  double volume = 0;
  double diameter = 0;  // h_K, largest vertex distance
  double boundary_measure = 0;  // |dK|
  std::array<double, 4> facet_area{};
  std::array<Point, 4> facet_normal{};  // outward, unit length
};

/// Simplicial mesh of a polygonal/polyhedral domain in 2 or 3 dimensions.
///
/// Cells are stored with positive orientation. Facets are stored with sorted
/// vertex tuples; the stored facet normal is the outward normal of the first
/// adjacent cell, and `cell_facet_sign` gives +1/-1 for the adjacent cells.
/// Immutable after construction.
class Mesh {
 public:
  Mesh(int dim, std::vector<Point> vertices, std::vector<Index> cell_vertices);

  int dim() const { return dim_; }
  Index num_vertices() const { return static_cast<Index>(vertices_.size()); }
  Index num_cells() const { return static_cast<Index>(cells_.size()) / (dim_ + 1); }
  Index num_facets() const { return static_cast<Index>(facets_.size()) / dim_; }
  Index num_boundary_facets() const;

  const Point& vertex(Index v) const { return vertices_[v]; }
  const std::vector<Point>& vertices() const { return vertices_; }
  std::span<const Index> cell_vertices(Index c) const {
    return {cells_.data() + c * (dim_ + 1), static_cast<size_t>(dim_ + 1)};
  }
  std::span<const Index> facet_vertices(Index f) const {
    return {facets_.data() + f * dim_, static_cast<size_t>(dim_)};
  }
  std::span<const Index> cell_facets(Index c) const {
    return {cell_facets_.data() + c * (dim_ + 1), static_cast<size_t>(dim_ + 1)};
  }
  /// +1 if cell c is the first cell of its local facet i, -1 otherwise.
  int cell_facet_sign(Index c, int local_facet) const;
  /// Adjacent cells; the second entry is -1 on the boundary.
  const std::array<Index, 2>& facet_cells(Index f) const { return facet_cells_[f]; }
  bool is_boundary(Index f) const { return facet_cells_[f][1] < 0; }
  int local_facet_index(Index c, Index f) const;

  const Point& facet_normal(Index f) const { return facet_normals_[f]; }
  double facet_area(Index f) const { return facet_areas_[f]; }
  double facet_diameter(Index f) const;
  Point facet_centroid(Index f) const;

  double cell_volume(Index c) const;
  double cell_diameter(Index c) const;
  Point cell_centroid(Index c) const;
  CellGeometry cell_geometry(Index c) const;

  /// Largest cell diameter.
  double max_diameter() const;
  double total_volume() const;

 private:
  void orient_cells();
  void build_facets();

  int dim_;
  std::vector<Point> vertices_;
  std::vector<Index> cells_;
  std::vector<Index> facets_;
  std::vector<Index> cell_facets_;
  std::vector<std::array<Index, 2>> facet_cells_;
  std::vector<Point> facet_normals_;
  std::vector<double> facet_areas_;
};

/// Structured Kuhn/Freudenthal mesh of a box: 2n^2 triangles or 6n^3 tetrahedra.
Mesh unit_box_mesh(int dim, int n, const BoxSpec& box = BoxSpec::unit());

/// Uniform red refinement (x4 cells in 2D, x8 in 3D).
Mesh refine(const Mesh& mesh);

/// Line-oriented text format: `vertex x y [z]`, `cell i0 i1 i2 [i3]`, `#` comments.
void write_mesh(std::ostream& out, const Mesh& mesh);
void write_mesh(const std::string& path, const Mesh& mesh);
Mesh read_mesh(std::istream& in);

}  // namespace condensa
