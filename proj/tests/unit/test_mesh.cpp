#include <cmath>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "condensa/error.hpp"
#include "condensa/mesh.hpp"

using namespace condensa;

namespace {

void expect_consistent(const Mesh& m) {
  const int d = m.dim();
  for (Index f = 0; f < m.num_facets(); ++f) {
    const auto& fc = m.facet_cells(f);
    ASSERT_GE(fc[0], 0);
    EXPECT_EQ(m.is_boundary(f), fc[1] < 0);
    for (Index c : fc) {
      if (c < 0) continue;
      const int lf = m.local_facet_index(c, f);
      EXPECT_EQ(m.cell_facets(c)[lf], f);
    }
    // stored normal is outward for the first cell
    const Index c0 = fc[0];
    const int lf = m.local_facet_index(c0, f);
    const CellGeometry g = m.cell_geometry(c0);
    EXPECT_NEAR((g.facet_normal[lf] - m.facet_normal(f)).norm(), 0.0, 1e-12);
    EXPECT_EQ(m.cell_facet_sign(c0, lf), 1);
    if (fc[1] >= 0) {
      EXPECT_EQ(m.cell_facet_sign(fc[1], m.local_facet_index(fc[1], f)), -1);
    }
  }
  for (Index c = 0; c < m.num_cells(); ++c) {
    EXPECT_GT(m.cell_volume(c), 0.0);
    const CellGeometry g = m.cell_geometry(c);
    Point s = Point::Zero();
    for (int i = 0; i <= d; ++i) s += g.facet_area[i] * g.facet_normal[i];
    EXPECT_LT(s.norm(), 1e-12);
    for (int i = 0; i <= d; ++i) {
      const Index f = m.cell_facets(c)[i];
      const auto& fc = m.facet_cells(f);
      EXPECT_TRUE(fc[0] == c || fc[1] == c);
    }
  }
}

bool on_unit_boundary(const Point& x, int dim) {
  for (int i = 0; i < dim; ++i)
    if (std::abs(x[i]) < 1e-14 || std::abs(x[i] - 1.0) < 1e-14) return true;
  return false;
}

}  // namespace

TEST(Mesh, OneSquareHasTwoTrianglesFiveFacets) {
  const Mesh m = unit_box_mesh(2, 1);
  EXPECT_EQ(m.num_cells(), 2);
  EXPECT_EQ(m.num_facets(), 5);
  EXPECT_EQ(m.num_boundary_facets(), 4);
}

TEST(Mesh, OneCubeHasSixTetrahedra) {
  const Mesh m = unit_box_mesh(3, 1);
  EXPECT_EQ(m.num_cells(), 6);
  EXPECT_NEAR(m.total_volume(), 1.0, 1e-12);
}

TEST(Mesh, CountsFollowClosedForms) {
  for (int n : {1, 2, 4, 7}) {
    const Mesh m = unit_box_mesh(2, n);
    EXPECT_EQ(m.num_cells(), 2 * n * n);
    EXPECT_EQ(m.num_facets(), n * (3 * n + 2));
    EXPECT_EQ(m.num_boundary_facets(), 4 * n);
    EXPECT_NEAR(m.total_volume(), 1.0, 1e-12);
  }
  for (int n : {1, 2, 3}) {
    const Mesh m = unit_box_mesh(3, n);
    EXPECT_EQ(m.num_cells(), 6 * n * n * n);
    EXPECT_EQ(m.num_boundary_facets(), 12 * n * n);
    EXPECT_NEAR(m.total_volume(), 1.0, 1e-12);
  }
}

TEST(Mesh, FourByFourSquare) {
  const Mesh m = unit_box_mesh(2, 4);
  EXPECT_EQ(m.num_cells(), 32);
  EXPECT_EQ(m.num_facets(), 56);
  EXPECT_NEAR(m.total_volume(), 1.0, 1e-12);
}

TEST(Mesh, IncidenceAndNormalsConsistent) {
  expect_consistent(unit_box_mesh(2, 3));
  expect_consistent(unit_box_mesh(3, 2));
  expect_consistent(refine(unit_box_mesh(3, 1)));
}

TEST(Mesh, SymmetricBoxVolume) {
  const Mesh m = unit_box_mesh(2, 4, BoxSpec::symmetric());
  EXPECT_NEAR(m.total_volume(), 4.0, 1e-12);
  const Mesh m3 = unit_box_mesh(3, 2, BoxSpec::symmetric());
  EXPECT_NEAR(m3.total_volume(), 8.0, 1e-12);
}

TEST(Mesh, RightTriangleGeometry) {
  const Mesh m(2, {Point(0, 0, 0), Point(1, 0, 0), Point(0, 1, 0)}, {0, 1, 2});
  const CellGeometry g = m.cell_geometry(0);
  EXPECT_NEAR(g.volume, 0.5, 1e-15);
  EXPECT_NEAR(g.diameter, std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(g.boundary_measure, 2.0 + std::sqrt(2.0), 1e-14);
  // local facet 0 is opposite vertex 0: the hypotenuse
  EXPECT_NEAR(g.facet_normal[0][0], 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(g.facet_normal[0][1], 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(Mesh, ClockwiseInputIsReoriented) {
  const Mesh m(2, {Point(0, 0, 0), Point(1, 0, 0), Point(0, 1, 0)}, {0, 2, 1});
  EXPECT_NEAR(m.cell_volume(0), 0.5, 1e-15);
  expect_consistent(m);
}

TEST(Mesh, ReferenceTetrahedronVolume) {
  const Mesh m(3, {Point(0, 0, 0), Point(1, 0, 0), Point(0, 1, 0), Point(0, 0, 1)}, {0, 1, 2, 3});
  EXPECT_NEAR(m.cell_volume(0), 1.0 / 6.0, 1e-15);
  EXPECT_EQ(m.num_facets(), 4);
  EXPECT_EQ(m.num_boundary_facets(), 4);
}

TEST(Mesh, RefineTwoTriangles) {
  const Mesh m = refine(unit_box_mesh(2, 1));
  EXPECT_EQ(m.num_cells(), 8);
  EXPECT_NEAR(m.total_volume(), 1.0, 1e-12);
}

TEST(Mesh, RefineCubeShrinksDiameters) {
  const Mesh parent = unit_box_mesh(3, 1);
  const Mesh child = refine(parent);
  EXPECT_EQ(child.num_cells(), 48);
  EXPECT_NEAR(child.total_volume(), 1.0, 1e-12);
  EXPECT_LE(child.max_diameter(), parent.max_diameter() + 1e-14);
  for (Index c = 0; c < child.num_cells(); ++c) EXPECT_LE(child.cell_diameter(c), parent.max_diameter() + 1e-14);
}

TEST(Mesh, RefinedBoundaryFacetsStayOnBoundary) {
  for (int dim : {2, 3}) {
    const Mesh child = refine(unit_box_mesh(dim, 2));
    for (Index f = 0; f < child.num_facets(); ++f) {
      if (!child.is_boundary(f)) continue;
      for (Index v : child.facet_vertices(f)) EXPECT_TRUE(on_unit_boundary(child.vertex(v), dim));
    }
  }
}

TEST(Mesh, TextRoundTrip) {
  const Mesh m = unit_box_mesh(3, 2);
  std::stringstream ss;
  write_mesh(ss, m);
  const Mesh r = read_mesh(ss);
  ASSERT_EQ(r.num_cells(), m.num_cells());
  ASSERT_EQ(r.num_vertices(), m.num_vertices());
  EXPECT_EQ(r.num_facets(), m.num_facets());
  for (Index v = 0; v < m.num_vertices(); ++v) EXPECT_EQ((r.vertex(v) - m.vertex(v)).norm(), 0.0);
}

TEST(Mesh, ReadAcceptsComments) {
  std::istringstream in("# square\nvertex 0 0\nvertex 1 0\nvertex 0 1\n\ncell 0 1 2  # one triangle\n");
  const Mesh m = read_mesh(in);
  EXPECT_EQ(m.dim(), 2);
  EXPECT_EQ(m.num_cells(), 1);
}

TEST(Mesh, Errors) {
  EXPECT_THROW(unit_box_mesh(4, 2), InvalidArgument);
  EXPECT_THROW(unit_box_mesh(2, 0), InvalidArgument);
  EXPECT_THROW(Mesh(2, {Point(0, 0, 0), Point(1, 0, 0), Point(2, 0, 0)}, {0, 1, 2}), InvalidArgument);
  EXPECT_THROW(Mesh(2, {Point(0, 0, 0), Point(1, 0, 0)}, {0, 1, 5}), InvalidArgument);
  std::istringstream bad("vertex 0 0\nvertex 1 0\nvertex 0 1\ncell 0 1\n");
  EXPECT_THROW(read_mesh(bad), InvalidArgument);
  std::istringstream unknown("face 0 1 2\n");
  EXPECT_THROW(read_mesh(unknown), InvalidArgument);
}
