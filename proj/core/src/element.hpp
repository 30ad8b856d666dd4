#pragma once
// Internal: per-cell evaluation of hybrid fields at quadrature points.

#include <map>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "condensa/basis.hpp"
#include "condensa/mesh.hpp"
#include "condensa/quadrature.hpp"
#include "condensa/spaces.hpp"

namespace condensa::detail {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Physical point of a reference facet point on facet `f` (sorted-vertex parameterization).
Point facet_point(const Mesh& mesh, Index f, const Point& ref);

/// Which local cell vertex each (sorted) facet vertex is.
FacetOrientation facet_orientation(const Mesh& mesh, Index cell, int local_facet);

/// Bases, quadrature rules and trace tables shared by every cell of a mesh.
class ElementTables {
 public:
  ElementTables(int dim, int k, int order);

  int dim() const { return dim_; }
  int k() const { return k_; }
  const QuadratureRule& cell_rule() const { return cell_rule_; }
  const QuadratureRule& facet_rule() const { return facet_rule_; }
  const ScalarBasis& velocity_basis() const { return bu_; }
  const ScalarBasis& pressure_basis() const { return bp_; }
  const ScalarBasis& facet_basis() const { return bf_; }
  const ShapeTable& velocity_table() const { return tu_; }
  const ShapeTable& pressure_table() const { return tp_; }
  /// Facet basis values at facet rule points, n_facet_points x m_k.
  const MatrixXd& facet_values() const { return tf_; }
  /// Traces of the velocity / pressure cell bases for (local facet, orientation).
  const ShapeTable& velocity_trace(int local_facet, const FacetOrientation& vm) const;
  const ShapeTable& pressure_trace(int local_facet, const FacetOrientation& vm) const;

 private:
  static int key(int local_facet, const FacetOrientation& vm) {
    return local_facet * 1000 + vm[0] * 100 + vm[1] * 10 + vm[2];
  }
  int dim_, k_;
  QuadratureRule cell_rule_, facet_rule_;
  ScalarBasis bu_, bp_, bf_;
  ShapeTable tu_, tp_;
  MatrixXd tf_;
  std::map<int, ShapeTable> traces_u_, traces_p_;
};

/// Fields evaluated on one facet of a cell. Matrices are n_points x local_size,
/// so a bilinear form is X^T diag(w) Y.
struct FacetEval {
  Index facet = 0;
  int local = 0;
  bool boundary = false;
  double area = 0;
  Point normal = Point::Zero();
  VectorXd w;
  std::vector<Point> x;
  std::vector<MatrixXd> u;     // cell velocity trace, per component
  std::vector<MatrixXd> du;    // d u_c / d x_r at index c * dim + r
  std::vector<MatrixXd> ubar;  // facet velocity, per component (Stokes)
  MatrixXd un;                 // u . n
  MatrixXd p;
  std::vector<MatrixXd> dp;
  MatrixXd dpn;                // grad p . n
  MatrixXd pbar;
};

struct CellEval {
  Index cell = 0;
  double volume = 0;
  double h = 0;
  double boundary_measure = 0;
  VectorXd w;
  std::vector<Point> x;
  std::vector<MatrixXd> u;
  std::vector<MatrixXd> du;
  MatrixXd div;
  MatrixXd p;
  std::vector<MatrixXd> dp;
  std::vector<FacetEval> facets;
};

CellEval evaluate_cell(const ElementTables& tables, const BlockLayout& layout, const Mesh& mesh, Index cell);

/// Symmetric-gradient component eps_{cr} of the velocity (values matrix).
MatrixXd sym_grad(const std::vector<MatrixXd>& du, int dim, int c, int r);

/// K += X^T diag(w) Y
void add_form(MatrixXd& K, const MatrixXd& X, const VectorXd& w, const MatrixXd& Y);

/// Jacobian of the affine map from the reference cell.
Eigen::MatrixXd cell_jacobian(const Mesh& mesh, Index cell);

}  // namespace condensa::detail
