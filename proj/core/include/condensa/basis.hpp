#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

#include "condensa/quadrature.hpp"

namespace condensa {

/// dim P_r on a simplex of dimension d: C(r+d, d).
int polynomial_dimension(int dim, int degree);

/// Orthonormal basis of P_r on the reference simplex.
///
/// Built from monomials by Cholesky orthonormalization of the exact Gram
/// matrix, so the reference mass matrix is the identity.
class ScalarBasis {
 public:
  ScalarBasis(int dim, int degree);

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  int size() const { return static_cast<int>(exponents_.size()); }

  /// Values of all basis functions at a reference point.
  void eval(const Point& x, double* values) const;
  /// Reference gradients; grads[r * size() + i] = d phi_i / d x_r.
  void eval_grad(const Point& x, double* grads) const;

  /// phi_i = sum_j coefficients(i, j) * monomial_j.
  const Eigen::MatrixXd& coefficients() const { return coeffs_; }
  const std::vector<std::array<int, 3>>& exponents() const { return exponents_; }

 private:
  int dim_;
  int degree_;
  std::vector<std::array<int, 3>> exponents_;
  Eigen::MatrixXd coeffs_;
};

/// Basis values (and reference gradients) tabulated at quadrature points.
struct ShapeTable {
  int dim = 0;
  int degree = 0;
  int components = 1;             // 1 for scalar P_r, dim for vector [P_r]^d
  Eigen::MatrixXd values;         // n_points x n_scalar
  std::vector<Eigen::MatrixXd> grads;  // per reference direction, n_points x n_scalar
  std::vector<Point> points;      // reference points where tabulated
  std::vector<double> weights;    // matching reference weights

  int scalar_size() const { return static_cast<int>(values.cols()); }
  /// Number of (vector) basis functions: components * scalar_size; component-major.
  int size() const { return components * scalar_size(); }
  int num_points() const { return static_cast<int>(values.rows()); }
};

/// Tabulate P_r (scalar, or vector with `dim` components) on a cell rule.
ShapeTable pk_basis(int dim, int degree, bool vector, const QuadratureRule& rule);

/// Permutation taking facet vertex j (in sorted global order) to a local cell vertex.
using FacetOrientation = std::array<int, 3>;

/// Map a point of the reference facet (dimension dim-1) into reference cell
/// coordinates, given which local cell vertex each facet vertex is.
Point facet_to_cell_point(int dim, const FacetOrientation& vertex_map, const Point& facet_point);

/// Cell basis values and reference gradients at the facet rule points pulled
/// back through `vertex_map`. Raises on an invalid local facet index.
ShapeTable facet_trace_table(const ScalarBasis& cell_basis, int local_facet,
                             const FacetOrientation& vertex_map, const QuadratureRule& facet_rule);

}  // namespace condensa
