#pragma once

#include <vector>

#include "condensa/mesh.hpp"

namespace condensa {

/// Quadrature on the reference simplex {x_i >= 0, sum x_i <= 1} of dimension 1, 2 or 3.
struct QuadratureRule {
  int dim = 0;
  int order = 0;
  std::vector<Point> points;  // reference coordinates, unused components zero
  std::vector<double> weights;

  int size() const { return static_cast<int>(weights.size()); }
};

/// Collapsed-coordinate Gauss-Jacobi rule exact on polynomials of total degree `order`.
/// Supported orders: 1..40.
QuadratureRule simplex_quadrature(int dim, int order);

/// Gauss-Jacobi nodes/weights on [-1, 1] for the weight (1-x)^alpha, alpha >= 0.
void gauss_jacobi(int npoints, double alpha, std::vector<double>& nodes, std::vector<double>& weights);

/// Measure of the reference simplex: 1, 1/2, 1/6.
double reference_measure(int dim);

}  // namespace condensa
