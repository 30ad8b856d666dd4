#include "condensa/quadrature.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "condensa/error.hpp"

namespace condensa {

double reference_measure(int dim) {
  switch (dim) {
    case 1: return 1.0;
    case 2: return 0.5;
    case 3: return 1.0 / 6.0;
    default: throw InvalidArgument("reference simplex dimension must be 1, 2 or 3");
  }
}

// Golub-Welsch on the Jacobi matrix of the weight (1-x)^alpha on [-1, 1].
void gauss_jacobi(int npoints, double alpha, std::vector<double>& nodes, std::vector<double>& weights) {
  const double a = alpha, b = 0.0;
  Eigen::VectorXd diag(npoints), sub(std::max(npoints - 1, 0));
  for (int k = 0; k < npoints; ++k) {
    const double nab = 2.0 * k + a + b;
    diag(k) = (k == 0) ? (b - a) / (a + b + 2.0) : (b * b - a * a) / (nab * (nab + 2.0));
    if (k + 1 < npoints) {
      const double n = k + 1;
      const double m = 2.0 * n + a + b;
      sub(k) = std::sqrt(4.0 * n * (n + a) * (n + b) * (n + a + b) / (m * m * (m + 1.0) * (m - 1.0)));
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  eig.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  const double mu0 = std::pow(2.0, a + b + 1.0) * std::tgamma(a + 1.0) * std::tgamma(b + 1.0) /
                     std::tgamma(a + b + 2.0);
  nodes.resize(npoints);
  weights.resize(npoints);
  for (int i = 0; i < npoints; ++i) {
    nodes[i] = eig.eigenvalues()(i);
    const double v = eig.eigenvectors()(0, i);
    weights[i] = mu0 * v * v;
  }
}

QuadratureRule simplex_quadrature(int dim, int order) {
  if (dim < 1 || dim > 3) throw InvalidArgument("simplex_quadrature: dim must be 1, 2 or 3");
  if (order < 1 || order > 40)
    throw InvalidArgument("simplex_quadrature: unsupported order " + std::to_string(order));
  const int m = (order + 2) / 2;  // m-point Gauss rules are exact to degree 2m-1

  // 1D factors on [0, 1] carrying the collapsed Jacobian (1-s)^alpha.
  auto factor = [m](double alpha) {
    std::vector<double> x, w;
    gauss_jacobi(m, alpha, x, w);
    for (int i = 0; i < m; ++i) {
      x[i] = 0.5 * (1.0 + x[i]);
      w[i] *= std::pow(0.5, alpha + 1.0);
    }
    return std::pair{x, w};
  };

  QuadratureRule rule;
  rule.dim = dim;
  rule.order = order;
  if (dim == 1) {
    auto [x, w] = factor(0.0);
    for (int i = 0; i < m; ++i) {
      rule.points.emplace_back(x[i], 0.0, 0.0);
      rule.weights.push_back(w[i]);
    }
  } else if (dim == 2) {
    auto [s, ws] = factor(1.0);
    auto [t, wt] = factor(0.0);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        rule.points.emplace_back(s[i], (1.0 - s[i]) * t[j], 0.0);
        rule.weights.push_back(ws[i] * wt[j]);
      }
  } else {
    auto [s, ws] = factor(2.0);
    auto [t, wt] = factor(1.0);
    auto [r, wr] = factor(0.0);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        for (int l = 0; l < m; ++l) {
          const double y = (1.0 - s[i]) * t[j];
          const double z = (1.0 - s[i]) * (1.0 - t[j]) * r[l];
          rule.points.emplace_back(s[i], y, z);
          rule.weights.push_back(ws[i] * wt[j] * wr[l]);
        }
  }
  return rule;
}

}  // namespace condensa
