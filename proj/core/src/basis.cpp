#include "condensa/basis.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "condensa/error.hpp"

namespace condensa {
namespace {

double ipow(double x, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= x;
  return r;
}

}  // namespace

int polynomial_dimension(int dim, int degree) {
  if (degree < 0) return 0;
  long num = 1, den = 1;
  for (int i = 1; i <= dim; ++i) {
    num *= degree + i;
    den *= i;
  }
  return static_cast<int>(num / den);
}

ScalarBasis::ScalarBasis(int dim, int degree) : dim_(dim), degree_(degree) {
  if (dim < 1 || dim > 3) throw InvalidArgument("ScalarBasis: dim must be 1, 2 or 3");
  if (degree < 0) throw InvalidArgument("ScalarBasis: degree must be non-negative");
  for (int total = 0; total <= degree; ++total) {
    if (dim == 1) {
      exponents_.push_back({total, 0, 0});
    } else if (dim == 2) {
      for (int a = total; a >= 0; --a) exponents_.push_back({a, total - a, 0});
    } else {
      for (int a = total; a >= 0; --a)
        for (int b = total - a; b >= 0; --b) exponents_.push_back({a, b, total - a - b});
    }
  }
  const int n = size();
  const QuadratureRule rule = simplex_quadrature(dim, std::max(1, 2 * degree));
  Eigen::MatrixXd mono(rule.size(), n);
  for (int q = 0; q < rule.size(); ++q)
    for (int j = 0; j < n; ++j) {
      const auto& e = exponents_[j];
      mono(q, j) = ipow(rule.points[q].x(), e[0]) * ipow(rule.points[q].y(), e[1]) *
                   ipow(rule.points[q].z(), e[2]);
    }
  const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(rule.weights.data(), rule.size());
  const Eigen::MatrixXd gram = mono.transpose() * w.asDiagonal() * mono;
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) throw Error("ScalarBasis: monomial Gram matrix not SPD");
  // phi = L^{-1} m  =>  int phi phi^T = L^{-1} G L^{-T} = I
  coeffs_ = llt.matrixL().solve(Eigen::MatrixXd::Identity(n, n));
}

void ScalarBasis::eval(const Point& x, double* values) const {
  const int n = size();
  thread_local std::vector<double> mono;
  mono.resize(n);
  for (int j = 0; j < n; ++j) {
    const auto& e = exponents_[j];
    mono[j] = ipow(x.x(), e[0]) * ipow(x.y(), e[1]) * ipow(x.z(), e[2]);
  }
  for (int i = 0; i < n; ++i) {
    double s = 0;
    for (int j = 0; j <= i; ++j) s += coeffs_(i, j) * mono[j];
    values[i] = s;
  }
}

void ScalarBasis::eval_grad(const Point& x, double* grads) const {
  const int n = size();
  thread_local std::vector<double> dmono;
  dmono.resize(n * dim_);
  for (int j = 0; j < n; ++j) {
    const auto& e = exponents_[j];
    for (int r = 0; r < dim_; ++r) {
      if (e[r] == 0) {
        dmono[r * n + j] = 0;
        continue;
      }
      double v = e[r];
      for (int s = 0; s < 3; ++s) v *= ipow(x(s), s == r ? e[s] - 1 : e[s]);
      dmono[r * n + j] = v;
    }
  }
  for (int r = 0; r < dim_; ++r)
    for (int i = 0; i < n; ++i) {
      double s = 0;
      for (int j = 0; j <= i; ++j) s += coeffs_(i, j) * dmono[r * n + j];
      grads[r * n + i] = s;
    }
}

namespace {

ShapeTable tabulate(const ScalarBasis& basis, bool vector, const std::vector<Point>& points,
                    const std::vector<double>& weights) {
  ShapeTable t;
  t.dim = basis.dim();
  t.degree = basis.degree();
  t.components = vector ? basis.dim() : 1;
  t.points = points;
  t.weights = weights;
  const int n = basis.size();
  const int nq = static_cast<int>(points.size());
  t.values.resize(nq, n);
  t.grads.assign(basis.dim(), Eigen::MatrixXd(nq, n));
  std::vector<double> v(n), g(n * basis.dim());
  for (int q = 0; q < nq; ++q) {
    basis.eval(points[q], v.data());
    basis.eval_grad(points[q], g.data());
    for (int i = 0; i < n; ++i) {
      t.values(q, i) = v[i];
      for (int r = 0; r < basis.dim(); ++r) t.grads[r](q, i) = g[r * n + i];
    }
  }
  return t;
}

Point reference_vertex(int dim, int v) {
  Point p = Point::Zero();
  if (v > 0) p(v - 1) = 1.0;
  (void)dim;
  return p;
}

}  // namespace

ShapeTable pk_basis(int dim, int degree, bool vector, const QuadratureRule& rule) {
  if (rule.dim != dim) throw InvalidArgument("pk_basis: rule dimension does not match");
  return tabulate(ScalarBasis(dim, degree), vector, rule.points, rule.weights);
}

Point facet_to_cell_point(int dim, const FacetOrientation& vertex_map, const Point& facet_point) {
  // Barycentric coordinates of the facet point w.r.t. the facet's vertices.
  std::array<double, 3> bary{};
  double rest = 1.0;
  for (int j = 1; j < dim; ++j) {
    bary[j] = facet_point(j - 1);
    rest -= bary[j];
  }
  bary[0] = rest;
  Point x = Point::Zero();
  for (int j = 0; j < dim; ++j) x += bary[j] * reference_vertex(dim, vertex_map[j]);
  return x;
}

ShapeTable facet_trace_table(const ScalarBasis& cell_basis, int local_facet,
                             const FacetOrientation& vertex_map, const QuadratureRule& facet_rule) {
  const int dim = cell_basis.dim();
  if (local_facet < 0 || local_facet > dim)
    throw InvalidArgument("facet_trace_table: invalid local facet " + std::to_string(local_facet));
  if (facet_rule.dim != dim - 1) throw InvalidArgument("facet_trace_table: facet rule has wrong dimension");
  for (int j = 0; j < dim; ++j)
    if (vertex_map[j] == local_facet || vertex_map[j] < 0 || vertex_map[j] > dim)
      throw InvalidArgument("facet_trace_table: vertex map does not describe the local facet");
  std::vector<Point> pts;
  pts.reserve(facet_rule.points.size());
  for (const Point& p : facet_rule.points) pts.push_back(facet_to_cell_point(dim, vertex_map, p));
  return tabulate(cell_basis, false, pts, facet_rule.weights);
}

}  // namespace condensa
