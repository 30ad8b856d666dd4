#include "element.hpp"

#include <algorithm>

#include <Eigen/Dense>

#include "condensa/error.hpp"

namespace condensa::detail {

Point facet_point(const Mesh& mesh, Index f, const Point& ref) {
  const int dim = mesh.dim();
  auto fv = mesh.facet_vertices(f);
  double rest = 1.0;
  Point x = Point::Zero();
  for (int j = 1; j < dim; ++j) {
    x += ref(j - 1) * mesh.vertex(fv[j]);
    rest -= ref(j - 1);
  }
  return x + rest * mesh.vertex(fv[0]);
}

FacetOrientation facet_orientation(const Mesh& mesh, Index cell, int local_facet) {
  const Index f = mesh.cell_facets(cell)[local_facet];
  auto fv = mesh.facet_vertices(f);
  auto cv = mesh.cell_vertices(cell);
  FacetOrientation vm{-1, -1, -1};
  for (int j = 0; j < mesh.dim(); ++j)
    for (int i = 0; i <= mesh.dim(); ++i)
      if (cv[i] == fv[j]) vm[j] = i;
  return vm;
}

ElementTables::ElementTables(int dim, int k, int order)
    : dim_(dim),
      k_(k),
      cell_rule_(simplex_quadrature(dim, order)),
      facet_rule_(simplex_quadrature(dim - 1, order)),
      bu_(dim, k),
      bp_(dim, std::max(k - 1, 0)),
      bf_(dim - 1, k) {
  if (k < 1) throw InvalidArgument("polynomial degree k must be at least 1");
  tu_ = pk_basis(dim, k, false, cell_rule_);
  tp_ = pk_basis(dim, k - 1, false, cell_rule_);
  tf_.resize(facet_rule_.size(), bf_.size());
  std::vector<double> v(bf_.size());
  for (int q = 0; q < facet_rule_.size(); ++q) {
    bf_.eval(facet_rule_.points[q], v.data());
    for (int j = 0; j < bf_.size(); ++j) tf_(q, j) = v[j];
  }
  for (int i = 0; i <= dim; ++i) {
    std::vector<int> others;
    for (int j = 0; j <= dim; ++j)
      if (j != i) others.push_back(j);
    std::sort(others.begin(), others.end());
    do {
      FacetOrientation vm{others[0], others[1], dim == 3 ? others[2] : 0};
      traces_u_.emplace(key(i, vm), facet_trace_table(bu_, i, vm, facet_rule_));
      traces_p_.emplace(key(i, vm), facet_trace_table(bp_, i, vm, facet_rule_));
    } while (std::next_permutation(others.begin(), others.end()));
  }
}

const ShapeTable& ElementTables::velocity_trace(int local_facet, const FacetOrientation& vm) const {
  FacetOrientation k = vm;
  if (dim_ == 2) k[2] = 0;
  return traces_u_.at(key(local_facet, k));
}

const ShapeTable& ElementTables::pressure_trace(int local_facet, const FacetOrientation& vm) const {
  FacetOrientation k = vm;
  if (dim_ == 2) k[2] = 0;
  return traces_p_.at(key(local_facet, k));
}

Eigen::MatrixXd cell_jacobian(const Mesh& mesh, Index cell) {
  const int dim = mesh.dim();
  auto cv = mesh.cell_vertices(cell);
  Eigen::MatrixXd J(dim, dim);
  for (int r = 0; r < dim; ++r) J.col(r) = (mesh.vertex(cv[r + 1]) - mesh.vertex(cv[0])).head(dim);
  return J;
}

namespace {

// Physical gradients of a scalar table placed in columns [offset, offset + n).
void place_scalar(const ShapeTable& t, const Eigen::MatrixXd& JinvT, int offset, int nloc, MatrixXd& val,
                  std::vector<MatrixXd>& grad) {
  const int dim = t.dim;
  const int nq = t.num_points();
  const int n = t.scalar_size();
  val = MatrixXd::Zero(nq, nloc);
  val.middleCols(offset, n) = t.values;
  grad.assign(dim, MatrixXd::Zero(nq, nloc));
  for (int s = 0; s < dim; ++s)
    for (int r = 0; r < dim; ++r)
      if (JinvT(s, r) != 0.0) grad[s].middleCols(offset, n) += JinvT(s, r) * t.grads[r];
}

void place_vector(const ShapeTable& t, const Eigen::MatrixXd& JinvT, int nloc, std::vector<MatrixXd>& val,
                  std::vector<MatrixXd>& grad) {
  const int dim = t.dim;
  const int n = t.scalar_size();
  val.resize(dim);
  grad.resize(dim * dim);
  for (int c = 0; c < dim; ++c) {
    std::vector<MatrixXd> g;
    place_scalar(t, JinvT, c * n, nloc, val[c], g);
    for (int r = 0; r < dim; ++r) grad[c * dim + r] = std::move(g[r]);
  }
}

}  // namespace

CellEval evaluate_cell(const ElementTables& tables, const BlockLayout& layout, const Mesh& mesh, Index cell) {
  const int dim = mesh.dim();
  const int nloc = layout.local_size();
  const CellGeometry geo = mesh.cell_geometry(cell);
  const Eigen::MatrixXd J = cell_jacobian(mesh, cell);
  const Eigen::MatrixXd JinvT = J.inverse().transpose();
  const double detJ = J.determinant();
  auto cv = mesh.cell_vertices(cell);
  const Point x0 = mesh.vertex(cv[0]);

  CellEval ev;
  ev.cell = cell;
  ev.volume = geo.volume;
  ev.h = geo.diameter;
  ev.boundary_measure = geo.boundary_measure;

  const QuadratureRule& cr = tables.cell_rule();
  ev.w.resize(cr.size());
  ev.x.resize(cr.size());
  for (int q = 0; q < cr.size(); ++q) {
    ev.w(q) = cr.weights[q] * detJ;
    Point x = x0;
    for (int r = 0; r < dim; ++r) x.head(dim) += J.col(r) * cr.points[q](r);
    ev.x[q] = x;
  }
  if (layout.has_velocity()) {
    place_vector(tables.velocity_table(), JinvT, nloc, ev.u, ev.du);
    ev.div = MatrixXd::Zero(cr.size(), nloc);
    for (int c = 0; c < dim; ++c) ev.div += ev.du[c * dim + c];
  }
  place_scalar(tables.pressure_table(), JinvT, layout.velocity_block, nloc, ev.p, ev.dp);

  const QuadratureRule& fr = tables.facet_rule();
  const double ref_facet = reference_measure(dim - 1);
  const int m = tables.facet_basis().size();
  ev.facets.resize(dim + 1);
  for (int i = 0; i <= dim; ++i) {
    FacetEval& fe = ev.facets[i];
    fe.local = i;
    fe.facet = mesh.cell_facets(cell)[i];
    fe.boundary = mesh.is_boundary(fe.facet);
    fe.area = geo.facet_area[i];
    fe.normal = geo.facet_normal[i];
    fe.w.resize(fr.size());
    fe.x.resize(fr.size());
    for (int q = 0; q < fr.size(); ++q) {
      fe.w(q) = fr.weights[q] * fe.area / ref_facet;
      fe.x[q] = facet_point(mesh, fe.facet, fr.points[q]);
    }
    const FacetOrientation vm = facet_orientation(mesh, cell, i);
    const int tb = layout.cell_block + i * layout.trace_block;
    if (layout.has_velocity()) {
      place_vector(tables.velocity_trace(i, vm), JinvT, nloc, fe.u, fe.du);
      fe.un = MatrixXd::Zero(fr.size(), nloc);
      for (int c = 0; c < dim; ++c) fe.un += fe.normal(c) * fe.u[c];
    }
    place_scalar(tables.pressure_trace(i, vm), JinvT, layout.velocity_block, nloc, fe.p, fe.dp);
    fe.dpn = MatrixXd::Zero(fr.size(), nloc);
    for (int r = 0; r < dim; ++r) fe.dpn += fe.normal(r) * fe.dp[r];
    if (layout.has_velocity_trace()) {
      fe.ubar.assign(dim, MatrixXd::Zero(fr.size(), nloc));
      for (int c = 0; c < dim; ++c) fe.ubar[c].middleCols(tb + c * m, m) = tables.facet_values();
    }
    fe.pbar = MatrixXd::Zero(fr.size(), nloc);
    fe.pbar.middleCols(tb + layout.ubar_block, m) = tables.facet_values();
  }
  return ev;
}

MatrixXd sym_grad(const std::vector<MatrixXd>& du, int dim, int c, int r) {
  return 0.5 * (du[c * dim + r] + du[r * dim + c]);
}

void add_form(MatrixXd& K, const MatrixXd& X, const VectorXd& w, const MatrixXd& Y) {
  K.noalias() += X.transpose() * (w.asDiagonal() * Y);
}

}  // namespace condensa::detail
