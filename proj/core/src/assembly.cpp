#include "condensa/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include <Eigen/Dense>

#include "condensa/basis.hpp"
#include "condensa/error.hpp"
#include "condensa/quadrature.hpp"
#include "element.hpp"

namespace condensa {

using detail::add_form;
using detail::CellEval;
using detail::ElementTables;
using detail::FacetEval;
using Eigen::MatrixXd;
using Eigen::VectorXd;

double ProblemParams::eta_for(int dim) const {
  if (eta > 0) return eta;
  return (dim == 2 ? 4.0 : 6.0) * k * k;
}

double ProblemParams::big_m(const Point& x) const { return std::max(xi(x), gamma(x)); }

void ProblemParams::validate() const {
  if (k < 1) throw InvalidArgument("k must be at least 1");
  if (!(nu > 0)) throw InvalidArgument("nu must be positive");
  if (zeta < 0) throw InvalidArgument("zeta must be non-negative");
  if (xi.is_constant() && !(xi.value() > 0)) throw InvalidArgument("xi must be positive");
  if (gamma.is_constant() && gamma.value() < 0) throw InvalidArgument("gamma must be non-negative");
}

// ---------------------------------------------------------------------------
// BlockSystem accessors

SparseMatrix BlockSystem::a11() const {
  const BlockLayout& L = *layout;
  std::vector<Triplet> t;
  t.reserve(cells.size() * L.cell_block * L.cell_block);
  for (Index c = 0; c < L.num_cells; ++c)
    for (int j = 0; j < L.cell_block; ++j)
      for (int i = 0; i < L.cell_block; ++i)
        if (cells[c].a11(i, j) != 0.0) t.emplace_back(L.cell_dof(c, i), L.cell_dof(c, j), cells[c].a11(i, j));
  SparseMatrix A(L.num_cell_dofs(), L.num_cell_dofs());
  A.setFromTriplets(t.begin(), t.end());
  if (has_coupling()) A += coupling;
  return A;
}

SparseMatrix BlockSystem::a21() const {
  const BlockLayout& L = *layout;
  std::vector<Triplet> t;
  for (Index c = 0; c < L.num_cells; ++c)
    for (int s = 0; s < L.num_local_traces(); ++s) {
      const Index r = L.local_trace_free(c, s);
      if (r < 0) continue;
      for (int i = 0; i < L.cell_block; ++i)
        if (cells[c].a12(i, s) != 0.0) t.emplace_back(r, L.cell_dof(c, i), cells[c].a12(i, s));
    }
  SparseMatrix A(L.num_free_traces(), L.num_cell_dofs());
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

SparseMatrix BlockSystem::a22() const {
  const BlockLayout& L = *layout;
  std::vector<Triplet> t;
  for (Index c = 0; c < L.num_cells; ++c)
    for (int s = 0; s < L.num_local_traces(); ++s) {
      const Index r = L.local_trace_free(c, s);
      if (r < 0) continue;
      for (int q = 0; q < L.num_local_traces(); ++q) {
        const Index col = L.local_trace_free(c, q);
        if (col >= 0 && cells[c].a22(s, q) != 0.0) t.emplace_back(r, col, cells[c].a22(s, q));
      }
    }
  SparseMatrix A(L.num_free_traces(), L.num_free_traces());
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

Vector BlockSystem::rhs_cell() const {
  const BlockLayout& L = *layout;
  Vector f(L.num_cell_dofs());
  for (Index c = 0; c < L.num_cells; ++c) f.segment(L.cell_dof(c, 0), L.cell_block) = cells[c].f1;
  return f;
}

Vector BlockSystem::rhs_trace() const {
  const BlockLayout& L = *layout;
  Vector f = Vector::Zero(L.num_free_traces());
  for (Index c = 0; c < L.num_cells; ++c)
    for (int s = 0; s < L.num_local_traces(); ++s) {
      const Index r = L.local_trace_free(c, s);
      if (r >= 0) f(r) += cells[c].f2(s);
    }
  return f;
}

SparseMatrix BlockSystem::monolithic() const {
  const BlockLayout& L = *layout;
  const Index nc = L.num_cell_dofs();
  const SparseMatrix A11 = a11(), A21 = a21(), A22 = a22();
  std::vector<Triplet> t;
  t.reserve(A11.nonZeros() + 2 * A21.nonZeros() + A22.nonZeros());
  for (int k = 0; k < A11.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(A11, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  for (int k = 0; k < A21.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(A21, k); it; ++it) {
      t.emplace_back(nc + it.row(), it.col(), it.value());
      t.emplace_back(it.col(), nc + it.row(), it.value());
    }
  for (int k = 0; k < A22.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(A22, k); it; ++it) t.emplace_back(nc + it.row(), nc + it.col(), it.value());
  SparseMatrix A(L.num_dofs(), L.num_dofs());
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

Vector BlockSystem::monolithic_rhs() const {
  Vector f(layout->num_dofs());
  f << rhs_cell(), rhs_trace();
  return f;
}

Vector BlockSystem::gather_traces(Index cell, const Vector& free_traces) const {
  const BlockLayout& L = *layout;
  Vector t(L.num_local_traces());
  for (int s = 0; s < L.num_local_traces(); ++s) {
    const Index r = L.local_trace_free(cell, s);
    t(s) = r >= 0 ? free_traces(r) : 0.0;
  }
  return t;
}

// ---------------------------------------------------------------------------
// Assembly driver

namespace {

using Kernel = std::function<void(const CellEval&, MatrixXd&, VectorXd&)>;

VectorXd weights_times(const VectorXd& w, const std::vector<Point>& x, const std::function<double(const Point&)>& g) {
  VectorXd r(w.size());
  for (Index q = 0; q < w.size(); ++q) r(q) = w(q) * g(x[q]);
  return r;
}

VectorXd weights_times(const VectorXd& w, const std::vector<Point>& x, const Coefficient& c) {
  if (c.is_constant()) return w * c.value();
  VectorXd r(w.size());
  for (Index q = 0; q < w.size(); ++q) r(q) = w(q) * c(x[q]);
  return r;
}

VectorXd weights_inverse(const VectorXd& w, const std::vector<Point>& x, const Coefficient& c) {
  VectorXd r(w.size());
  for (Index q = 0; q < w.size(); ++q) r(q) = w(q) / c(x[q]);
  return r;
}

BlockSystem assemble(const Mesh& mesh, const LayoutPtr& layout, const ProblemParams& params, std::string name,
                     const std::map<Index, double>& dirichlet, const Kernel& kernel) {
  const BlockLayout& L = *layout;
  if (L.num_cells != mesh.num_cells() || L.dim != mesh.dim())
    throw InvalidArgument("layout does not belong to this mesh");
  if (L.k != params.k) throw InvalidArgument("layout degree differs from params.k");
  params.validate();
  const ElementTables tables(mesh.dim(), params.k, params.order());
  BlockSystem s;
  s.layout = layout;
  s.name = std::move(name);
  s.dirichlet = dirichlet;
  s.cells.resize(L.num_cells);
  const int cb = L.cell_block;
  const int nt = L.num_local_traces();
  MatrixXd K(L.local_size(), L.local_size());
  VectorXd F(L.local_size());
  VectorXd known(nt);
  for (Index c = 0; c < L.num_cells; ++c) {
    const CellEval ev = detail::evaluate_cell(tables, L, mesh, c);
    K.setZero();
    F.setZero();
    kernel(ev, K, F);
    CellBlocks& b = s.cells[c];
    b.a11 = K.topLeftCorner(cb, cb);
    b.a12 = K.topRightCorner(cb, nt);
    b.a22 = K.bottomRightCorner(nt, nt);
    b.f1 = F.head(cb);
    b.f2 = F.tail(nt);
    bool any = false;
    for (int t = 0; t < nt; ++t) {
      known(t) = 0.0;
      const Index g = L.local_trace_dof(c, t);
      if (L.trace_free[g] >= 0) continue;
      auto it = dirichlet.find(g);
      if (it != dirichlet.end() && it->second != 0.0) {
        known(t) = it->second;
        any = true;
      }
    }
    if (any) {
      b.f1.noalias() -= b.a12 * known;
      b.f2.noalias() -= b.a22 * known;
    }
  }
  return s;
}

MatrixXd facet_diff(const std::vector<MatrixXd>& a, const std::vector<MatrixXd>& b, int c) { return a[c] - b[c]; }

// (eps(u) n)_c on a facet
MatrixXd strain_normal(const FacetEval& fe, int dim, int c) {
  MatrixXd T = MatrixXd::Zero(fe.du[0].rows(), fe.du[0].cols());
  for (int r = 0; r < dim; ++r) T += fe.normal(r) * detail::sym_grad(fe.du, dim, c, r);
  return T;
}

void add_viscous(const CellEval& ev, int dim, double nu, double eta, bool consistency, MatrixXd& K) {
  const VectorXd wn = nu * ev.w;
  for (int c = 0; c < dim; ++c)
    for (int r = 0; r < dim; ++r) {
      const MatrixXd E = detail::sym_grad(ev.du, dim, c, r);
      add_form(K, E, wn, E);
    }
  for (const FacetEval& fe : ev.facets) {
    const VectorXd wp = (nu * eta / ev.h) * fe.w;
    const VectorXd wc = -nu * fe.w;
    for (int c = 0; c < dim; ++c) {
      const MatrixXd J = facet_diff(fe.u, fe.ubar, c);
      add_form(K, J, wp, J);
      if (consistency) {
        const MatrixXd T = strain_normal(fe, dim, c);
        add_form(K, T, wc, J);
        add_form(K, J, wc, T);
      }
    }
  }
}

void add_symmetric(MatrixXd& K, const MatrixXd& G) { K += G + G.transpose(); }

void require(const BlockLayout& L, Problem p, const char* what) {
  if (L.problem != p) throw InvalidArgument(std::string(what) + ": layout is for " + to_string(L.problem));
}

}  // namespace

BlockSystem assemble_darcy(const Mesh& mesh, const LayoutPtr& layout, const ProblemParams& params,
                           const ScalarField& f, const ScalarField& p_dirichlet) {
  require(*layout, Problem::darcy, "assemble_darcy");
  std::map<Index, double> dir;
  if (p_dirichlet)
    dir = to_trace_dofs(*layout, layout->pressure_trace, interpolate_boundary(mesh, layout->pressure_trace, p_dirichlet));
  const int dim = mesh.dim();
  return assemble(mesh, layout, params, "darcy", dir, [&](const CellEval& ev, MatrixXd& K, VectorXd& F) {
    const VectorXd wm = -weights_inverse(ev.w, ev.x, params.xi);
    for (int c = 0; c < dim; ++c) add_form(K, ev.u[c], wm, ev.u[c]);
    MatrixXd G = MatrixXd::Zero(K.rows(), K.cols());
    add_form(G, ev.p, ev.w, ev.div);
    for (const FacetEval& fe : ev.facets) add_form(G, fe.pbar, -fe.w, fe.un);
    add_symmetric(K, G);
    add_form(K, ev.p, weights_times(ev.w, ev.x, params.gamma), ev.p);
    if (f) F.noalias() += ev.p.transpose() * weights_times(ev.w, ev.x, f);
  });
}

namespace {

void add_pressure_inner(const CellEval& ev, const ProblemParams& params, double eta, MatrixXd& K) {
  add_form(K, ev.p, weights_times(ev.w, ev.x, params.gamma), ev.p);
  const VectorXd wx = weights_times(ev.w, ev.x, params.xi);
  for (const MatrixXd& g : ev.dp) add_form(K, g, wx, g);
  for (const FacetEval& fe : ev.facets) {
    const MatrixXd J = fe.p - fe.pbar;
    add_form(K, J, weights_times(fe.w, fe.x, params.xi) * (eta / ev.h), J);
  }
}

}  // namespace

BlockSystem assemble_darcy_inner(const Mesh& mesh, const LayoutPtr& layout, const ProblemParams& params) {
  if (layout->problem == Problem::stokes) throw InvalidArgument("assemble_darcy_inner: Stokes layout");
  const int dim = mesh.dim();
  const double eta = params.eta_for(dim);
  return assemble(mesh, layout, params, "darcy-inner", {}, [&](const CellEval& ev, MatrixXd& K, VectorXd&) {
    if (layout->has_velocity()) {
      const VectorXd wm = weights_inverse(ev.w, ev.x, params.xi);
      for (int c = 0; c < dim; ++c) add_form(K, ev.u[c], wm, ev.u[c]);
    }
    add_pressure_inner(ev, params, eta, K);
  });
}

BlockSystem assemble_aux_hdg(const Mesh& mesh, const LayoutPtr& layout, const ProblemParams& params,
                             const ScalarField& f) {
  require(*layout, Problem::hdg_poisson, "assemble_aux_hdg");
  const double eta = params.eta_for(mesh.dim());
  return assemble(mesh, layout, params, "aux-hdg", {}, [&](const CellEval& ev, MatrixXd& K, VectorXd& F) {
    add_pressure_inner(ev, params, eta, K);
    for (const FacetEval& fe : ev.facets) {
      const MatrixXd J = fe.p - fe.pbar;
      const VectorXd wx = -weights_times(fe.w, fe.x, params.xi);
      add_form(K, J, wx, fe.dpn);
      add_form(K, fe.dpn, wx, J);
    }
    if (f) F.noalias() += ev.p.transpose() * weights_times(ev.w, ev.x, f);
  });
}

BlockSystem assemble_stokes(const Mesh& mesh, const LayoutPtr& layout, const ProblemParams& params,
                            const VectorField& f, const VectorField& u_dirichlet) {
  require(*layout, Problem::stokes, "assemble_stokes");
  std::map<Index, double> dir;
  if (u_dirichlet)
    dir = to_trace_dofs(*layout, layout->velocity_trace,
                        interpolate_boundary(mesh, layout->velocity_trace, u_dirichlet));
  const int dim = mesh.dim();
  const double eta = params.eta_for(dim);
  return assemble(mesh, layout, params, "stokes", dir, [&](const CellEval& ev, MatrixXd& K, VectorXd& F) {
    add_viscous(ev, dim, params.nu, eta, true, K);
    MatrixXd G = MatrixXd::Zero(K.rows(), K.cols());
    add_form(G, ev.p, -ev.w, ev.div);
    for (const FacetEval& fe : ev.facets) {
      add_form(G, fe.pbar, fe.w, fe.un);
      if (!fe.boundary) continue;
      // Boundary mass balance <qbar, (u - ubar).n>; only lifts Dirichlet data.
      MatrixXd ubar_n = MatrixXd::Zero(fe.pbar.rows(), fe.pbar.cols());
      for (int c = 0; c < dim; ++c) ubar_n += fe.normal(c) * fe.ubar[c];
      add_form(G, fe.pbar, -fe.w, ubar_n);
    }
    add_symmetric(K, G);
    if (f) {
      MatrixXd fq(ev.w.size(), dim);
      for (Index q = 0; q < ev.w.size(); ++q) fq.row(q) = ev.w(q) * f(ev.x[q]).head(dim).transpose();
      for (int c = 0; c < dim; ++c) F.noalias() += ev.u[c].transpose() * fq.col(c);
    }
  });
}

BlockSystem assemble_stokes_inner(const Mesh& mesh, const LayoutPtr& layout, const ProblemParams& params,
                                  bool hatted) {
  require(*layout, Problem::stokes, "assemble_stokes_inner");
  const int dim = mesh.dim();
  const double eta = params.eta_for(dim);
  const double nu = params.nu;
  const double zeta = params.zeta;
  return assemble(mesh, layout, params, hatted ? "stokes-inner-hatted" : "stokes-inner", {},
                  [&](const CellEval& ev, MatrixXd& K, VectorXd&) {
                    add_viscous(ev, dim, nu, eta, hatted, K);
                    if (zeta > 0) add_form(K, ev.div, zeta * ev.w, ev.div);
                    add_form(K, ev.p, ev.w / nu, ev.p);
                    for (const FacetEval& fe : ev.facets) add_form(K, fe.pbar, (ev.h / (nu * eta)) * fe.w, fe.pbar);
                  });
}

BlockSystem assemble_counterexample_inner(const Mesh& mesh, const LayoutPtr& layout, const ProblemParams& params) {
  require(*layout, Problem::darcy, "assemble_counterexample_inner");
  const int dim = mesh.dim();
  auto m_coef = [&](const Point& x) { return params.big_m(x); };
  BlockSystem s = assemble(mesh, layout, params, "counterexample-inner", {},
                           [&](const CellEval& ev, MatrixXd& K, VectorXd&) {
                             const VectorXd wm = weights_inverse(ev.w, ev.x, params.xi);
                             for (int c = 0; c < dim; ++c) add_form(K, ev.u[c], wm, ev.u[c]);
                             VectorXd wd(ev.w.size()), wp(ev.w.size());
                             for (Index q = 0; q < ev.w.size(); ++q) {
                               const double M = m_coef(ev.x[q]);
                               wd(q) = ev.w(q) / M;
                               wp(q) = ev.w(q) * M;
                             }
                             add_form(K, ev.div, wd, ev.div);
                             add_form(K, ev.p, wp, ev.p);
                             for (const FacetEval& fe : ev.facets)
                               add_form(K, fe.pbar, weights_times(fe.w, fe.x, params.xi) * ev.h, fe.pbar);
                           });

  // Normal jumps across interior facets.
  const BlockLayout& L = *layout;
  const ElementTables tables(dim, params.k, params.order());
  const QuadratureRule& fr = tables.facet_rule();
  const int nk = tables.velocity_basis().size();
  const int nu = dim * nk;
  std::vector<Triplet> trip;
  for (Index f = 0; f < mesh.num_facets(); ++f) {
    if (mesh.is_boundary(f)) continue;
    const auto& fc = mesh.facet_cells(f);
    const Point& n = mesh.facet_normal(f);
    const double scale = mesh.facet_area(f) / reference_measure(dim - 1) / mesh.facet_diameter(f);
    VectorXd w(fr.size());
    for (int q = 0; q < fr.size(); ++q)
      w(q) = fr.weights[q] * scale / params.xi(detail::facet_point(mesh, f, fr.points[q]));
    std::array<MatrixXd, 2> J;
    for (int side = 0; side < 2; ++side) {
      const Index c = fc[side];
      const int lf = mesh.local_facet_index(c, f);
      const ShapeTable& t = tables.velocity_trace(lf, detail::facet_orientation(mesh, c, lf));
      J[side].resize(fr.size(), nu);
      for (int comp = 0; comp < dim; ++comp) J[side].middleCols(comp * nk, nk) = n(comp) * t.values;
    }
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        const double sign = a == b ? 1.0 : -1.0;
        const MatrixXd blk = sign * (J[a].transpose() * w.asDiagonal() * J[b]);
        if (a == b) {
          s.cells[fc[a]].a11.topLeftCorner(nu, nu) += blk;
        } else {
          for (int j = 0; j < nu; ++j)
            for (int i = 0; i < nu; ++i) trip.emplace_back(L.cell_dof(fc[a], i), L.cell_dof(fc[b], j), blk(i, j));
        }
      }
  }
  s.coupling.resize(L.num_cell_dofs(), L.num_cell_dofs());
  s.coupling.setFromTriplets(trip.begin(), trip.end());
  return s;
}

SparseMatrix assemble_mean_deviation(const Mesh& mesh, const BlockLayout& L) {
  const int dim = mesh.dim();
  const QuadratureRule fr = simplex_quadrature(dim - 1, 2 * L.k + 2);
  const ScalarBasis fb(dim - 1, L.k);
  const int m = fb.size();
  // Reference integrals of the facet basis: int_F phi_j = (area / |ref|) * mu_j.
  VectorXd mu = VectorXd::Zero(m);
  std::vector<double> v(m);
  for (int q = 0; q < fr.size(); ++q) {
    fb.eval(fr.points[q], v.data());
    for (int j = 0; j < m; ++j) mu(j) += fr.weights[q] * v[j];
  }
  const double ref = reference_measure(dim - 1);
  const int ncomp = L.has_velocity_trace() ? dim + 1 : 1;
  std::vector<Triplet> trip;
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    const CellGeometry g = mesh.cell_geometry(c);
    const int nf = dim + 1;
    // For one scalar component with local coefficients t (nf * m):
    // ||t - m_K t||^2 = sum_F s_F |t_F|^2 - (1/|dK|) (sum_F s_F mu.t_F)^2, s_F = area / |ref|.
    MatrixXd Q = MatrixXd::Zero(nf * m, nf * m);
    VectorXd a(nf * m);
    for (int i = 0; i < nf; ++i) {
      const double sF = g.facet_area[i] / ref;
      Q.block(i * m, i * m, m, m) += sF * MatrixXd::Identity(m, m);
      a.segment(i * m, m) = sF * mu;
    }
    Q -= (a * a.transpose()) / g.boundary_measure;
    Q /= g.diameter;
    for (int comp = 0; comp < ncomp; ++comp) {
      std::vector<Index> idx(nf * m);
      for (int i = 0; i < nf; ++i)
        for (int j = 0; j < m; ++j)
          idx[i * m + j] = L.trace_free[L.trace_dof(mesh.cell_facets(c)[i], comp * m + j)];
      for (int r = 0; r < nf * m; ++r)
        for (int s = 0; s < nf * m; ++s)
          if (idx[r] >= 0 && idx[s] >= 0) trip.emplace_back(idx[r], idx[s], Q(r, s));
    }
  }
  SparseMatrix H(L.num_free_traces(), L.num_free_traces());
  H.setFromTriplets(trip.begin(), trip.end());
  return H;
}

// ---------------------------------------------------------------------------
// Norms and errors: an independent quadrature loop that maps physical
// points back to reference coordinates instead of using trace tables.

namespace {

struct CellMap {
  Point x0;
  MatrixXd J, Jinv, JinvT;
  double detJ;
};

CellMap cell_map(const Mesh& mesh, Index c) {
  CellMap m;
  m.x0 = mesh.vertex(mesh.cell_vertices(c)[0]);
  m.J = detail::cell_jacobian(mesh, c);
  m.Jinv = m.J.inverse();
  m.JinvT = m.Jinv.transpose();
  m.detJ = m.J.determinant();
  return m;
}

Point to_reference(const CellMap& m, const Point& x, int dim) {
  Point r = Point::Zero();
  r.head(dim) = m.Jinv * (x - m.x0).head(dim);
  return r;
}

// Values and physical gradients of the cell fields at a physical point.
struct FieldSample {
  Eigen::Vector3d u = Eigen::Vector3d::Zero();
  Eigen::Matrix3d du = Eigen::Matrix3d::Zero();  // du(c, r) = d u_c / d x_r
  double p = 0;
  Eigen::Vector3d dp = Eigen::Vector3d::Zero();
};

class FieldSampler {
 public:
  FieldSampler(const BlockLayout& L) : L_(L), bu_(L.dim, L.k), bp_(L.dim, L.k - 1) {}

  FieldSample sample(const CellMap& m, const Point& x, const double* coeffs) const {
    const int dim = L_.dim;
    const Point r = to_reference(m, x, dim);
    FieldSample s;
    if (L_.has_velocity()) {
      const int n = bu_.size();
      std::vector<double> v(n), g(n * dim);
      bu_.eval(r, v.data());
      bu_.eval_grad(r, g.data());
      for (int c = 0; c < dim; ++c) {
        Eigen::VectorXd gref = Eigen::VectorXd::Zero(dim);
        for (int i = 0; i < n; ++i) {
          const double a = coeffs[c * n + i];
          s.u(c) += a * v[i];
          for (int d = 0; d < dim; ++d) gref(d) += a * g[d * n + i];
        }
        const Eigen::VectorXd gp = m.JinvT * gref;
        for (int d = 0; d < dim; ++d) s.du(c, d) = gp(d);
      }
    }
    const int n = bp_.size();
    std::vector<double> v(n), g(n * dim);
    bp_.eval(r, v.data());
    bp_.eval_grad(r, g.data());
    Eigen::VectorXd gref = Eigen::VectorXd::Zero(dim);
    for (int i = 0; i < n; ++i) {
      const double a = coeffs[L_.velocity_block + i];
      s.p += a * v[i];
      for (int d = 0; d < dim; ++d) gref(d) += a * g[d * n + i];
    }
    s.dp.head(dim) = m.JinvT * gref;
    return s;
  }

 private:
  const BlockLayout& L_;
  ScalarBasis bu_, bp_;
};

}  // namespace

NormValues evaluate_norms(const Mesh& mesh, const BlockLayout& L, double eta, const Vector& cell_values,
                          const Vector& traces) {
  if (cell_values.size() != L.num_cell_dofs()) throw InvalidArgument("evaluate_norms: cell vector length");
  if (traces.size() != L.num_traces()) throw InvalidArgument("evaluate_norms: trace vector length");
  const int dim = mesh.dim();
  const QuadratureRule cr = simplex_quadrature(dim, 2 * L.k + 2);
  const QuadratureRule fr = simplex_quadrature(dim - 1, 2 * L.k + 2);
  const ScalarBasis fb(dim - 1, L.k);
  const int m = fb.size();
  const double fref = reference_measure(dim - 1);
  const FieldSampler sampler(L);
  std::vector<double> phi(m);

  NormValues nv;
  nv.eta = eta;
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    const CellMap cm = cell_map(mesh, c);
    const CellGeometry geo = mesh.cell_geometry(c);
    const double h = geo.diameter;
    const double* coeffs = cell_values.data() + L.cell_dof(c, 0);
    for (int q = 0; q < cr.size(); ++q) {
      Point x = cm.x0;
      x.head(dim) += cm.J * cr.points[q].head(dim);
      const double w = cr.weights[q] * cm.detJ;
      const FieldSample s = sampler.sample(cm, x, coeffs);
      const Eigen::Matrix3d e = 0.5 * (s.du + s.du.transpose());
      nv.u_l2 += w * s.u.squaredNorm();
      nv.eps += w * e.squaredNorm();
      nv.div += w * s.du.trace() * s.du.trace();
      nv.p_l2 += w * s.p * s.p;
      nv.grad_p += w * s.dp.squaredNorm();
    }
    // Facet terms; means over dK first.
    Eigen::Vector3d ubar_int = Eigen::Vector3d::Zero();
    double pbar_int = 0;
    struct Sample {
      double w;
      Eigen::Vector3d ubar;
      double pbar;
      FieldSample cell;
    };
    std::vector<Sample> samples;
    for (int i = 0; i <= dim; ++i) {
      const Index f = mesh.cell_facets(c)[i];
      for (int q = 0; q < fr.size(); ++q) {
        const Point x = detail::facet_point(mesh, f, fr.points[q]);
        const double w = fr.weights[q] * geo.facet_area[i] / fref;
        fb.eval(fr.points[q], phi.data());
        Sample s{w, Eigen::Vector3d::Zero(), 0.0, sampler.sample(cm, x, coeffs)};
        for (int j = 0; j < m; ++j) {
          for (int comp = 0; comp < (L.has_velocity_trace() ? dim : 0); ++comp)
            s.ubar(comp) += traces(L.ubar_dof(f, comp, j)) * phi[j];
          s.pbar += traces(L.pbar_dof(f, j)) * phi[j];
        }
        ubar_int += w * s.ubar;
        pbar_int += w * s.pbar;
        samples.push_back(s);
      }
    }
    const Eigen::Vector3d ubar_mean = ubar_int / geo.boundary_measure;
    const double pbar_mean = pbar_int / geo.boundary_measure;
    for (const Sample& s : samples) {
      if (L.has_velocity()) nv.u_jump += s.w / h * (s.cell.u - s.ubar).squaredNorm();
      nv.p_jump += s.w / h * (s.cell.p - s.pbar) * (s.cell.p - s.pbar);
      nv.pbar_h += s.w * h * s.pbar * s.pbar;
      nv.ubar_mean += s.w / h * (s.ubar - ubar_mean).squaredNorm();
      nv.pbar_mean += s.w / h * (s.pbar - pbar_mean) * (s.pbar - pbar_mean);
    }
  }
  return nv;
}

FieldErrors l2_errors(const Mesh& mesh, const BlockLayout& L, const Vector& cell_values, const VectorField& exact_u,
                      const ScalarField& exact_p, double p_shift, int quad_order) {
  if (cell_values.size() != L.num_cell_dofs()) throw InvalidArgument("l2_errors: cell vector length");
  const int dim = mesh.dim();
  const QuadratureRule cr = simplex_quadrature(dim, quad_order > 0 ? quad_order : 2 * L.k + 2);
  const FieldSampler sampler(L);
  double eu = 0, ep = 0;
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    const CellMap cm = cell_map(mesh, c);
    for (int q = 0; q < cr.size(); ++q) {
      Point x = cm.x0;
      x.head(dim) += cm.J * cr.points[q].head(dim);
      const double w = cr.weights[q] * cm.detJ;
      const FieldSample s = sampler.sample(cm, x, cell_values.data() + L.cell_dof(c, 0));
      if (exact_u && L.has_velocity()) eu += w * (s.u - exact_u(x)).head(dim).squaredNorm();
      if (exact_p) {
        const double d = s.p + p_shift - exact_p(x);
        ep += w * d * d;
      }
    }
  }
  return {std::sqrt(eu), std::sqrt(ep)};
}

double pressure_mean(const Mesh& mesh, const BlockLayout& L, const Vector& cell_values) {
  const int dim = mesh.dim();
  const QuadratureRule cr = simplex_quadrature(dim, std::max(1, 2 * L.k));
  const FieldSampler sampler(L);
  double integral = 0, volume = 0;
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    const CellMap cm = cell_map(mesh, c);
    for (int q = 0; q < cr.size(); ++q) {
      Point x = cm.x0;
      x.head(dim) += cm.J * cr.points[q].head(dim);
      const double w = cr.weights[q] * cm.detJ;
      integral += w * sampler.sample(cm, x, cell_values.data() + L.cell_dof(c, 0)).p;
      volume += w;
    }
  }
  return integral / volume;
}

namespace {

// Reference-element projection coefficients of the constant 1 onto an orthonormal basis.
VectorXd project_one(const ScalarBasis& b) {
  const QuadratureRule r = simplex_quadrature(b.dim(), std::max(1, b.degree()));
  VectorXd a = VectorXd::Zero(b.size());
  std::vector<double> v(b.size());
  for (int q = 0; q < r.size(); ++q) {
    b.eval(r.points[q], v.data());
    for (int j = 0; j < b.size(); ++j) a(j) += r.weights[q] * v[j];
  }
  return a;
}

}  // namespace

Vector constant_pressure_cells(const Mesh& mesh, const BlockLayout& L) {
  const VectorXd a = project_one(ScalarBasis(mesh.dim(), L.k - 1));
  Vector x = Vector::Zero(L.num_cell_dofs());
  for (Index c = 0; c < L.num_cells; ++c) x.segment(L.cell_dof(c, L.velocity_block), a.size()) = a;
  return x;
}

Vector constant_pressure_traces(const Mesh& mesh, const BlockLayout& L) {
  const VectorXd a = project_one(ScalarBasis(mesh.dim() - 1, L.k));
  Vector t = Vector::Zero(L.num_traces());
  for (Index f = 0; f < L.num_facets; ++f)
    for (int j = 0; j < a.size(); ++j) t(L.pbar_dof(f, j)) = a(j);
  return t;
}

// ---------------------------------------------------------------------------
// Test problems

ManufacturedProblem manufactured_rhs(std::string_view tag, int dim, const ProblemParams& params) {
  if (dim != 2 && dim != 3) throw InvalidArgument("manufactured_rhs: dim must be 2 or 3");
  constexpr double pi = std::numbers::pi;
  ManufacturedProblem mp;
  mp.dim = dim;
  if (tag == "darcy") {
    if (!params.xi.is_constant() || !params.gamma.is_constant())
      throw InvalidArgument("manufactured Darcy solution needs constant xi and gamma");
    const double xi = params.xi.value(), gamma = params.gamma.value();
    mp.problem = Problem::darcy;
    mp.xi = xi;
    mp.gamma = gamma;
    auto p = [dim](const Point& x) {
      double v = std::cos(pi * x(0)) * std::sin(pi * x(1));
      if (dim == 3) v *= std::cos(pi * x(2));
      return v;
    };
    mp.exact_p = p;
    mp.p_dirichlet = p;
    mp.exact_u = [dim, xi](const Point& x) {
      const double cx = std::cos(pi * x(0)), sx = std::sin(pi * x(0));
      const double cy = std::cos(pi * x(1)), sy = std::sin(pi * x(1));
      const double cz = dim == 3 ? std::cos(pi * x(2)) : 1.0;
      const double sz = dim == 3 ? std::sin(pi * x(2)) : 0.0;
      // u = -xi grad p
      return Point(xi * pi * sx * sy * cz, -xi * pi * cx * cy * cz, xi * pi * cx * sy * sz);
    };
    mp.f_darcy = [p, dim, xi, gamma](const Point& x) { return (dim * pi * pi * xi + gamma) * p(x); };
    return mp;
  }
  if (tag == "darcy-heterogeneous") {
    mp.problem = Problem::darcy;
    mp.xi = Coefficient(ScalarField([dim](const Point& x) {
      double s = 1.0;
      for (int i = 0; i < dim; ++i) s += (x(i) - 0.5) * (x(i) - 0.5);
      return s;
    }));
    mp.gamma = Coefficient(ScalarField([dim](const Point& x) {
      for (int i = 0; i < dim; ++i)
        if (!(x(i) > 0.3 && x(i) < 0.7)) return 1e4;
      return 1.0;
    }));
    mp.f_darcy = [](const Point&) { return 1.0; };
    mp.p_dirichlet = [](const Point&) { return 0.0; };
    return mp;
  }
  if (tag == "stokes") {
    mp.problem = Problem::stokes;
    const double nu = params.nu;
    if (dim == 2) {
      mp.exact_u = [](const Point& x) {
        return Point(std::sin(pi * x(0)) * std::sin(pi * x(1)), std::cos(pi * x(0)) * std::cos(pi * x(1)), 0.0);
      };
      mp.exact_p = [](const Point& x) { return std::sin(pi * x(0)) * std::cos(pi * x(1)); };
      const VectorField u = mp.exact_u;
      mp.f_stokes = [u, nu](const Point& x) {
        const Point gp(pi * std::cos(pi * x(0)) * std::cos(pi * x(1)), -pi * std::sin(pi * x(0)) * std::sin(pi * x(1)),
                       0.0);
        return Point(nu * pi * pi * u(x) + gp);
      };
    } else {
      mp.exact_u = [](const Point& x) {
        const double s0 = std::sin(pi * x(0)), s1 = std::sin(pi * x(1)), s2 = std::sin(pi * x(2));
        const double c0 = std::cos(pi * x(0)), c1 = std::cos(pi * x(1)), c2 = std::cos(pi * x(2));
        return Point(pi * (s0 * c1 - s0 * c2), pi * (s1 * c2 - s1 * c0), pi * (s2 * c0 - s2 * c1));
      };
      mp.exact_p = [](const Point& x) {
        return std::cos(pi * x(0)) * std::sin(pi * x(1)) * std::cos(pi * x(2));
      };
      const VectorField u = mp.exact_u;
      mp.f_stokes = [u, nu](const Point& x) {
        const double s0 = std::sin(pi * x(0)), s1 = std::sin(pi * x(1)), s2 = std::sin(pi * x(2));
        const double c0 = std::cos(pi * x(0)), c1 = std::cos(pi * x(1)), c2 = std::cos(pi * x(2));
        const Point gp(-pi * s0 * s1 * c2, pi * c0 * c1 * c2, -pi * c0 * s1 * s2);
        return Point(nu * pi * pi * u(x) + gp);
      };
    }
    mp.u_dirichlet = mp.exact_u;
    return mp;
  }
  if (tag == "stokes-cavity") {
    mp.problem = Problem::stokes;
    mp.f_stokes = [](const Point&) { return Point::Zero().eval(); };
    if (dim == 2) {
      mp.box = BoxSpec::symmetric();
      mp.u_dirichlet = [](const Point& x) {
        if (x(1) > 1.0 - 1e-12) return Point(1.0 - std::pow(x(0), 4), 0.0, 0.0);
        return Point::Zero().eval();
      };
      mp.note = "lid velocity read as tangential: u = (1 - x^4, 0) on y = 1";
    } else {
      mp.u_dirichlet = [](const Point& x) {
        if (x(2) > 1.0 - 1e-12) {
          const double t1 = 2.0 * x(0) - 1.0, t2 = 2.0 * x(1) - 1.0;
          return Point(1.0 - std::pow(t1, 4), std::pow(1.0 - t2, 4) / 10.0, 0.0);
        }
        return Point::Zero().eval();
      };
    }
    return mp;
  }
  throw InvalidArgument("manufactured_rhs: unknown problem tag '" + std::string(tag) + "'");
}

}  // namespace condensa
