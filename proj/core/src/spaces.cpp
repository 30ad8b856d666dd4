#include "condensa/spaces.hpp"

#include <algorithm>

#include "condensa/basis.hpp"
#include "condensa/error.hpp"
#include "condensa/quadrature.hpp"
#include "element.hpp"

namespace condensa {

FunctionSpace build_space(const Mesh& mesh, SpaceKind kind, int degree, bool masked) {
  FunctionSpace s;
  s.kind = kind;
  s.dim = mesh.dim();
  s.degree = degree;
  s.masked = masked;
  if (degree < 0) throw InvalidArgument("build_space: negative degree");
  if (kind == SpaceKind::facet_vector && degree < 1)
    throw InvalidArgument("build_space: vector facet spaces need degree >= 1");
  if (masked && !s.is_facet()) throw InvalidArgument("build_space: only facet spaces can be masked");
  const int entity_dim = s.is_facet() ? s.dim - 1 : s.dim;
  s.scalar_size = polynomial_dimension(entity_dim, degree);
  s.block_size = s.scalar_size * s.components();
  s.num_entities = s.is_facet() ? mesh.num_facets() : mesh.num_cells();
  if (s.is_facet()) {
    for (Index f = 0; f < mesh.num_facets(); ++f)
      if (mesh.is_boundary(f))
        for (int i = 0; i < s.block_size; ++i) s.boundary_dofs.push_back(s.dof(f, i));
  }
  return s;
}

namespace {

template <class Eval>
std::map<Index, double> project_boundary(const Mesh& mesh, const FunctionSpace& space, int ncomp, Eval eval) {
  if (!space.is_facet()) throw InvalidArgument("interpolate_boundary: not a facet space");
  const int dim = mesh.dim();
  const QuadratureRule rule = simplex_quadrature(dim - 1, 2 * space.degree + 2);
  const ScalarBasis basis(dim - 1, space.degree);
  const int m = basis.size();
  Eigen::MatrixXd phi(rule.size(), m);
  std::vector<double> v(m);
  for (int q = 0; q < rule.size(); ++q) {
    basis.eval(rule.points[q], v.data());
    for (int j = 0; j < m; ++j) phi(q, j) = v[j];
  }
  std::map<Index, double> out;
  for (Index f = 0; f < mesh.num_facets(); ++f) {
    if (!mesh.is_boundary(f)) continue;
    // The facet basis is orthonormal on the reference facet, so the L2
    // projection is a weighted sum over reference quadrature.
    Eigen::MatrixXd coeff = Eigen::MatrixXd::Zero(m, ncomp);
    for (int q = 0; q < rule.size(); ++q) {
      const Point g = eval(detail::facet_point(mesh, f, rule.points[q]));
      for (int c = 0; c < ncomp; ++c) coeff.col(c) += rule.weights[q] * g(c) * phi.row(q).transpose();
    }
    for (int c = 0; c < ncomp; ++c)
      for (int j = 0; j < m; ++j) out[space.dof(f, c * m + j)] = coeff(j, c);
  }
  return out;
}

}  // namespace

std::map<Index, double> interpolate_boundary(const Mesh& mesh, const FunctionSpace& space, const ScalarField& g) {
  if (space.is_vector()) throw InvalidArgument("interpolate_boundary: scalar data for a vector space");
  return project_boundary(mesh, space, 1, [&](const Point& x) { return Point(g(x), 0, 0); });
}

std::map<Index, double> interpolate_boundary(const Mesh& mesh, const FunctionSpace& space, const VectorField& g) {
  if (!space.is_vector()) throw InvalidArgument("interpolate_boundary: vector data for a scalar space");
  return project_boundary(mesh, space, space.dim, g);
}

const char* to_string(Problem p) {
  switch (p) {
    case Problem::darcy: return "darcy";
    case Problem::stokes: return "stokes";
    case Problem::hdg_poisson: return "hdg_poisson";
  }
  return "?";
}

Index BlockLayout::ubar_dof(Index facet, int comp, int j) const {
  return trace_dof(facet, comp * pressure_trace.scalar_size + j);
}

BlockLayout make_layout(const Mesh& mesh, Problem problem, int k) {
  if (k < 1) throw InvalidArgument("make_layout: k must be at least 1");
  BlockLayout L;
  L.problem = problem;
  L.dim = mesh.dim();
  L.k = k;
  L.num_cells = mesh.num_cells();
  L.num_facets = mesh.num_facets();
  L.pressure = build_space(mesh, SpaceKind::cell_scalar, k - 1);
  L.pressure_trace = build_space(mesh, SpaceKind::facet_scalar, k, problem != Problem::stokes);
  if (problem != Problem::hdg_poisson) {
    L.velocity = build_space(mesh, SpaceKind::cell_vector, k);
    L.velocity_block = L.velocity.block_size;
  }
  if (problem == Problem::stokes) {
    L.velocity_trace = build_space(mesh, SpaceKind::facet_vector, k, true);
    L.ubar_block = L.velocity_trace.block_size;
  }
  L.pressure_block = L.pressure.block_size;
  L.cell_block = L.velocity_block + L.pressure_block;
  L.pbar_block = L.pressure_trace.block_size;
  L.trace_block = L.ubar_block + L.pbar_block;

  L.cell_facets.reserve(L.num_cells * (L.dim + 1));
  for (Index c = 0; c < L.num_cells; ++c)
    for (Index f : mesh.cell_facets(c)) L.cell_facets.push_back(f);
  L.trace_free.assign(L.num_traces(), -1);
  for (Index f = 0; f < L.num_facets; ++f) {
    const bool bnd = mesh.is_boundary(f);
    for (int j = 0; j < L.trace_block; ++j) {
      const bool is_ubar = j < L.ubar_block;
      const bool fixed = bnd && (is_ubar ? L.velocity_trace.masked : L.pressure_trace.masked);
      if (fixed) continue;
      L.trace_free[L.trace_dof(f, j)] = static_cast<Index>(L.free_to_trace.size());
      L.free_to_trace.push_back(L.trace_dof(f, j));
    }
  }
  return L;
}

std::map<Index, double> to_trace_dofs(const BlockLayout& layout, const FunctionSpace& space,
                                      const std::map<Index, double>& values) {
  if (!space.is_facet()) throw InvalidArgument("to_trace_dofs: not a facet space");
  const int offset = space.is_vector() ? 0 : layout.ubar_block;
  std::map<Index, double> out;
  for (const auto& [dof, value] : values) {
    const Index f = dof / space.block_size;
    const int i = static_cast<int>(dof % space.block_size);
    out[layout.trace_dof(f, offset + i)] = value;
  }
  return out;
}

Eigen::VectorXd expand_traces(const BlockLayout& layout, const Eigen::VectorXd& free_values,
                              const std::map<Index, double>& dirichlet) {
  if (free_values.size() != layout.num_free_traces())
    throw InvalidArgument("expand_traces: free vector has wrong length");
  Eigen::VectorXd t = Eigen::VectorXd::Zero(layout.num_traces());
  for (Index i = 0; i < layout.num_free_traces(); ++i) t(layout.free_to_trace[i]) = free_values(i);
  for (const auto& [dof, value] : dirichlet)
    if (layout.trace_free[dof] < 0) t(dof) = value;
  return t;
}

Eigen::VectorXd restrict_traces(const BlockLayout& layout, const Eigen::VectorXd& traces) {
  if (traces.size() != layout.num_traces()) throw InvalidArgument("restrict_traces: wrong length");
  Eigen::VectorXd r(layout.num_free_traces());
  for (Index i = 0; i < layout.num_free_traces(); ++i) r(i) = traces(layout.free_to_trace[i]);
  return r;
}

}  // namespace condensa
