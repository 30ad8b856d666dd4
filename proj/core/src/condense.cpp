#include "condensa/condense.hpp"

#include <cmath>

#include <Eigen/Cholesky>

#include "condensa/error.hpp"

namespace condensa {

namespace {

void scatter_trace_block(const BlockLayout& L, Index cell, const DenseMatrix& M, std::vector<Triplet>& trip) {
  const int nt = L.num_local_traces();
  for (int s = 0; s < nt; ++s) {
    const Index r = L.local_trace_free(cell, s);
    if (r < 0) continue;
    for (int q = 0; q < nt; ++q) {
      const Index c = L.local_trace_free(cell, q);
      if (c >= 0 && M(s, q) != 0.0) trip.emplace_back(r, c, M(s, q));
    }
  }
}

void scatter_trace_vector(const BlockLayout& L, Index cell, const Vector& v, Vector& out) {
  for (int s = 0; s < L.num_local_traces(); ++s) {
    const Index r = L.local_trace_free(cell, s);
    if (r >= 0) out(r) += v(s);
  }
}

// Reciprocal condition estimate of the row-equilibrated block below which it
// counts as singular. Equilibration removes the parameter scaling (xi, nu).
constexpr double kSingularRcond = 1e-13;

double equilibrated_rcond(const DenseMatrix& A) {
  const Vector r = A.cwiseAbs().rowwise().maxCoeff();
  if ((r.array() == 0.0).any()) return 0.0;
  return Eigen::PartialPivLU<DenseMatrix>(r.cwiseInverse().asDiagonal() * A).rcond();
}

}  // namespace

CondensedSystem condense(const BlockSystem& system) {
  if (system.has_coupling()) throw InvalidArgument("condense: A11 couples different cells");
  const BlockLayout& L = *system.layout;
  CondensedSystem cs;
  cs.layout = system.layout;
  cs.rhs = Vector::Zero(L.num_free_traces());
  cs.local_factors.reserve(L.num_cells);
  cs.local_coupling.reserve(L.num_cells);
  cs.local_rhs.reserve(L.num_cells);
  std::vector<Triplet> trip;
  for (Index c = 0; c < L.num_cells; ++c) {
    const CellBlocks& b = system.cells[c];
    Eigen::PartialPivLU<DenseMatrix> lu(b.a11);
    const double rc = equilibrated_rcond(b.a11);
    if (!(rc > kSingularRcond)) throw SingularBlockError(c, "local block is singular (rcond " + std::to_string(rc) + ")");
    const DenseMatrix X = lu.solve(b.a12);
    const DenseMatrix Sk = b.a22 - b.a12.transpose() * X;
    scatter_trace_block(L, c, 0.5 * (Sk + Sk.transpose()), trip);
    scatter_trace_vector(L, c, b.f2 - X.transpose() * b.f1, cs.rhs);
    cs.local_factors.push_back(std::move(lu));
    cs.local_coupling.push_back(b.a12);
    cs.local_rhs.push_back(b.f1);
  }
  cs.S.resize(L.num_free_traces(), L.num_free_traces());
  cs.S.setFromTriplets(trip.begin(), trip.end());
  return cs;
}

CondensedSystem condense_precond(const BlockSystem& inner) {
  const BlockLayout& L = *inner.layout;
  CondensedSystem cs;
  cs.layout = inner.layout;
  cs.rhs = Vector::Zero(L.num_free_traces());
  std::vector<Triplet> trip;
  if (inner.has_coupling()) {
    for (Index c = 0; c < L.num_cells; ++c) {
      const CellBlocks& b = inner.cells[c];
      if (b.a12.cwiseAbs().maxCoeff() != 0.0)
        throw InvalidArgument("condense_precond: coupled cell block with nonzero P21");
      scatter_trace_block(L, c, b.a22, trip);
    }
  } else {
    cs.local_factors.reserve(L.num_cells);
    for (Index c = 0; c < L.num_cells; ++c) {
      const CellBlocks& b = inner.cells[c];
      Eigen::LLT<DenseMatrix> llt(b.a11);
      if (llt.info() != Eigen::Success)
        throw NotSpdError("condense_precond: local block of cell " + std::to_string(c) + " is not positive definite");
      const DenseMatrix X = llt.solve(b.a12);
      const DenseMatrix Sk = b.a22 - b.a12.transpose() * X;
      scatter_trace_block(L, c, 0.5 * (Sk + Sk.transpose()), trip);
      cs.local_factors.emplace_back(b.a11);
      cs.local_coupling.push_back(b.a12);
      cs.local_rhs.push_back(b.f1);
    }
  }
  cs.S.resize(L.num_free_traces(), L.num_free_traces());
  cs.S.setFromTriplets(trip.begin(), trip.end());
  return cs;
}

Vector local_solve(const CondensedSystem& cs, Index cell, const Vector& local_traces, const Vector& source) {
  if (cs.local_factors.empty()) throw InvalidArgument("local_solve: system was not condensed cell by cell");
  return cs.local_factors[cell].solve(source - cs.local_coupling[cell] * local_traces);
}

Vector back_substitute(const CondensedSystem& cs, const Vector& free_traces) {
  const BlockLayout& L = *cs.layout;
  if (free_traces.size() != L.num_free_traces()) throw InvalidArgument("back_substitute: trace vector length");
  if (cs.local_factors.empty()) throw InvalidArgument("back_substitute: no local factors");
  Vector x(L.num_cell_dofs());
  Vector t(L.num_local_traces());
  for (Index c = 0; c < L.num_cells; ++c) {
    for (int s = 0; s < L.num_local_traces(); ++s) {
      const Index r = L.local_trace_free(c, s);
      t(s) = r >= 0 ? free_traces(r) : 0.0;
    }
    x.segment(L.cell_dof(c, 0), L.cell_block) = local_solve(cs, c, t, cs.local_rhs[c]);
  }
  return x;
}

SparseMatrix lifting_operator(const CondensedSystem& cs) {
  const BlockLayout& L = *cs.layout;
  if (cs.local_factors.empty()) throw InvalidArgument("lifting_operator: no local factors");
  const Index nc = L.num_cell_dofs();
  std::vector<Triplet> trip;
  for (Index c = 0; c < L.num_cells; ++c) {
    const DenseMatrix X = -cs.local_factors[c].solve(cs.local_coupling[c]);
    for (int s = 0; s < L.num_local_traces(); ++s) {
      const Index r = L.local_trace_free(c, s);
      if (r < 0) continue;
      for (int i = 0; i < L.cell_block; ++i)
        if (X(i, s) != 0.0) trip.emplace_back(L.cell_dof(c, i), r, X(i, s));
    }
  }
  for (Index r = 0; r < L.num_free_traces(); ++r) trip.emplace_back(nc + r, r, 1.0);
  SparseMatrix Lift(nc + L.num_free_traces(), L.num_free_traces());
  Lift.setFromTriplets(trip.begin(), trip.end());
  return Lift;
}

Vector stokes_trace_kernel(const Mesh& mesh, const BlockLayout& layout) {
  if (layout.problem != Problem::stokes) throw InvalidArgument("stokes_trace_kernel: not a Stokes layout");
  return restrict_traces(layout, constant_pressure_traces(mesh, layout));
}

}  // namespace condensa
