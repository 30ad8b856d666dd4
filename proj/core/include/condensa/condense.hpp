#pragma once

#include <memory>
#include <vector>

#include <Eigen/LU>

#include "condensa/assembly.hpp"
#include "condensa/types.hpp"

namespace condensa {

/// Trace Schur complement of a BlockSystem with the per-cell factors needed
/// for back-substitution.
struct CondensedSystem {
  std::shared_ptr<const BlockLayout> layout;
  SparseMatrix S;                // free traces x free traces
  Vector rhs;                    // f2 - A21 A11^{-1} f1
  std::vector<Eigen::PartialPivLU<DenseMatrix>> local_factors;  // per cell, empty when not condensed
  std::vector<DenseMatrix> local_coupling;                      // per cell a12 (cell x local traces)
  std::vector<Vector> local_rhs;                                 // per cell f1
};

/// Eliminate the cell dofs cell by cell: S = A22 - A21 A11^{-1} A21^T.
/// Throws SingularBlockError naming the cell when a local block is singular.
/// Systems with inter-cell coupling cannot be condensed.
CondensedSystem condense(const BlockSystem& system);

/// Reduced inner product S_P of a preconditioner inner product. Local blocks
/// must be positive definite (checked by Cholesky; NotSpdError otherwise).
/// With inter-cell coupling, only P21 = 0 is supported and then S_P = P22.
CondensedSystem condense_precond(const BlockSystem& inner);

/// Cell dofs from a free trace vector: per cell A11^{-1}(f1 - a12 t).
Vector back_substitute(const CondensedSystem& condensed, const Vector& free_traces);

/// Local solver of one cell for given local trace data and local source
/// (cell-sized right-hand side): A11^{-1}(source - a12 traces).
Vector local_solve(const CondensedSystem& condensed, Index cell, const Vector& local_traces, const Vector& source);

/// Sparse lifting L = [-A11^{-1} A21^T ; I] from free traces to the monolithic
/// ordering [cell dofs | free traces].
SparseMatrix lifting_operator(const CondensedSystem& condensed);

/// Kernel of the Stokes trace system: (ubar, pbar) = (0, projection of 1).
Vector stokes_trace_kernel(const Mesh& mesh, const BlockLayout& layout);

}  // namespace condensa
