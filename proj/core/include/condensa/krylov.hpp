#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

#include "condensa/types.hpp"

namespace condensa {

/// y = Op(x); y is resized by the callee.
using LinearOperator = std::function<void(const Vector& x, Vector& y)>;

LinearOperator as_operator(const SparseMatrix& A);

/// Sparse Cholesky factor. Construction certifies positive definiteness.
class SpdFactor {
 public:
  explicit SpdFactor(const SparseMatrix& A);
  ~SpdFactor();
  SpdFactor(SpdFactor&&) noexcept;
  SpdFactor& operator=(SpdFactor&&) noexcept;

  Vector solve(const Vector& b) const;
  Index size() const { return n_; }
  LinearOperator inverse() const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
  Index n_ = 0;
};

/// Sparse LU with partial pivoting, used for symmetric indefinite systems.
/// With kernel vectors Z the bordered matrix [A Z; Z^T 0] is factored instead,
/// and `solve` returns the solution orthogonal to Z (b must be orthogonal to Z).
class SymIndefFactor {
 public:
  explicit SymIndefFactor(const SparseMatrix& A, const std::vector<Vector>& kernel = {});
  ~SymIndefFactor();
  SymIndefFactor(SymIndefFactor&&) noexcept;
  SymIndefFactor& operator=(SymIndefFactor&&) noexcept;

  Vector solve(const Vector& b) const;
  Index size() const { return n_; }

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
  Index n_ = 0;
  int border_ = 0;
};

SpdFactor factor_spd(const SparseMatrix& A);
SymIndefFactor factor_sym_indef(const SparseMatrix& A, const std::vector<Vector>& kernel = {});

struct KrylovOptions {
  double tol = 1e-10;
  int maxit = 999;
  /// Known kernel vectors of A; iterates and residuals are kept orthogonal to them.
  std::vector<Vector> deflate;
};

struct KrylovReport {
  int iterations = 0;
  bool converged = false;
  double relative_residual = 0;     // preconditioned, relative to the initial one
  std::vector<double> history;      // history[0] = 1 unless b = 0
  double seconds = 0;
  bool nonmonotone = false;         // CG only: residual rose > 10% above its running minimum
};

struct KrylovResult {
  Vector x;
  KrylovReport report;
};

/// Preconditioned conjugate gradients from a zero initial guess. Stops when
/// sqrt(r^T P^{-1} r) / sqrt(b^T P^{-1} b) <= tol. BreakdownError on
/// non-positive curvature.
KrylovResult cg(const LinearOperator& A, const LinearOperator& Pinv, const Vector& b, const KrylovOptions& opts = {});

/// Preconditioned MINRES from a zero initial guess, same stopping rule.
KrylovResult minres(const LinearOperator& A, const LinearOperator& Pinv, const Vector& b,
                    const KrylovOptions& opts = {});

/// Residual history as CSV with header `iteration,residual`.
void write_history_csv(std::ostream& out, const KrylovReport& report);

enum class EigMode { full, extreme };

/// Eigenvalues of the pencil (A, B), B SPD, ascending. Directions in `kernel`
/// (A z = 0) are excluded. `full` reduces densely (small problems);
/// `extreme` returns {lambda_min, lambda_max} from Lanczos. NotSpdError if B is not SPD.
Vector generalized_eigs(const SparseMatrix& A, const SparseMatrix& B, EigMode mode,
                        const std::vector<Vector>& kernel = {});

/// Dense counterpart of the full mode.
Vector generalized_eigs_dense(const DenseMatrix& A, const DenseMatrix& B, const std::vector<Vector>& kernel = {});

/// Extreme eigenvalue data of a symmetric pencil (A, B) with B SPD.
struct PencilExtremes {
  double lambda_min = 0;  // algebraic
  double lambda_max = 0;
  double abs_min = 0;     // min |lambda| (shift-invert); 0 when not requested
  double abs_max = 0;     // max |lambda|
  int steps = 0;
};

struct LanczosOptions {
  double tol = 1e-7;       // Ritz residual relative to the largest |Ritz value|
  int max_steps = 800;
  bool abs_min = true;     // also compute min |lambda| through A^{-1} B
  unsigned seed = 12345;
};

PencilExtremes pencil_extremes(const SparseMatrix& A, const SparseMatrix& B, const std::vector<Vector>& kernel = {},
                               const LanczosOptions& opts = {});

}  // namespace condensa
