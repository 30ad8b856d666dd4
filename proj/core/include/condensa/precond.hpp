#pragma once

#include <memory>
#include <string>

#include "condensa/assembly.hpp"
#include "condensa/condense.hpp"
#include "condensa/krylov.hpp"

namespace condensa {

enum class PrecondKind { paper, counterexample };
enum class PrecondLevel { full, reduced };

const char* to_string(PrecondKind k);
const char* to_string(PrecondLevel l);

struct PreconditionerSpec {
  Problem problem = Problem::darcy;
  PrecondKind kind = PrecondKind::paper;
  PrecondLevel level = PrecondLevel::reduced;
  double zeta = 0.0;    // Stokes only
  bool hatted = false;  // Stokes only
  ProblemParams params;

  /// InvalidArgument on inconsistent combinations.
  void validate() const;
  /// Short label such as "paper-reduced" or "hat-zeta100-full".
  std::string label() const;
};

/// Exactly applied preconditioner. `matrix()` is P in the monolithic
/// ordering [cell dofs | free traces] at the full level and S_P on the free
/// traces at the reduced level. Immutable and safe to apply concurrently.
class PrecondOperator {
 public:
  const PreconditionerSpec& spec() const { return spec_; }
  const SparseMatrix& matrix() const { return matrix_; }
  /// The assembled inner product behind the operator.
  const BlockSystem& inner() const { return *inner_; }
  Index size() const { return matrix_.rows(); }

  /// z = P^{-1} r
  void apply(const Vector& r, Vector& z) const;
  Vector apply(const Vector& r) const;
  LinearOperator inverse() const;

 private:
  friend PrecondOperator build_full(const PreconditionerSpec&, const Mesh&, const LayoutPtr&);
  friend PrecondOperator build_reduced(const PreconditionerSpec&, const Mesh&, const LayoutPtr&);

  PreconditionerSpec spec_;
  SparseMatrix matrix_;
  std::shared_ptr<const BlockSystem> inner_;
  std::shared_ptr<const SpdFactor> factor_;
};

/// Inner product selected by a PreconditionerSpec, including its zeta and hatted fields.
BlockSystem assemble_inner(const PreconditionerSpec& spec, const Mesh& mesh, const LayoutPtr& layout);

/// Full preconditioner. Factorization certifies positive definiteness (NotSpdError).
PrecondOperator build_full(const PreconditionerSpec& spec, const Mesh& mesh, const LayoutPtr& layout);

/// Reduced preconditioner S_P = P22 - P21 P11^{-1} P21^T, factored once.
PrecondOperator build_reduced(const PreconditionerSpec& spec, const Mesh& mesh, const LayoutPtr& layout);

/// Dispatch on spec.level.
PrecondOperator build_preconditioner(const PreconditionerSpec& spec, const Mesh& mesh, const LayoutPtr& layout);

}  // namespace condensa
