#include "condensa/precond.hpp"

#include <cstdio>

#include "condensa/error.hpp"

namespace condensa {

const char* to_string(PrecondKind k) { return k == PrecondKind::paper ? "paper" : "counterexample"; }
const char* to_string(PrecondLevel l) { return l == PrecondLevel::full ? "full" : "reduced"; }

void PreconditionerSpec::validate() const {
  if (problem == Problem::hdg_poisson) throw InvalidArgument("preconditioner: no preconditioner for hdg_poisson");
  if (kind == PrecondKind::counterexample && problem != Problem::darcy)
    throw InvalidArgument("preconditioner: the counterexample is defined for Darcy only");
  if (problem != Problem::stokes && (hatted || zeta != 0.0))
    throw InvalidArgument("preconditioner: zeta and hatted apply to Stokes only");
  if (zeta < 0.0) throw InvalidArgument("preconditioner: zeta must be non-negative");
  params.validate();
}

std::string PreconditionerSpec::label() const {
  std::string s = kind == PrecondKind::counterexample ? "counterexample" : "paper";
  if (problem == Problem::stokes && (hatted || zeta != 0.0)) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "zeta%g", zeta);
    s = std::string(hatted ? "hat-" : "") + buf;
  }
  return s + "-" + to_string(level);
}

void PrecondOperator::apply(const Vector& r, Vector& z) const { z = factor_->solve(r); }

Vector PrecondOperator::apply(const Vector& r) const { return factor_->solve(r); }

LinearOperator PrecondOperator::inverse() const { return factor_->inverse(); }

BlockSystem assemble_inner(const PreconditionerSpec& spec, const Mesh& mesh, const LayoutPtr& layout) {
  spec.validate();
  if (layout->problem != spec.problem) throw InvalidArgument("preconditioner: layout does not match the problem");
  ProblemParams p = spec.params;
  if (spec.problem == Problem::stokes) {
    p.zeta = spec.zeta;
    return assemble_stokes_inner(mesh, layout, p, spec.hatted);
  }
  if (spec.kind == PrecondKind::counterexample) return assemble_counterexample_inner(mesh, layout, p);
  return assemble_darcy_inner(mesh, layout, p);
}

PrecondOperator build_full(const PreconditionerSpec& spec, const Mesh& mesh, const LayoutPtr& layout) {
  if (spec.level != PrecondLevel::full) throw InvalidArgument("build_full: spec level is not full");
  PrecondOperator op;
  op.spec_ = spec;
  op.inner_ = std::make_shared<const BlockSystem>(assemble_inner(spec, mesh, layout));
  op.matrix_ = op.inner_->monolithic();
  op.factor_ = std::make_shared<const SpdFactor>(op.matrix_);
  return op;
}

PrecondOperator build_reduced(const PreconditionerSpec& spec, const Mesh& mesh, const LayoutPtr& layout) {
  if (spec.level != PrecondLevel::reduced) throw InvalidArgument("build_reduced: spec level is not reduced");
  PrecondOperator op;
  op.spec_ = spec;
  op.inner_ = std::make_shared<const BlockSystem>(assemble_inner(spec, mesh, layout));
  op.matrix_ = condense_precond(*op.inner_).S;
  op.factor_ = std::make_shared<const SpdFactor>(op.matrix_);
  return op;
}

PrecondOperator build_preconditioner(const PreconditionerSpec& spec, const Mesh& mesh, const LayoutPtr& layout) {
  return spec.level == PrecondLevel::full ? build_full(spec, mesh, layout) : build_reduced(spec, mesh, layout);
}

}  // namespace condensa
