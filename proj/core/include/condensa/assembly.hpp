#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "condensa/mesh.hpp"
#include "condensa/spaces.hpp"
#include "condensa/types.hpp"

namespace condensa {

/// Constant or spatially varying scalar coefficient.
class Coefficient {
 public:
  Coefficient(double value = 1.0) : value_(value) {}  // NOLINT(google-explicit-constructor)
  Coefficient(ScalarField field) : field_(std::move(field)) {}  // NOLINT(google-explicit-constructor)

  double operator()(const Point& x) const { return field_ ? field_(x) : value_; }
  bool is_constant() const { return !field_; }
  /// The constant value; meaningless for a field.
  double value() const { return value_; }

 private:
  double value_ = 1.0;
  ScalarField field_;
};

struct ProblemParams {
  Coefficient xi = 1.0;     // Darcy diffusion
  Coefficient gamma = 1.0;  // Darcy reaction
  double nu = 1.0;          // Stokes viscosity
  double eta = 0.0;         // penalty; <= 0 selects the default 4k^2 (2D) / 6k^2 (3D)
  double zeta = 0.0;        // grad-div weight of the Stokes preconditioners
  int k = 2;
  int quad_order = 0;       // <= 0 selects 2k + 2

  double eta_for(int dim) const;
  int order() const { return quad_order > 0 ? quad_order : 2 * k + 2; }
  /// M = max(xi, gamma), evaluated pointwise.
  double big_m(const Point& x) const;
  void validate() const;
};

/// Dense blocks of one cell: cell dofs (1) and the traces of its d+1 facets (2).
struct CellBlocks {
  DenseMatrix a11, a12, a22;
  Vector f1, f2;
};

/// Symmetric 2x2 block operator [A11 A21^T; A21 A22] of a hybrid scheme.
///
/// A11 is block diagonal (one dense block per cell) unless `coupling` adds
/// entries between different cells. Dirichlet traces are already lifted into
/// f1/f2; rows and columns of fixed traces are dropped by the global accessors.
/// Global ordering of `monolithic()`: [cell dofs, cell-major | free traces].
struct BlockSystem {
  std::shared_ptr<const BlockLayout> layout;
  std::vector<CellBlocks> cells;
  SparseMatrix coupling;  // num_cell_dofs^2 or empty
  std::map<Index, double> dirichlet;
  std::string name;

  bool has_coupling() const { return coupling.nonZeros() > 0; }
  SparseMatrix a11() const;
  SparseMatrix a21() const;
  SparseMatrix a22() const;
  Vector rhs_cell() const;
  Vector rhs_trace() const;
  SparseMatrix monolithic() const;
  Vector monolithic_rhs() const;
  /// Local trace coefficients of a cell from a free trace vector (fixed dofs read as zero).
  Vector gather_traces(Index cell, const Vector& free_traces) const;
};

using LayoutPtr = std::shared_ptr<const BlockLayout>;

/// Hybrid Darcy scheme, stored with the velocity test rows negated so the
/// operator is symmetric and its trace Schur complement positive definite:
/// [-xi^{-1} M, -B^T; -B, gamma M_p] in the (u, (p, pbar)) blocks.
BlockSystem assemble_darcy(const Mesh& mesh, const LayoutPtr& layout, const ProblemParams& params,
                           const ScalarField& f, const ScalarField& p_dirichlet = {});

/// Darcy preconditioner inner product; on an hdg_poisson layout only the pressure part.
BlockSystem assemble_darcy_inner(const Mesh& mesh, const LayoutPtr& layout, const ProblemParams& params);

/// Symmetric interior-penalty HDG form for -div(xi grad p) + gamma p (hdg_poisson layout).
BlockSystem assemble_aux_hdg(const Mesh& mesh, const LayoutPtr& layout, const ProblemParams& params,
                             const ScalarField& f = {});

/// HDG Stokes scheme (symmetric indefinite).
BlockSystem assemble_stokes(const Mesh& mesh, const LayoutPtr& layout, const ProblemParams& params,
                            const VectorField& f, const VectorField& u_dirichlet = {});

/// Stokes preconditioner. Velocity block: the eps/penalty inner product, or the
/// full viscous form when `hatted`; plus zeta (div u, div v) from params.
/// Pressure block: nu^{-1} (p, q) and nu^{-1} eta^{-1} h_K <pbar, qbar>.
BlockSystem assemble_stokes_inner(const Mesh& mesh, const LayoutPtr& layout, const ProblemParams& params,
                                  bool hatted);

/// Darcy inner product with divergence and normal-jump terms for the velocity
/// and no pressure/trace coupling. Velocity jumps couple neighbouring cells.
BlockSystem assemble_counterexample_inner(const Mesh& mesh, const LayoutPtr& layout, const ProblemParams& params);

/// Matrix of sum_K h_K^{-1} ||t - m_K(t)||^2_{dK} over the free traces, applied
/// componentwise to ubar (Stokes) and to pbar.
SparseMatrix assemble_mean_deviation(const Mesh& mesh, const BlockLayout& layout);

/// Squared mesh-dependent norms of a hybrid function, computed by direct quadrature.
struct NormValues {
  double eta = 0;
  double u_l2 = 0;       // ||u||^2
  double eps = 0;        // ||eps(u)||^2
  double div = 0;        // ||div u||^2
  double u_jump = 0;     // ||h^{-1/2}(u - ubar)||^2_dT
  double p_l2 = 0;       // ||p||^2
  double grad_p = 0;     // ||grad p||^2
  double p_jump = 0;     // ||h^{-1/2}(p - pbar)||^2_dT
  double pbar_h = 0;     // ||h^{1/2} pbar||^2_dT
  double ubar_mean = 0;  // ||h^{-1/2}(ubar - m_K ubar)||^2_dT
  double pbar_mean = 0;  // ||h^{-1/2}(pbar - m_K pbar)||^2_dT

  double v() const { return eps + eta * u_jump; }
  double p0() const { return p_l2 + pbar_h; }
  double p() const { return grad_p + eta * p_jump; }
  double hu() const { return ubar_mean; }
  double hp() const { return pbar_mean; }
};

/// `cell_values` has num_cell_dofs entries, `traces` has num_traces entries
/// (global trace numbering, including Dirichlet values).
NormValues evaluate_norms(const Mesh& mesh, const BlockLayout& layout, double eta, const Vector& cell_values,
                          const Vector& traces);

/// Exact data of a test problem. Empty callables are absent.
struct ManufacturedProblem {
  Problem problem = Problem::darcy;
  int dim = 2;
  Coefficient xi = 1.0;
  Coefficient gamma = 1.0;
  BoxSpec box;
  ScalarField f_darcy;
  VectorField f_stokes;
  ScalarField p_dirichlet;
  VectorField u_dirichlet;
  VectorField exact_u;
  ScalarField exact_p;
  std::string note;

  bool has_exact() const { return static_cast<bool>(exact_u) && static_cast<bool>(exact_p); }
};

/// Tags: "darcy", "darcy-heterogeneous", "stokes", "stokes-cavity".
/// Darcy uses the constant xi, gamma of `params`; the heterogeneous case
/// replaces them by its own fields.
ManufacturedProblem manufactured_rhs(std::string_view tag, int dim, const ProblemParams& params);

/// L2 errors of the cell fields against exact callables; `p_shift` is added to p_h.
struct FieldErrors {
  double u = 0;
  double p = 0;
};
FieldErrors l2_errors(const Mesh& mesh, const BlockLayout& layout, const Vector& cell_values,
                      const VectorField& exact_u, const ScalarField& exact_p, double p_shift = 0.0,
                      int quad_order = 0);

/// Volume mean of the cell pressure.
double pressure_mean(const Mesh& mesh, const BlockLayout& layout, const Vector& cell_values);

/// Coefficients of the L2 projection of the constant 1 onto the cell pressure
/// space and the pressure trace space (all facets). Used as kernel vectors.
Vector constant_pressure_cells(const Mesh& mesh, const BlockLayout& layout);
Vector constant_pressure_traces(const Mesh& mesh, const BlockLayout& layout);

}  // namespace condensa
