#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "condensa/assembly.hpp"
#include "condensa/condense.hpp"
#include "condensa/krylov.hpp"

namespace condensa {

/// Pencils up to this size are reduced densely; larger ones use Lanczos.
inline constexpr Index kDenseEigLimit = 1200;

/// Boundedness and inf-sup constants of a symmetric A measured in the
/// P inner product. For symmetric A the sup-sup and inf-sup quotients are the
/// extreme |eigenvalues| of the pencil (A, P).
struct PencilConstants {
  double c_b = 0;         // max |lambda|
  double c_i = 0;         // min |lambda|
  double kappa = 0;       // c_b / c_i
  double lambda_min = 0;  // algebraic extremes
  double lambda_max = 0;
};

PencilConstants measure_constants(const SparseMatrix& A, const SparseMatrix& P,
                                  const std::vector<Vector>& kernel = {});

/// Largest eigenvalue of the pencil (G, B) with G symmetric positive semidefinite.
double max_pencil_eig(const SparseMatrix& G, const SparseMatrix& B);

/// Smallest eigenvalue of the pencil (G, B) with G symmetric positive definite.
double min_pencil_eig(const SparseMatrix& G, const SparseMatrix& B);

/// Lifting constant: c_l^2 = lambda_max(L^T P L, S_P), L x = (-A11^{-1} A21^T x, x).
double lifting_constant(const BlockSystem& system, const BlockSystem& inner);

/// Kernel vectors of a Stokes system: constant pressure in the monolithic
/// ordering and on the free traces. Empty for the other problems.
struct KernelVectors {
  std::vector<Vector> monolithic;
  std::vector<Vector> traces;
};
KernelVectors kernel_vectors(const Mesh& mesh, const BlockLayout& layout);

struct Theorem23Report {
  double c_b = 0, c_i = 0, c_l = 0;
  double kappa_full = 0;
  double abs_max = 0, abs_min = 0;  // extremes of |lambda(S_A, S_P)|
  double kappa_reduced = 0;
  double upper_bound = 0;  // c_l^2 c_b (1 + 1e-8)
  double lower_bound = 0;  // c_i (1 - 1e-8)
  bool upper_ok = false;
  bool lower_ok = false;
  bool ok() const { return upper_ok && lower_ok; }
};

/// Compares the spectrum of (S_A, S_P) with the bounds c_l^2 c_b and c_i
/// measured on the same assembly.
Theorem23Report theorem23_check(const Mesh& mesh, const BlockSystem& system, const BlockSystem& inner);

/// Sharpest constants of the auxiliary-form, lifting, Stokes coercivity and
/// Darcy inf-sup inequalities on one mesh. Keys: C1, C2, c_d (auxiliary form,
/// uses xi and gamma), cbar1, c1, c2 (Stokes, uses nu), beta (Darcy, xi = 1).
std::map<std::string, double> lemma_probes(const Mesh& mesh, const ProblemParams& params);

struct SpectralReport {
  int level = 0;  // cells per edge
  Index cells = 0;
  double xi = 1, gamma = 1, nu = 1;
  std::string problem;
  double c_b = 0, c_i = 0, kappa_full = 0, kappa_reduced = 0, c_l = 0;
  std::map<std::string, double> lemma_ratios;
};

/// CSV with header `level,cells,problem,xi,gamma,nu,name,value`.
void write_spectral_csv(std::ostream& out, const std::vector<SpectralReport>& reports);

/// Submatrix A(rows, cols).
SparseMatrix select(const SparseMatrix& A, const std::vector<Index>& rows, const std::vector<Index>& cols);

}  // namespace condensa
