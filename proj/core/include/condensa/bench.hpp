#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "condensa/precond.hpp"
#include "condensa/spectra.hpp"

namespace condensa {

enum class Experiment {
  darcy_manufactured,
  darcy_heterogeneous,
  darcy_counterexample,
  stokes_manufactured,
  stokes_cavity,
  spectrum,
  convergence,
};

const char* to_string(Experiment e);
/// InvalidArgument for unknown tags.
Experiment parse_experiment(std::string_view tag);

enum class Format { csv, markdown, json };
Format parse_format(std::string_view tag);

struct RunConfig {
  Experiment experiment = Experiment::darcy_manufactured;
  int dim = 2;
  std::vector<int> levels;  // cells per edge; empty selects the default sequence
  int k = 2;
  double eta = 0.0;         // <= 0 selects 4k^2 / 6k^2
  // Parameter sweeps; an empty list selects the experiment's default sweep.
  std::vector<double> xi, gamma, nu, zeta;
  PrecondKind precond = PrecondKind::paper;
  bool hatted = false;
  Problem spectrum_problem = Problem::darcy;  // spectrum experiment only
  bool probes = false;                        // spectrum: also run the lemma probes
  double tol = 0.0;                           // <= 0 selects 1e-10 (Darcy) / 1e-8 (Stokes)
  int maxit = 999;
  unsigned seed = 12345;
  int threads = 1;
  bool timing = false;
  std::string dump_matrices;  // directory for S_A / S_P in 1-based COO, empty = off
  std::string mesh_out;       // mesh file path, empty = off

  void validate() const;
  std::vector<int> effective_levels() const;
  double tolerance_for(Problem p) const;
};

struct ResultRow {
  std::string experiment;
  int dim = 2;
  int level = 0;
  Index cells = 0;
  Index trace_dofs = 0;
  std::optional<double> xi, gamma, nu, zeta;
  std::string precond;
  int iters = 0;
  int maxit = 999;
  bool converged = false;
  double resid = 0.0;
  std::optional<double> err_u, err_p;
  std::optional<double> seconds;
  std::string error;  // non-empty when the row failed

  bool failed() const { return !error.empty(); }
  /// Iteration count as printed: ">999" when the iteration limit was hit.
  std::string iters_text() const;
  bool operator==(const ResultRow&) const = default;
};

/// Runs every (level, parameter, preconditioner) tuple of the sweep. Module
/// errors are caught per row; rows come back in configuration order.
std::vector<ResultRow> run(const RunConfig& config);

/// Spectral constants for the spectrum experiment, one report per (level, parameters).
std::vector<SpectralReport> run_spectrum(const RunConfig& config);

void emit(std::ostream& out, const std::vector<ResultRow>& rows, Format format);
void emit_csv(std::ostream& out, const std::vector<ResultRow>& rows);
void emit_markdown(std::ostream& out, const std::vector<ResultRow>& rows);
void emit_json(std::ostream& out, const std::vector<ResultRow>& rows);
std::vector<ResultRow> parse_json(std::istream& in);

void emit_spectral_json(std::ostream& out, const std::vector<SpectralReport>& reports);

/// Matrix Market coordinate file (1-based `i j value` entries).
void write_coo(std::ostream& out, const SparseMatrix& A);

}  // namespace condensa
