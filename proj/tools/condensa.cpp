// condensa: parameter sweeps for the condensed Darcy and Stokes solvers.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "condensa/bench.hpp"
#include "condensa/error.hpp"

namespace {

void emit_spectral_markdown(std::ostream& out, const std::vector<condensa::SpectralReport>& reports) {
  out << "| n | cells | problem | xi | gamma | nu | c_b | c_i | c_l | kappa_full | kappa_reduced |\n"
      << "|---|---|---|---|---|---|---|---|---|---|---|\n";
  char buf[256];
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof buf, "| %d | %ld | %s | %g | %g | %g | %.4g | %.4g | %.4g | %.4g | %.4g |\n", r.level,
                  r.cells, r.problem.c_str(), r.xi, r.gamma, r.nu, r.c_b, r.c_i, r.c_l, r.kappa_full,
                  r.kappa_reduced);
    out << buf;
  }
}

}  // namespace

int main(int argc, char** argv) {
  using namespace condensa;
  CLI::App app{"Condensed hybrid Darcy and Stokes solver sweeps"};
  app.set_version_flag("--version", "condensa 0.1.0");

  RunConfig cfg;
  std::string experiment, format = "csv", out_path, precond = "paper", problem = "darcy";
  app.add_option("experiment", experiment,
                 "darcy-manufactured | darcy-heterogeneous | darcy-counterexample | stokes-manufactured | "
                 "stokes-cavity | spectrum | convergence")
      ->required();
  app.add_option("--dim", cfg.dim, "Spatial dimension")->check(CLI::IsMember({2, 3}));
  app.add_option("--levels", cfg.levels, "Cells per edge, comma separated")->delimiter(',');
  app.add_option("--k", cfg.k, "Polynomial degree");
  app.add_option("--eta", cfg.eta, "Penalty override (default 4k^2 in 2D, 6k^2 in 3D)");
  app.add_option("--xi", cfg.xi, "Darcy xi sweep")->delimiter(',');
  app.add_option("--gamma", cfg.gamma, "Darcy gamma sweep")->delimiter(',');
  app.add_option("--nu", cfg.nu, "Stokes viscosity sweep")->delimiter(',');
  app.add_option("--zeta", cfg.zeta, "Stokes grad-div weight sweep")->delimiter(',');
  app.add_option("--precond", precond, "paper | counterexample")->check(CLI::IsMember({"paper", "counterexample"}));
  app.add_flag("--hatted", cfg.hatted, "Stokes: full viscous form in the velocity block");
  app.add_option("--problem", problem, "spectrum: darcy | stokes")->check(CLI::IsMember({"darcy", "stokes"}));
  app.add_flag("--probes", cfg.probes, "spectrum: also report the lemma constants");
  app.add_option("--tol", cfg.tol, "Relative residual tolerance (default 1e-10 Darcy, 1e-8 Stokes)");
  app.add_option("--maxit", cfg.maxit, "Iteration limit");
  app.add_option("--format", format, "csv | md | json")->check(CLI::IsMember({"csv", "md", "markdown", "json"}));
  app.add_option("--out", out_path, "Output file (default stdout)");
  app.add_option("--dump-matrices", cfg.dump_matrices, "Directory for Matrix Market dumps of S_A and S_P");
  app.add_option("--mesh-out", cfg.mesh_out, "Write the mesh of each level");
  app.add_option("--threads", cfg.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", cfg.seed, "Random seed");
  app.add_flag("--timing", cfg.timing, "Report solve wall time");
  CLI11_PARSE(app, argc, argv);

  try {
    cfg.experiment = parse_experiment(experiment);
    cfg.precond = precond == "counterexample" ? PrecondKind::counterexample : PrecondKind::paper;
    cfg.spectrum_problem = problem == "stokes" ? Problem::stokes : Problem::darcy;
    const Format fmt = parse_format(format);

    std::ofstream file;
    if (!out_path.empty()) {
      file.open(out_path);
      if (!file) throw Error("cannot write " + out_path);
    }
    std::ostream& out = out_path.empty() ? std::cout : file;

    if (cfg.experiment == Experiment::spectrum) {
      const auto reports = run_spectrum(cfg);
      if (fmt == Format::json)
        emit_spectral_json(out, reports);
      else if (fmt == Format::markdown)
        emit_spectral_markdown(out, reports);
      else
        write_spectral_csv(out, reports);
      return out ? 0 : 1;
    }

    const auto rows = run(cfg);
    emit(out, rows, fmt);
    if (!out) throw Error("write failed");
    int failed = 0;
    for (const auto& r : rows)
      if (r.failed()) {
        std::cerr << "condensa: " << r.experiment << " n=" << r.level << ": " << r.error << '\n';
        ++failed;
      }
    return failed ? 2 : 0;
  } catch (const std::exception& e) {
    std::cerr << "condensa: " << e.what() << '\n';
    return 1;
  }
}
