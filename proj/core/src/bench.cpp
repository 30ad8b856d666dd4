#include "condensa/bench.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <algorithm>
#include <functional>
#include <iostream>
#include <map>
#include <thread>

#include <json.hpp>

#include "condensa/error.hpp"

namespace condensa {

namespace {

struct ExperimentName {
  Experiment e;
  const char* tag;
};
constexpr ExperimentName kExperiments[] = {
    {Experiment::darcy_manufactured, "darcy-manufactured"},
    {Experiment::darcy_heterogeneous, "darcy-heterogeneous"},
    {Experiment::darcy_counterexample, "darcy-counterexample"},
    {Experiment::stokes_manufactured, "stokes-manufactured"},
    {Experiment::stokes_cavity, "stokes-cavity"},
    {Experiment::spectrum, "spectrum"},
    {Experiment::convergence, "convergence"},
};

bool is_stokes(Experiment e) { return e == Experiment::stokes_manufactured || e == Experiment::stokes_cavity; }

}  // namespace

const char* to_string(Experiment e) {
  for (const auto& x : kExperiments)
    if (x.e == e) return x.tag;
  return "?";
}

Experiment parse_experiment(std::string_view tag) {
  for (const auto& x : kExperiments)
    if (tag == x.tag) return x.e;
  throw InvalidArgument("unknown experiment '" + std::string(tag) + "'");
}

Format parse_format(std::string_view tag) {
  if (tag == "csv") return Format::csv;
  if (tag == "md" || tag == "markdown") return Format::markdown;
  if (tag == "json") return Format::json;
  throw InvalidArgument("unknown format '" + std::string(tag) + "'");
}

void RunConfig::validate() const {
  if (dim != 2 && dim != 3) throw InvalidArgument("dim must be 2 or 3");
  if (k < 1) throw InvalidArgument("k must be at least 1");
  for (int n : levels)
    if (n < 1) throw InvalidArgument("levels must be positive");
  if (maxit < 1) throw InvalidArgument("maxit must be positive");
  if (threads < 1) throw InvalidArgument("threads must be positive");
  for (double v : xi)
    if (!(v > 0)) throw InvalidArgument("xi must be positive");
  for (double v : gamma)
    if (v < 0) throw InvalidArgument("gamma must be non-negative");
  for (double v : nu)
    if (!(v > 0)) throw InvalidArgument("nu must be positive");
  for (double v : zeta)
    if (v < 0) throw InvalidArgument("zeta must be non-negative");
  if (precond == PrecondKind::counterexample &&
      (is_stokes(experiment) || (experiment == Experiment::spectrum && spectrum_problem == Problem::stokes)))
    throw InvalidArgument("the counterexample preconditioner is defined for Darcy only");
  if (experiment == Experiment::spectrum && spectrum_problem == Problem::hdg_poisson)
    throw InvalidArgument("spectrum: problem must be darcy or stokes");
}

std::vector<int> RunConfig::effective_levels() const {
  if (!levels.empty()) return levels;
  if (experiment == Experiment::spectrum) return dim == 2 ? std::vector<int>{4, 8, 16} : std::vector<int>{1, 2};
  if (experiment == Experiment::convergence) return dim == 2 ? std::vector<int>{4, 8, 16} : std::vector<int>{1, 2, 4};
  return dim == 2 ? std::vector<int>{8, 16, 32, 64} : std::vector<int>{2, 4, 8, 16};
}

double RunConfig::tolerance_for(Problem p) const {
  if (tol > 0) return tol;
  return p == Problem::stokes ? 1e-8 : 1e-10;
}

std::string ResultRow::iters_text() const {
  if (failed()) return "";
  if (!converged && iters >= maxit) return ">" + std::to_string(maxit);
  return std::to_string(iters);
}

// ---------------------------------------------------------------------------
// Running

namespace {

// One (level, parameter) tuple; produces one or more rows.
struct Task {
  int level_index = 0;
  Problem problem = Problem::darcy;
  std::string tag;  // manufactured_rhs tag
  double xi = 1, gamma = 1, nu = 1, zeta = 0;
};

std::vector<double> or_default(const std::vector<double>& v, std::vector<double> d) { return v.empty() ? d : v; }

std::vector<Task> make_tasks(const RunConfig& c, size_t num_levels) {
  std::vector<Task> tasks;
  auto darcy = [&](const std::string& tag, std::vector<double> xs, std::vector<double> gs) {
    for (size_t l = 0; l < num_levels; ++l)
      for (double x : xs)
        for (double g : gs) tasks.push_back({static_cast<int>(l), Problem::darcy, tag, x, g, 1.0, 0.0});
  };
  auto stokes = [&](const std::string& tag, std::vector<double> ns, std::vector<double> zs) {
    for (size_t l = 0; l < num_levels; ++l)
      for (double n : ns)
        for (double z : zs) tasks.push_back({static_cast<int>(l), Problem::stokes, tag, 1.0, 1.0, n, z});
  };
  switch (c.experiment) {
    case Experiment::darcy_manufactured:
      darcy("darcy", or_default(c.xi, {1.0, 1e-6}), or_default(c.gamma, {1e-4, 1.0, 1e4}));
      break;
    case Experiment::darcy_heterogeneous:
      darcy("darcy-heterogeneous", {1.0}, {1.0});
      break;
    case Experiment::darcy_counterexample:
      darcy("darcy", or_default(c.xi, {1.0}), or_default(c.gamma, {1.0}));
      break;
    case Experiment::stokes_manufactured:
      stokes("stokes", or_default(c.nu, {1.0, 1e-6}), or_default(c.zeta, {0.0}));
      break;
    case Experiment::stokes_cavity:
      stokes("stokes-cavity", or_default(c.nu, {1.0, 1e-6}), or_default(c.zeta, {0.0}));
      break;
    case Experiment::convergence:
      for (size_t l = 0; l < num_levels; ++l) {
        tasks.push_back({static_cast<int>(l), Problem::darcy, "darcy", 1.0, 1.0, 1.0, 0.0});
        tasks.push_back({static_cast<int>(l), Problem::stokes, "stokes", 1.0, 1.0, 1.0, 0.0});
      }
      break;
    case Experiment::spectrum:
      throw InvalidArgument("run: the spectrum experiment is handled by run_spectrum");
  }
  return tasks;
}

BoxSpec box_for(const RunConfig& c) {
  if (c.experiment != Experiment::stokes_cavity) return BoxSpec::unit();
  return manufactured_rhs("stokes-cavity", c.dim, ProblemParams{}).box;
}

void write_coo_file(const std::string& path, const SparseMatrix& A) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path);
  write_coo(f, A);
}

std::string with_level_suffix(const std::string& path, int n, bool many) {
  if (!many) return path;
  const std::filesystem::path p(path);
  return (p.parent_path() / (p.stem().string() + "_n" + std::to_string(n) + p.extension().string())).string();
}

class TaskRunner {
 public:
  TaskRunner(const RunConfig& c, const std::vector<Mesh>& meshes, const std::vector<int>& levels)
      : c_(c), meshes_(meshes), levels_(levels) {}

  std::vector<ResultRow> operator()(const Task& t, size_t index) const {
    const Mesh& mesh = meshes_[t.level_index];
    ResultRow base;
    base.experiment = to_string(c_.experiment);
    base.dim = c_.dim;
    base.level = levels_[t.level_index];
    base.cells = mesh.num_cells();
    base.maxit = c_.maxit;
    const bool heterogeneous = t.tag == "darcy-heterogeneous";
    if (t.problem == Problem::darcy && !heterogeneous) {
      base.xi = t.xi;
      base.gamma = t.gamma;
    }
    if (t.problem == Problem::stokes) {
      base.nu = t.nu;
      base.zeta = t.zeta;
    }
    PreconditionerSpec spec;
    spec.problem = t.problem;
    spec.kind = c_.experiment == Experiment::darcy_counterexample ? PrecondKind::counterexample : c_.precond;
    spec.level = PrecondLevel::reduced;
    if (t.problem == Problem::stokes) {
      spec.zeta = t.zeta;
      spec.hatted = c_.hatted;
    }
    base.precond = spec.label();
    try {
      return t.problem == Problem::darcy ? darcy(t, index, mesh, base, spec) : stokes(t, index, mesh, base, spec);
    } catch (const std::exception& e) {
      base.error = e.what();
      return {base};
    }
  }

 private:
  ProblemParams params(const Task& t) const {
    ProblemParams p;
    p.k = c_.k;
    p.eta = c_.eta;
    p.xi = t.xi;
    p.gamma = t.gamma;
    p.nu = t.nu;
    p.zeta = t.zeta;
    return p;
  }

  KrylovOptions options(Problem p) const {
    KrylovOptions o;
    o.tol = c_.tolerance_for(p);
    o.maxit = c_.maxit;
    return o;
  }

  std::string dump_prefix(size_t index, int level) const {
    return (std::filesystem::path(c_.dump_matrices) /
            (std::string(to_string(c_.experiment)) + "_d" + std::to_string(c_.dim) + "_n" + std::to_string(level) +
             "_t" + std::to_string(index)))
        .string();
  }

  void fill(ResultRow& row, const KrylovReport& rep) const {
    row.iters = rep.iterations;
    row.converged = rep.converged;
    row.resid = rep.relative_residual;
    if (c_.timing) row.seconds = rep.seconds;
  }

  std::vector<ResultRow> darcy(const Task& t, size_t index, const Mesh& mesh, ResultRow base,
                               PreconditionerSpec spec) const {
    ProblemParams pp = params(t);
    const ManufacturedProblem mp = manufactured_rhs(t.tag, c_.dim, pp);
    if (t.tag == "darcy-heterogeneous") {
      pp.xi = mp.xi;
      pp.gamma = mp.gamma;
    }
    spec.params = pp;
    auto layout = std::make_shared<const BlockLayout>(make_layout(mesh, Problem::darcy, c_.k));
    const BlockSystem sys = assemble_darcy(mesh, layout, pp, mp.f_darcy, mp.p_dirichlet);
    const CondensedSystem cs = condense(sys);
    base.trace_dofs = layout->num_free_traces();
    std::vector<ResultRow> rows;

    const PrecondOperator P = build_reduced(spec, mesh, layout);
    const KrylovResult r = cg(as_operator(cs.S), P.inverse(), cs.rhs, options(Problem::darcy));
    ResultRow row = base;
    fill(row, r.report);
    if (mp.has_exact()) {
      const FieldErrors e = l2_errors(mesh, *layout, back_substitute(cs, r.x), mp.exact_u, mp.exact_p, 0.0, pp.order());
      row.err_u = e.u;
      row.err_p = e.p;
    }
    rows.push_back(row);
    if (!c_.dump_matrices.empty()) {
      write_coo_file(dump_prefix(index, base.level) + "_SA.mtx", cs.S);
      write_coo_file(dump_prefix(index, base.level) + "_SP.mtx", P.matrix());
    }

    if (c_.experiment == Experiment::darcy_counterexample) {
      spec.level = PrecondLevel::full;
      const PrecondOperator Pf = build_full(spec, mesh, layout);
      const SparseMatrix A = sys.monolithic();
      const KrylovResult rf = minres(as_operator(A), Pf.inverse(), sys.monolithic_rhs(), options(Problem::darcy));
      ResultRow full = base;
      full.precond = spec.label();
      fill(full, rf.report);
      if (mp.has_exact()) {
        const FieldErrors e = l2_errors(mesh, *layout, rf.x.head(layout->num_cell_dofs()), mp.exact_u, mp.exact_p,
                                        0.0, pp.order());
        full.err_u = e.u;
        full.err_p = e.p;
      }
      rows.push_back(full);
      if (!c_.dump_matrices.empty()) {
        write_coo_file(dump_prefix(index, base.level) + "_A.mtx", A);
        write_coo_file(dump_prefix(index, base.level) + "_P.mtx", Pf.matrix());
      }
    }
    return rows;
  }

  std::vector<ResultRow> stokes(const Task& t, size_t index, const Mesh& mesh, ResultRow base,
                                PreconditionerSpec spec) const {
    const ProblemParams pp = params(t);
    spec.params = pp;
    const ManufacturedProblem mp = manufactured_rhs(t.tag, c_.dim, pp);
    auto layout = std::make_shared<const BlockLayout>(make_layout(mesh, Problem::stokes, c_.k));
    const BlockSystem sys = assemble_stokes(mesh, layout, pp, mp.f_stokes, mp.u_dirichlet);
    const CondensedSystem cs = condense(sys);
    base.trace_dofs = layout->num_free_traces();
    const PrecondOperator P = build_reduced(spec, mesh, layout);
    KrylovOptions o = options(Problem::stokes);
    o.deflate = {stokes_trace_kernel(mesh, *layout)};
    const KrylovResult r = minres(as_operator(cs.S), P.inverse(), cs.rhs, o);
    ResultRow row = base;
    fill(row, r.report);
    if (mp.has_exact()) {
      const Vector cells = back_substitute(cs, r.x);
      const double mean = pressure_mean(mesh, *layout, cells);
      const FieldErrors e = l2_errors(mesh, *layout, cells, mp.exact_u, mp.exact_p, -mean, pp.order());
      row.err_u = e.u;
      row.err_p = e.p;
    }
    if (!c_.dump_matrices.empty()) {
      write_coo_file(dump_prefix(index, base.level) + "_SA.mtx", cs.S);
      write_coo_file(dump_prefix(index, base.level) + "_SP.mtx", P.matrix());
    }
    return {row};
  }

  const RunConfig& c_;
  const std::vector<Mesh>& meshes_;
  const std::vector<int>& levels_;
};

void parallel_for(size_t n, int threads, const std::function<void(size_t)>& body) {
  if (threads <= 1 || n <= 1) {
    for (size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  const int workers = static_cast<int>(std::min<size_t>(threads, n));
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (size_t i = next++; i < n; i = next++) body(i);
    });
  for (auto& th : pool) th.join();
}

std::vector<Mesh> build_meshes(const RunConfig& c, const std::vector<int>& levels, const BoxSpec& box) {
  std::vector<Mesh> meshes;
  meshes.reserve(levels.size());
  for (int n : levels) meshes.push_back(unit_box_mesh(c.dim, n, box));
  if (!c.mesh_out.empty())
    for (size_t l = 0; l < levels.size(); ++l)
      write_mesh(with_level_suffix(c.mesh_out, levels[l], levels.size() > 1), meshes[l]);
  if (!c.dump_matrices.empty()) std::filesystem::create_directories(c.dump_matrices);
  return meshes;
}

}  // namespace

std::vector<ResultRow> run(const RunConfig& config) {
  config.validate();
  const std::vector<int> levels = config.effective_levels();
  const std::vector<Mesh> meshes = build_meshes(config, levels, box_for(config));
  const std::vector<Task> tasks = make_tasks(config, levels.size());
  std::vector<std::vector<ResultRow>> results(tasks.size());
  const TaskRunner runner(config, meshes, levels);
  parallel_for(tasks.size(), config.threads, [&](size_t i) { results[i] = runner(tasks[i], i); });
  std::vector<ResultRow> rows;
  for (auto& r : results) rows.insert(rows.end(), r.begin(), r.end());
  return rows;
}

std::vector<SpectralReport> run_spectrum(const RunConfig& config) {
  config.validate();
  if (config.experiment != Experiment::spectrum) throw InvalidArgument("run_spectrum: experiment is not spectrum");
  const std::vector<int> levels = config.effective_levels();
  const std::vector<Mesh> meshes = build_meshes(config, levels, BoxSpec::unit());
  const Problem problem = config.spectrum_problem;
  struct Item {
    int level;
    double xi, gamma, nu;
  };
  std::vector<Item> items;
  for (size_t l = 0; l < levels.size(); ++l) {
    if (problem == Problem::darcy) {
      for (double x : or_default(config.xi, {1.0, 1e-6}))
        for (double g : or_default(config.gamma, {1e-4, 1.0, 1e4})) items.push_back({static_cast<int>(l), x, g, 1.0});
    } else {
      for (double n : or_default(config.nu, {1.0, 1e-6})) items.push_back({static_cast<int>(l), 1.0, 1.0, n});
    }
  }
  std::vector<SpectralReport> reports(items.size());
  parallel_for(items.size(), config.threads, [&](size_t i) {
    const Item& it = items[i];
    const Mesh& mesh = meshes[it.level];
    ProblemParams pp;
    pp.k = config.k;
    pp.eta = config.eta;
    pp.xi = it.xi;
    pp.gamma = it.gamma;
    pp.nu = it.nu;
    auto layout = std::make_shared<const BlockLayout>(make_layout(mesh, problem, config.k));
    PreconditionerSpec spec;
    spec.problem = problem;
    spec.kind = config.precond;
    spec.params = pp;
    const BlockSystem sys = problem == Problem::darcy ? assemble_darcy(mesh, layout, pp, {})
                                                      : assemble_stokes(mesh, layout, pp, {});
    const BlockSystem inner = assemble_inner(spec, mesh, layout);
    const Theorem23Report t = theorem23_check(mesh, sys, inner);
    SpectralReport& r = reports[i];
    r.level = levels[it.level];
    r.cells = mesh.num_cells();
    r.problem = to_string(problem);
    r.xi = it.xi;
    r.gamma = it.gamma;
    r.nu = it.nu;
    r.c_b = t.c_b;
    r.c_i = t.c_i;
    r.kappa_full = t.kappa_full;
    r.kappa_reduced = t.kappa_reduced;
    r.c_l = t.c_l;
    r.lemma_ratios["lambda_abs_max"] = t.abs_max;
    r.lemma_ratios["lambda_abs_min"] = t.abs_min;
    r.lemma_ratios["theorem23_ok"] = t.ok() ? 1.0 : 0.0;
    if (config.probes)
      for (const auto& [name, v] : lemma_probes(mesh, pp)) r.lemma_ratios[name] = v;
  });
  return reports;
}

// ---------------------------------------------------------------------------
// Output

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string param(const std::optional<double>& v) { return v ? fmt("%g", *v) : std::string(); }
std::string sci(const std::optional<double>& v) { return v ? fmt("%.6e", *v) : std::string(); }

std::string param_label(const ResultRow& r) {
  std::string s;
  auto add = [&](const char* name, const std::optional<double>& v) {
    if (!v) return;
    if (!s.empty()) s += ", ";
    s += std::string(name) + "=" + fmt("%g", *v);
  };
  add("xi", r.xi);
  add("gamma", r.gamma);
  add("nu", r.nu);
  add("zeta", r.zeta);
  return s.empty() ? "-" : s;
}

}  // namespace

void emit_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << "experiment,dim,level,cells,trace_dofs,xi,gamma,nu,zeta,precond,iters,converged,resid,err_u,err_p,seconds\n";
  for (const ResultRow& r : rows) {
    out << r.experiment << ',' << r.dim << ',' << r.level << ',' << r.cells << ',' << r.trace_dofs << ','
        << param(r.xi) << ',' << param(r.gamma) << ',' << param(r.nu) << ',' << param(r.zeta) << ',' << r.precond
        << ',' << r.iters_text() << ',' << (r.converged ? "true" : "false") << ','
        << (r.failed() ? std::string() : fmt("%.6e", r.resid)) << ',' << sci(r.err_u) << ',' << sci(r.err_p) << ','
        << (r.seconds ? fmt("%.3f", *r.seconds) : std::string()) << '\n';
  }
}

void emit_markdown(std::ostream& out, const std::vector<ResultRow>& rows) {
  // One table per (experiment, preconditioner): levels as rows, parameters as columns.
  std::vector<std::pair<std::string, std::string>> groups;
  for (const ResultRow& r : rows) {
    const std::pair<std::string, std::string> g{r.experiment, r.precond};
    if (std::find(groups.begin(), groups.end(), g) == groups.end()) groups.push_back(g);
  }
  bool first = true;
  for (const auto& [exp, pre] : groups) {
    std::vector<std::string> cols;
    std::vector<std::pair<int, Index>> lvls;
    std::map<std::pair<int, std::string>, const ResultRow*> cell;
    for (const ResultRow& r : rows) {
      if (r.experiment != exp || r.precond != pre) continue;
      const std::string label = param_label(r);
      if (std::find(cols.begin(), cols.end(), label) == cols.end()) cols.push_back(label);
      if (std::find(lvls.begin(), lvls.end(), std::make_pair(r.level, r.cells)) == lvls.end())
        lvls.emplace_back(r.level, r.cells);
      cell[{r.level, label}] = &r;
    }
    if (!first) out << '\n';
    first = false;
    out << "### " << exp << " (" << pre << ")\n\n| n | cells |";
    for (const auto& c : cols) out << ' ' << c << " |";
    out << "\n|---|---|";
    for (size_t i = 0; i < cols.size(); ++i) out << "---|";
    out << '\n';
    for (const auto& [n, cells] : lvls) {
      out << "| " << n << " | " << cells << " |";
      for (const auto& c : cols) {
        auto it = cell.find({n, c});
        out << ' ' << (it == cell.end() ? "" : it->second->failed() ? "error" : it->second->iters_text()) << " |";
      }
      out << '\n';
    }
    bool any_err = false;
    for (const auto& [key, r] : cell) any_err = any_err || r->err_u.has_value();
    if (!any_err) continue;
    out << "\n| n | parameters | err_u | err_p |\n|---|---|---|---|\n";
    for (const auto& [n, cells] : lvls)
      for (const auto& c : cols) {
        auto it = cell.find({n, c});
        if (it == cell.end() || !it->second->err_u) continue;
        out << "| " << n << " | " << c << " | " << sci(it->second->err_u) << " | " << sci(it->second->err_p) << " |\n";
      }
  }
}

namespace {

using nlohmann::ordered_json;

ordered_json opt(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

std::optional<double> get_opt(const ordered_json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace

void emit_json(std::ostream& out, const std::vector<ResultRow>& rows) {
  ordered_json arr = ordered_json::array();
  for (const ResultRow& r : rows) {
    ordered_json j;
    j["experiment"] = r.experiment;
    j["dim"] = r.dim;
    j["level"] = r.level;
    j["cells"] = r.cells;
    j["trace_dofs"] = r.trace_dofs;
    j["xi"] = opt(r.xi);
    j["gamma"] = opt(r.gamma);
    j["nu"] = opt(r.nu);
    j["zeta"] = opt(r.zeta);
    j["precond"] = r.precond;
    j["iters"] = r.iters;
    j["maxit"] = r.maxit;
    j["converged"] = r.converged;
    j["resid"] = r.resid;
    j["err_u"] = opt(r.err_u);
    j["err_p"] = opt(r.err_p);
    j["seconds"] = opt(r.seconds);
    j["error"] = r.error;
    arr.push_back(std::move(j));
  }
  out << arr.dump(2) << '\n';
}

std::vector<ResultRow> parse_json(std::istream& in) {
  ordered_json arr;
  try {
    in >> arr;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("parse_json: ") + e.what());
  }
  if (!arr.is_array()) throw InvalidArgument("parse_json: expected an array of rows");
  std::vector<ResultRow> rows;
  for (const auto& j : arr) {
    ResultRow r;
    try {
      r.experiment = j.at("experiment").get<std::string>();
      r.dim = j.at("dim").get<int>();
      r.level = j.at("level").get<int>();
      r.cells = j.at("cells").get<Index>();
      r.trace_dofs = j.at("trace_dofs").get<Index>();
      r.xi = get_opt(j, "xi");
      r.gamma = get_opt(j, "gamma");
      r.nu = get_opt(j, "nu");
      r.zeta = get_opt(j, "zeta");
      r.precond = j.at("precond").get<std::string>();
      r.iters = j.at("iters").get<int>();
      r.maxit = j.value("maxit", 999);
      r.converged = j.at("converged").get<bool>();
      r.resid = j.at("resid").get<double>();
      r.err_u = get_opt(j, "err_u");
      r.err_p = get_opt(j, "err_p");
      r.seconds = get_opt(j, "seconds");
      r.error = j.value("error", std::string());
    } catch (const nlohmann::json::exception& e) {
      throw InvalidArgument(std::string("parse_json: ") + e.what());
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

void emit(std::ostream& out, const std::vector<ResultRow>& rows, Format format) {
  switch (format) {
    case Format::csv:
      emit_csv(out, rows);
      break;
    case Format::markdown:
      emit_markdown(out, rows);
      break;
    case Format::json:
      emit_json(out, rows);
      break;
  }
}

void emit_spectral_json(std::ostream& out, const std::vector<SpectralReport>& reports) {
  ordered_json arr = ordered_json::array();
  for (const SpectralReport& r : reports) {
    ordered_json j;
    j["level"] = r.level;
    j["cells"] = r.cells;
    j["problem"] = r.problem;
    j["xi"] = r.xi;
    j["gamma"] = r.gamma;
    j["nu"] = r.nu;
    j["c_b"] = r.c_b;
    j["c_i"] = r.c_i;
    j["kappa_full"] = r.kappa_full;
    j["kappa_reduced"] = r.kappa_reduced;
    j["c_l"] = r.c_l;
    ordered_json lem = ordered_json::object();
    for (const auto& [k, v] : r.lemma_ratios) lem[k] = v;
    j["lemma_ratios"] = lem;
    arr.push_back(std::move(j));
  }
  out << arr.dump(2) << '\n';
}

void write_coo(std::ostream& out, const SparseMatrix& A) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << A.rows() << ' ' << A.cols() << ' ' << A.nonZeros() << '\n';
  char buf[64];
  for (int k = 0; k < A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(A, k); it; ++it) {
      std::snprintf(buf, sizeof buf, "%.17g", it.value());
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << buf << '\n';
    }
}

}  // namespace condensa
