#include "condensa/spectra.hpp"

#include <cmath>
#include <ostream>

#include <Eigen/Dense>

#include "condensa/error.hpp"

namespace condensa {

SparseMatrix select(const SparseMatrix& A, const std::vector<Index>& rows, const std::vector<Index>& cols) {
  std::vector<Index> rmap(A.rows(), -1), cmap(A.cols(), -1);
  for (size_t i = 0; i < rows.size(); ++i) rmap[rows[i]] = static_cast<Index>(i);
  for (size_t j = 0; j < cols.size(); ++j) cmap[cols[j]] = static_cast<Index>(j);
  std::vector<Triplet> t;
  for (int k = 0; k < A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(A, k); it; ++it) {
      const Index r = rmap[it.row()], c = cmap[it.col()];
      if (r >= 0 && c >= 0) t.emplace_back(r, c, it.value());
    }
  SparseMatrix S(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  S.setFromTriplets(t.begin(), t.end());
  return S;
}

namespace {

bool dense_ok(const SparseMatrix& A) { return A.rows() <= kDenseEigLimit; }

Vector dense_eigs(const SparseMatrix& A, const SparseMatrix& B, const std::vector<Vector>& kernel = {}) {
  return generalized_eigs_dense(DenseMatrix(A), DenseMatrix(B), kernel);
}

}  // namespace

PencilConstants measure_constants(const SparseMatrix& A, const SparseMatrix& P, const std::vector<Vector>& kernel) {
  PencilConstants pc;
  if (dense_ok(A)) {
    const Vector ev = dense_eigs(A, P, kernel);
    pc.lambda_min = ev.minCoeff();
    pc.lambda_max = ev.maxCoeff();
    pc.c_b = ev.cwiseAbs().maxCoeff();
    pc.c_i = ev.cwiseAbs().minCoeff();
  } else {
    const PencilExtremes pe = pencil_extremes(A, P, kernel);
    pc.lambda_min = pe.lambda_min;
    pc.lambda_max = pe.lambda_max;
    pc.c_b = pe.abs_max;
    pc.c_i = pe.abs_min;
  }
  pc.kappa = pc.c_b / pc.c_i;
  return pc;
}

double max_pencil_eig(const SparseMatrix& G, const SparseMatrix& B) {
  if (dense_ok(G)) return dense_eigs(G, B).maxCoeff();
  LanczosOptions o;
  o.abs_min = false;
  return pencil_extremes(G, B, {}, o).lambda_max;
}

double min_pencil_eig(const SparseMatrix& G, const SparseMatrix& B) {
  if (dense_ok(G)) return dense_eigs(G, B).minCoeff();
  const PencilExtremes pe = pencil_extremes(G, B);
  return pe.lambda_min > 0 ? pe.abs_min : pe.lambda_min;
}

namespace {

double lifting_constant(const CondensedSystem& cs, const BlockSystem& inner, const SparseMatrix& S_P) {
  const SparseMatrix L = lifting_operator(cs);
  const SparseMatrix P = inner.monolithic();
  const SparseMatrix G = SparseMatrix(L.transpose()) * P * L;
  return std::sqrt(max_pencil_eig(G, S_P));
}

}  // namespace

double lifting_constant(const BlockSystem& system, const BlockSystem& inner) {
  return lifting_constant(condense(system), inner, condense_precond(inner).S);
}

KernelVectors kernel_vectors(const Mesh& mesh, const BlockLayout& layout) {
  KernelVectors kv;
  if (layout.problem != Problem::stokes) return kv;
  const Vector cells = constant_pressure_cells(mesh, layout);
  const Vector traces = restrict_traces(layout, constant_pressure_traces(mesh, layout));
  Vector z(cells.size() + traces.size());
  z << cells, traces;
  kv.monolithic.push_back(z);
  kv.traces.push_back(traces);
  return kv;
}

Theorem23Report theorem23_check(const Mesh& mesh, const BlockSystem& system, const BlockSystem& inner) {
  if (system.layout != inner.layout && system.layout->num_dofs() != inner.layout->num_dofs())
    throw InvalidArgument("theorem23_check: system and inner product use different layouts");
  const KernelVectors kv = kernel_vectors(mesh, *system.layout);
  Theorem23Report r;
  const PencilConstants full = measure_constants(system.monolithic(), inner.monolithic(), kv.monolithic);
  r.c_b = full.c_b;
  r.c_i = full.c_i;
  r.kappa_full = full.kappa;
  const CondensedSystem cs = condense(system);
  const SparseMatrix S_P = condense_precond(inner).S;
  const PencilConstants red = measure_constants(cs.S, S_P, kv.traces);
  r.abs_max = red.c_b;
  r.abs_min = red.c_i;
  r.kappa_reduced = red.kappa;
  r.c_l = lifting_constant(cs, inner, S_P);
  r.upper_bound = r.c_l * r.c_l * r.c_b * (1.0 + 1e-8);
  r.lower_bound = r.c_i * (1.0 - 1e-8);
  r.upper_ok = r.abs_max <= r.upper_bound;
  r.lower_ok = r.abs_min >= r.lower_bound;
  return r;
}

namespace {

std::vector<Index> velocity_indices(const BlockLayout& L, bool cells, bool traces) {
  std::vector<Index> idx;
  if (cells)
    for (Index c = 0; c < L.num_cells; ++c)
      for (int i = 0; i < L.velocity_block; ++i) idx.push_back(L.cell_dof(c, i));
  if (traces)
    for (Index r = 0; r < L.num_free_traces(); ++r)
      if (L.free_to_trace[r] % L.trace_block < L.ubar_block) idx.push_back((cells ? L.num_cell_dofs() : 0) + r);
  return idx;
}

}  // namespace

std::map<std::string, double> lemma_probes(const Mesh& mesh, const ProblemParams& params) {
  std::map<std::string, double> out;
  const int k = params.k;

  // Auxiliary HDG form against the pressure norm.
  {
    auto L = std::make_shared<const BlockLayout>(make_layout(mesh, Problem::hdg_poisson, k));
    const BlockSystem aux = assemble_aux_hdg(mesh, L, params);
    const BlockSystem Pp = assemble_darcy_inner(mesh, L, params);
    const SparseMatrix A = aux.monolithic(), P = Pp.monolithic();
    if (dense_ok(A)) {
      const Vector ev = dense_eigs(A, P);
      out["C1"] = ev.minCoeff();
      out["C2"] = ev.maxCoeff();
    } else {
      const PencilExtremes pe = pencil_extremes(A, P);
      out["C1"] = pe.lambda_min > 0 ? pe.abs_min : pe.lambda_min;
      out["C2"] = pe.lambda_max;
    }
    const CondensedSystem cs = condense(aux);
    const SparseMatrix Lift = lifting_operator(cs);
    const SparseMatrix G = SparseMatrix(Lift.transpose()) * P * Lift;
    out["c_d"] = max_pencil_eig(G, cs.S);
  }

  // Stokes viscous form: coercivity on (u, ubar) and the reduced velocity form.
  {
    auto L = std::make_shared<const BlockLayout>(make_layout(mesh, Problem::stokes, k));
    ProblemParams sp = params;
    sp.zeta = 0.0;
    const BlockSystem st = assemble_stokes(mesh, L, sp, {});
    const BlockSystem inner = assemble_stokes_inner(mesh, L, sp, false);
    const std::vector<Index> vel = velocity_indices(*L, true, true);
    const SparseMatrix C = select(st.monolithic(), vel, vel);
    const SparseMatrix Pu = select(inner.monolithic(), vel, vel);
    out["cbar1"] = min_pencil_eig(C, Pu);

    // l_u(vbar) = u^L(vbar, 0, 0): the local Stokes solve with zero pressure trace.
    const std::vector<Index> ub = velocity_indices(*L, false, true);
    const SparseMatrix Lv = select(lifting_operator(condense(st)), vel, ub);
    const SparseMatrix S_C = SparseMatrix(Lv.transpose()) * C * Lv;
    const SparseMatrix H = sp.nu * select(assemble_mean_deviation(mesh, *L), ub, ub);
    if (dense_ok(S_C)) {
      const Vector ev = dense_eigs(S_C, H);
      out["c1"] = ev.minCoeff();
      out["c2"] = ev.maxCoeff();
    } else {
      const PencilExtremes pe = pencil_extremes(S_C, H);
      out["c1"] = pe.abs_min;
      out["c2"] = pe.lambda_max;
    }
  }

  // Darcy inf-sup: beta^2 = lambda_min(B M^{-1} B^T, N) with xi = 1, gamma = 0.
  {
    auto L = std::make_shared<const BlockLayout>(make_layout(mesh, Problem::darcy, k));
    ProblemParams dp = params;
    dp.xi = 1.0;
    dp.gamma = 0.0;
    const BlockSystem a = assemble_darcy(mesh, L, dp, {});
    const BlockSystem inner = assemble_darcy_inner(mesh, L, dp);
    const std::vector<Index> u = velocity_indices(*L, true, false);
    std::vector<Index> q;
    for (Index c = 0; c < L->num_cells; ++c)
      for (int i = L->velocity_block; i < L->cell_block; ++i) q.push_back(L->cell_dof(c, i));
    for (Index r = 0; r < L->num_free_traces(); ++r) q.push_back(L->num_cell_dofs() + r);
    const SparseMatrix A = a.monolithic(), P = inner.monolithic();
    const SparseMatrix B = select(A, q, u);
    const SparseMatrix N = select(P, q, q);
    const int vb = L->velocity_block;
    std::vector<Triplet> t;
    for (Index c = 0; c < L->num_cells; ++c) {
      const DenseMatrix Minv = inner.cells[c].a11.topLeftCorner(vb, vb).inverse();
      for (int j = 0; j < vb; ++j)
        for (int i = 0; i < vb; ++i) t.emplace_back(c * vb + i, c * vb + j, Minv(i, j));
    }
    SparseMatrix Minv(static_cast<Index>(u.size()), static_cast<Index>(u.size()));
    Minv.setFromTriplets(t.begin(), t.end());
    const SparseMatrix K = B * Minv * SparseMatrix(B.transpose());
    out["beta"] = std::sqrt(min_pencil_eig(K, N));
  }
  return out;
}

void write_spectral_csv(std::ostream& out, const std::vector<SpectralReport>& reports) {
  out << "level,cells,problem,xi,gamma,nu,name,value\n";
  for (const SpectralReport& r : reports) {
    auto row = [&](const std::string& name, double v) {
      out << r.level << ',' << r.cells << ',' << r.problem << ',' << r.xi << ',' << r.gamma << ',' << r.nu << ','
          << name << ',' << v << '\n';
    };
    row("c_b", r.c_b);
    row("c_i", r.c_i);
    row("kappa_full", r.kappa_full);
    row("kappa_reduced", r.kappa_reduced);
    row("c_l", r.c_l);
    for (const auto& [name, v] : r.lemma_ratios) row(name, v);
  }
}

}  // namespace condensa
