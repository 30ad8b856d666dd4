#include <cmath>
#include <numbers>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "condensa/assembly.hpp"
#include "condensa/basis.hpp"
#include "condensa/error.hpp"
#include "condensa/spectra.hpp"

using namespace condensa;

namespace {

constexpr double pi = std::numbers::pi;

LayoutPtr layout(const Mesh& m, Problem p, int k = 2) { return std::make_shared<const BlockLayout>(make_layout(m, p, k)); }

// Sum over cells of the local quadratic form, plus inter-cell coupling.
double energy(const BlockSystem& s, const Vector& cells, const Vector& traces) {
  const BlockLayout& L = *s.layout;
  double e = 0;
  for (Index c = 0; c < L.num_cells; ++c) {
    const CellBlocks& b = s.cells[c];
    const Vector u = cells.segment(L.cell_dof(c, 0), L.cell_block);
    Vector t(L.num_local_traces());
    for (int j = 0; j < t.size(); ++j) t[j] = traces[L.local_trace_dof(c, j)];
    e += u.dot(b.a11 * u) + 2.0 * u.dot(b.a12 * t) + t.dot(b.a22 * t);
  }
  if (s.has_coupling()) e += cells.dot(s.coupling * cells);
  return e;
}

// Cell coefficients of a constant vector field (value per component) on the velocity space.
Vector constant_velocity(const Mesh& m, const BlockLayout& L, const Point& value) {
  const ScalarBasis b(m.dim(), L.k);
  const Vector one = constant_pressure_cells(m, make_layout(m, Problem::hdg_poisson, L.k + 1));
  const int n = b.size();
  Vector x = Vector::Zero(L.num_cell_dofs());
  for (Index c = 0; c < L.num_cells; ++c)
    for (int comp = 0; comp < m.dim(); ++comp)
      x.segment(L.cell_dof(c, comp * n), n) = value[comp] * one.segment(c * n, n);
  return x;
}

Vector constant_velocity_traces(const Mesh& m, const BlockLayout& L, const Point& value) {
  const Vector one = constant_pressure_traces(m, L);
  const int n = L.pbar_block;
  Vector t = Vector::Zero(L.num_traces());
  for (Index f = 0; f < L.num_facets; ++f)
    for (int comp = 0; comp < m.dim(); ++comp)
      for (int j = 0; j < n; ++j) t[L.ubar_dof(f, comp, j)] = value[comp] * one[L.pbar_dof(f, j)];
  return t;
}

double asymmetry(const SparseMatrix& A) {
  return SparseMatrix(A - SparseMatrix(A.transpose())).norm() / std::max(A.norm(), 1e-300);
}

double monomial_integral(int a, int b) { return std::tgamma(a + 1.0) * std::tgamma(b + 1.0) / std::tgamma(a + b + 3.0); }

}  // namespace

TEST(Assembly, ZeroDataGivesZeroSolution) {
  const Mesh m = unit_box_mesh(2, 2);
  const auto L = layout(m, Problem::darcy);
  const BlockSystem s = assemble_darcy(m, L, {}, [](const Point&) { return 0.0; }, [](const Point&) { return 0.0; });
  EXPECT_EQ(s.monolithic_rhs().norm(), 0.0);
  const Vector x = factor_sym_indef(s.monolithic()).solve(s.monolithic_rhs());
  EXPECT_EQ(x.norm(), 0.0);
}

TEST(Assembly, DarcyDivergenceIdentityPerCell) {
  for (int dim : {2, 3}) {
    const Mesh m = unit_box_mesh(dim, 2);
    const auto L = layout(m, Problem::darcy);
    const BlockSystem s = assemble_darcy(m, L, {}, {});
    const Vector pc = constant_pressure_cells(m, *L);
    const Vector pt = constant_pressure_traces(m, *L);
    for (Index c = 0; c < L->num_cells; ++c) {
      const CellBlocks& b = s.cells[c];
      Vector t(L->num_local_traces());
      for (int j = 0; j < t.size(); ++j) t[j] = pt[L->local_trace_dof(c, j)];
      const Vector r = b.a11 * pc.segment(L->cell_dof(c, 0), L->cell_block) + b.a12 * t;
      EXPECT_LT(r.head(L->velocity_block).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(Assembly, OneCellVelocityMassMatchesExactGram) {
  const Mesh m(2, {Point(0, 0, 0), Point(1, 0, 0), Point(0, 1, 0)}, {0, 1, 2});
  const auto L = layout(m, Problem::darcy, 1);
  ProblemParams p;
  p.k = 1;
  p.xi = 2.0;
  const BlockSystem s = assemble_darcy(m, L, p, {});
  // Gram of the basis from its monomial expansion and closed-form integrals.
  const ScalarBasis b(2, 1);
  const auto& e = b.exponents();
  DenseMatrix M(e.size(), e.size());
  for (size_t i = 0; i < e.size(); ++i)
    for (size_t j = 0; j < e.size(); ++j) M(i, j) = monomial_integral(e[i][0] + e[j][0], e[i][1] + e[j][1]);
  const DenseMatrix G = b.coefficients() * M * b.coefficients().transpose();
  const int n = b.size();
  for (int comp = 0; comp < 2; ++comp) {
    const DenseMatrix blk = s.cells[0].a11.block(comp * n, comp * n, n, n);
    // velocity rows are stored negated
    EXPECT_LT((blk + 0.5 * G).norm(), 1e-13);
  }
}

TEST(Assembly, DarcyInnerConstantsHaveZeroPressureEnergy) {
  const Mesh m = unit_box_mesh(2, 3);
  const auto L = layout(m, Problem::hdg_poisson);
  ProblemParams p;
  p.gamma = 0.0;
  const BlockSystem inner = assemble_darcy_inner(m, L, p);
  const Vector c = 3.0 * constant_pressure_cells(m, *L);
  const Vector t = 3.0 * constant_pressure_traces(m, *L);
  EXPECT_LT(std::abs(energy(inner, c, t)), 1e-12);
}

TEST(Assembly, DarcyInnerVelocityScaling) {
  const Mesh m = unit_box_mesh(2, 1);
  const auto L = layout(m, Problem::darcy);
  ProblemParams p;
  p.xi = 4.0;
  const BlockSystem inner = assemble_darcy_inner(m, L, p);
  Vector cells = Vector::Zero(L->num_cell_dofs());
  cells[L->cell_dof(0, 0)] = 1.0;
  // orthonormal reference basis: Gram entry = 2 |K|
  const double gram = 2.0 * m.cell_volume(0);
  EXPECT_NEAR(energy(inner, cells, Vector::Zero(L->num_traces())), gram / 4.0, 1e-14);
}

TEST(Assembly, DarcyInnerPositiveOnRandomVectors) {
  const Mesh m = unit_box_mesh(2, 4);
  const auto L = layout(m, Problem::darcy);
  std::srand(7);
  for (double xi : {1e-6, 1.0})
    for (double g : {1e-4, 1e4}) {
      ProblemParams p;
      p.xi = xi;
      p.gamma = g;
      const SparseMatrix P = assemble_darcy_inner(m, L, p).monolithic();
      for (int trial = 0; trial < 5; ++trial) {
        const Vector x = Vector::Random(P.rows());
        EXPECT_GT(x.dot(P * x), 0.0);
      }
    }
}

TEST(Assembly, AuxFormSymmetricAndZeroOnConstants) {
  const Mesh m = unit_box_mesh(2, 3);
  const auto L = layout(m, Problem::hdg_poisson);
  ProblemParams p;
  p.gamma = 0.0;
  const BlockSystem a = assemble_aux_hdg(m, L, p);
  EXPECT_LT(asymmetry(a.monolithic()), 1e-13);
  for (const CellBlocks& b : a.cells) EXPECT_LT((b.a11 - b.a11.transpose()).norm(), 1e-13 * b.a11.norm());
  EXPECT_LT(std::abs(energy(a, constant_pressure_cells(m, *L), constant_pressure_traces(m, *L))), 1e-12);
}

TEST(Assembly, AuxFormRayleighBounds) {
  std::vector<double> lo, hi;
  for (int n : {2, 4}) {
    const Mesh m = unit_box_mesh(2, n);
    const auto L = layout(m, Problem::hdg_poisson);
    const ProblemParams p;
    const Vector ev = generalized_eigs(assemble_aux_hdg(m, L, p).monolithic(),
                                       assemble_darcy_inner(m, L, p).monolithic(), EigMode::full);
    lo.push_back(ev.minCoeff());
    hi.push_back(ev.maxCoeff());
  }
  for (size_t i = 0; i < lo.size(); ++i) {
    EXPECT_GT(lo[i], 0.0);
    EXPECT_LT(hi[i], 10.0);
  }
  EXPECT_LT(std::max(lo[0], lo[1]) / std::min(lo[0], lo[1]), 1.5);
}

TEST(Assembly, StokesRigidTranslationHasZeroViscousEnergy) {
  for (int dim : {2, 3}) {
    const Mesh m = unit_box_mesh(dim, 2);
    const auto L = layout(m, Problem::stokes);
    const BlockSystem s = assemble_stokes(m, L, {}, {});
    const Point c(0.3, -1.2, 0.7);
    EXPECT_LT(std::abs(energy(s, constant_velocity(m, *L, c), constant_velocity_traces(m, *L, c))), 1e-11);
  }
}

TEST(Assembly, StokesConstantPressureInKernel) {
  for (int dim : {2, 3}) {
    const Mesh m = unit_box_mesh(dim, 2);
    const auto L = layout(m, Problem::stokes);
    const SparseMatrix A = assemble_stokes(m, L, {}, {}).monolithic();
    const Vector z = kernel_vectors(m, *L).monolithic.front();
    EXPECT_LT((A * z).norm(), 1e-12 * A.norm() * z.norm());
  }
}

TEST(Assembly, StokesViscousCoercivityOnTwoLevels) {
  std::vector<double> c;
  for (int n : {4, 8}) {
    const Mesh m = unit_box_mesh(2, n);
    c.push_back(lemma_probes(m, ProblemParams{}).at("cbar1"));
  }
  EXPECT_GT(c[0], 0.0);
  EXPECT_GT(c[1], 0.0);
  EXPECT_LT(std::max(c[0], c[1]) / std::min(c[0], c[1]), 1.25);
}

TEST(Assembly, StokesInnerPlainAndDeterministic) {
  const Mesh m = unit_box_mesh(2, 2);
  const auto L = layout(m, Problem::stokes);
  const ProblemParams p;
  const SparseMatrix a = assemble_stokes_inner(m, L, p, false).monolithic();
  const SparseMatrix b = assemble_stokes_inner(m, L, p, false).monolithic();
  EXPECT_EQ(SparseMatrix(a - b).norm(), 0.0);
}

TEST(Assembly, GradDivAddsZeroOnTranslations) {
  const Mesh m = unit_box_mesh(2, 2);
  const auto L = layout(m, Problem::stokes);
  ProblemParams p0, p1;
  p1.zeta = 100.0;
  const BlockSystem a = assemble_stokes_inner(m, L, p0, false), b = assemble_stokes_inner(m, L, p1, false);
  const Vector u = constant_velocity(m, *L, Point(1, 2, 0));
  const Vector t = Vector::Zero(L->num_traces());
  EXPECT_NEAR(energy(a, u, t), energy(b, u, t), 1e-11);
}

TEST(Assembly, GradDivEnergyMatchesDivergenceNorm) {
  const Mesh m = unit_box_mesh(2, 2);
  const auto L = layout(m, Problem::stokes);
  ProblemParams p0, p1;
  p1.zeta = 100.0;
  const BlockSystem a = assemble_stokes_inner(m, L, p0, true), b = assemble_stokes_inner(m, L, p1, true);
  std::srand(3);
  const Vector u = Vector::Random(L->num_cell_dofs());
  const Vector t = Vector::Zero(L->num_traces());
  const double diff = energy(b, u, t) - energy(a, u, t);
  const NormValues nv = evaluate_norms(m, *L, p0.eta_for(2), u, t);
  EXPECT_NEAR(diff, 100.0 * nv.div, 1e-10 * diff);
}

TEST(Assembly, CounterexampleTraceEnergy) {
  const Mesh m = unit_box_mesh(2, 2);
  const auto L = layout(m, Problem::darcy);
  ProblemParams p;
  p.xi = 2.0;
  const SparseMatrix P = assemble_counterexample_inner(m, L, p).monolithic();
  const Vector one = constant_pressure_traces(m, *L);
  Index f = 0;
  while (m.is_boundary(f)) ++f;
  Vector x = Vector::Zero(P.rows());
  for (int j = 0; j < L->pbar_block; ++j) x[L->num_cell_dofs() + L->trace_free[L->pbar_dof(f, j)]] = one[L->pbar_dof(f, j)];
  const auto& fc = m.facet_cells(f);
  const double expected = 2.0 * (m.cell_diameter(fc[0]) + m.cell_diameter(fc[1])) * m.facet_area(f);
  EXPECT_NEAR(x.dot(P * x), expected, 1e-12);
}

TEST(Assembly, CounterexampleJumpVanishesForContinuousNormal) {
  const Mesh m = unit_box_mesh(2, 2);
  const auto L = layout(m, Problem::darcy);
  ProblemParams p;
  const BlockSystem s = assemble_counterexample_inner(m, L, p);
  ASSERT_TRUE(s.has_coupling());
  // a global constant field has continuous normal components
  const Vector u = constant_velocity(m, *L, Point(1.0, -0.5, 0));
  const BlockSystem plain = assemble_darcy_inner(m, L, p);
  const Vector t = Vector::Zero(L->num_traces());
  // divergence vanishes too, so only the mass term remains
  double mass = 0;
  for (Index c = 0; c < L->num_cells; ++c) {
    const Vector uc = u.segment(L->cell_dof(c, 0), L->velocity_block);
    mass += uc.dot(plain.cells[c].a11.topLeftCorner(L->velocity_block, L->velocity_block) * uc);
  }
  EXPECT_NEAR(energy(s, u, t), mass, 1e-12);
}

TEST(Assembly, BigMSwitches) {
  ProblemParams p;
  p.xi = 1e-6;
  p.gamma = 1e4;
  EXPECT_EQ(p.big_m(Point::Zero()), 1e4);
  p.xi = 2.0;
  p.gamma = 1e-4;
  EXPECT_EQ(p.big_m(Point::Zero()), 2.0);
}

TEST(Assembly, NormsOfConstants) {
  const Mesh m = unit_box_mesh(2, 3);
  const BlockLayout L = make_layout(m, Problem::stokes, 2);
  const Point c(0.4, 1.1, 0);
  const NormValues nv =
      evaluate_norms(m, L, 16.0, constant_velocity(m, L, c), constant_velocity_traces(m, L, c));
  EXPECT_LT(nv.v(), 1e-12);
  EXPECT_LT(nv.hu(), 1e-12);
}

TEST(Assembly, PressureZeroNormOfOne) {
  const Mesh m = unit_box_mesh(2, 3);
  const BlockLayout L = make_layout(m, Problem::hdg_poisson, 2);
  const NormValues nv =
      evaluate_norms(m, L, 16.0, constant_pressure_cells(m, L), constant_pressure_traces(m, L));
  double expected = 1.0;
  for (Index c = 0; c < m.num_cells(); ++c) {
    const CellGeometry g = m.cell_geometry(c);
    expected += g.diameter * g.boundary_measure;
  }
  EXPECT_NEAR(nv.p0(), expected, 1e-12);
  EXPECT_LT(nv.p(), 1e-12);
}

TEST(Assembly, ManufacturedValues) {
  const ProblemParams p;
  const ManufacturedProblem d = manufactured_rhs("darcy", 2, p);
  EXPECT_NEAR(d.exact_p(Point(0.5, 0.5, 0)), 0.0, 1e-15);
  EXPECT_NEAR(d.f_darcy(Point(0.25, 0.25, 0)), (2.0 * pi * pi + 1.0) / 2.0, 1e-12);
  const ManufacturedProblem s = manufactured_rhs("stokes", 2, p);
  const Point u = s.exact_u(Point(0.5, 0.5, 0));
  EXPECT_NEAR(u[0], 1.0, 1e-15);
  EXPECT_NEAR(u[1], 0.0, 1e-15);
  EXPECT_THROW(manufactured_rhs("nope", 2, p), InvalidArgument);
  EXPECT_THROW(manufactured_rhs("darcy", 4, p), InvalidArgument);
}

TEST(Assembly, CavityLidIsTangential) {
  const ManufacturedProblem s = manufactured_rhs("stokes-cavity", 2, ProblemParams{});
  const Point top = s.u_dirichlet(Point(0.5, 1.0, 0));
  EXPECT_NEAR(top[0], 1.0 - std::pow(0.5, 4), 1e-15);
  EXPECT_EQ(top[1], 0.0);
  EXPECT_FALSE(s.has_exact());
}

TEST(Assembly, SchemesAreSymmetric) {
  for (int dim : {2, 3}) {
    const Mesh m = unit_box_mesh(dim, 2);
    const ProblemParams p;
    EXPECT_LT(asymmetry(assemble_darcy(m, layout(m, Problem::darcy), p, {}).monolithic()), 1e-13);
    EXPECT_LT(asymmetry(assemble_stokes(m, layout(m, Problem::stokes), p, {}).monolithic()), 1e-13);
    EXPECT_LT(asymmetry(assemble_counterexample_inner(m, layout(m, Problem::darcy), p).monolithic()), 1e-13);
  }
}

TEST(Assembly, CellBlockIsBlockDiagonal) {
  const Mesh m = unit_box_mesh(2, 3);
  const auto L = layout(m, Problem::stokes);
  const SparseMatrix A11 = assemble_stokes(m, L, {}, {}).a11();
  for (int k = 0; k < A11.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(A11, k); it; ++it)
      EXPECT_EQ(it.row() / L->cell_block, it.col() / L->cell_block);
}

TEST(Assembly, QuadratureOrderIndependence) {
  const Mesh m = unit_box_mesh(2, 2);
  for (Problem prob : {Problem::darcy, Problem::stokes}) {
    const auto L = layout(m, prob);
    ProblemParams lo, hi;
    hi.quad_order = 2 * hi.k + 4;
    const SparseMatrix a = prob == Problem::darcy ? assemble_darcy(m, L, lo, {}).monolithic()
                                                  : assemble_stokes(m, L, lo, {}).monolithic();
    const SparseMatrix b = prob == Problem::darcy ? assemble_darcy(m, L, hi, {}).monolithic()
                                                  : assemble_stokes(m, L, hi, {}).monolithic();
    EXPECT_LT(SparseMatrix(a - b).norm() / a.norm(), 1e-13);
  }
}

TEST(Assembly, LayoutMismatchRejected) {
  const Mesh m = unit_box_mesh(2, 1);
  EXPECT_THROW(assemble_darcy(m, layout(m, Problem::stokes), {}, {}), InvalidArgument);
  EXPECT_THROW(assemble_stokes(m, layout(m, Problem::darcy), {}, {}), InvalidArgument);
  EXPECT_THROW(assemble_aux_hdg(m, layout(m, Problem::darcy), {}), InvalidArgument);
}
