#include <cmath>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "condensa/assembly.hpp"
#include "condensa/error.hpp"
#include "condensa/precond.hpp"

using namespace condensa;

namespace {

LayoutPtr layout(const Mesh& m, Problem p, int k = 2) { return std::make_shared<const BlockLayout>(make_layout(m, p, k)); }

Vector random_vector(Index n, unsigned seed) {
  std::srand(seed);
  return Vector::Random(n);
}

PreconditionerSpec spec_for(Problem p, PrecondLevel level, PrecondKind kind = PrecondKind::paper) {
  PreconditionerSpec s;
  s.problem = p;
  s.level = level;
  s.kind = kind;
  return s;
}

// Cell dofs and all traces (fixed ones zero) of a monolithic vector.
NormValues norms_of(const Mesh& m, const BlockLayout& L, double eta, const Vector& x) {
  return evaluate_norms(m, L, eta, x.head(L.num_cell_dofs()), expand_traces(L, x.tail(L.num_free_traces()), {}));
}

}  // namespace

TEST(Precond, ApplyInvertsMatrix) {
  const Mesh m = unit_box_mesh(2, 3);
  for (Problem p : {Problem::darcy, Problem::stokes})
    for (PrecondLevel level : {PrecondLevel::full, PrecondLevel::reduced}) {
      const PrecondOperator P = build_preconditioner(spec_for(p, level), m, layout(m, p));
      const Vector r = random_vector(P.size(), 4);
      const Vector z = P.apply(r);
      EXPECT_LE((P.matrix() * z - r).norm(), 1e-12 * r.norm()) << P.spec().label();
      Vector y;
      P.apply(r, y);
      EXPECT_EQ((y - z).norm(), 0.0);
      P.inverse()(r, y);
      EXPECT_EQ((y - z).norm(), 0.0);
    }
}

TEST(Precond, DarcyEnergyMatchesNormSum) {
  const Mesh m = unit_box_mesh(2, 2);
  ASSERT_EQ(m.num_cells(), 8);
  const auto L = layout(m, Problem::darcy);
  PreconditionerSpec spec = spec_for(Problem::darcy, PrecondLevel::full);
  spec.params.xi = 0.3;
  spec.params.gamma = 7.0;
  const PrecondOperator P = build_full(spec, m, L);
  const Vector x = random_vector(P.size(), 8);
  const double eta = spec.params.eta_for(2);
  const NormValues n = norms_of(m, *L, eta, x);
  const double expect = n.u_l2 / 0.3 + 7.0 * n.p_l2 + 0.3 * n.p();
  EXPECT_NEAR(x.dot(P.matrix() * x), expect, 1e-10 * expect);
}

TEST(Precond, StokesEnergyMatchesNormSum) {
  const Mesh m = unit_box_mesh(2, 2);
  const auto L = layout(m, Problem::stokes);
  PreconditionerSpec spec = spec_for(Problem::stokes, PrecondLevel::full);
  spec.params.nu = 0.25;
  spec.zeta = 3.0;
  const PrecondOperator P = build_full(spec, m, L);
  const Vector x = random_vector(P.size(), 9);
  const double eta = spec.params.eta_for(2);
  const NormValues n = norms_of(m, *L, eta, x);
  const double expect = 0.25 * n.v() + 3.0 * n.div + n.p_l2 / 0.25 + n.pbar_h / (0.25 * eta);
  EXPECT_NEAR(x.dot(P.matrix() * x), expect, 1e-10 * expect);
}

TEST(Precond, DoublingXiHalvesVelocityEnergy) {
  const Mesh m = unit_box_mesh(2, 2);
  const auto L = layout(m, Problem::darcy);
  Vector x = Vector::Zero(L->num_dofs());
  for (Index c = 0; c < L->num_cells; ++c)
    x.segment(L->cell_dof(c, 0), L->velocity_block) = random_vector(L->velocity_block, 10 + c);
  PreconditionerSpec spec = spec_for(Problem::darcy, PrecondLevel::full);
  spec.params.xi = 1.5;
  const double e1 = x.dot(build_full(spec, m, L).matrix() * x);
  spec.params.xi = 3.0;
  const double e2 = x.dot(build_full(spec, m, L).matrix() * x);
  EXPECT_NEAR(e2, 0.5 * e1, 1e-13 * e1);
}

TEST(Precond, ReducedIsMinimumOverCellDofs) {
  const Mesh m = unit_box_mesh(2, 3);
  for (Problem p : {Problem::darcy, Problem::stokes}) {
    const auto L = layout(m, p);
    const PrecondOperator full = build_full(spec_for(p, PrecondLevel::full), m, L);
    const PrecondOperator red = build_reduced(spec_for(p, PrecondLevel::reduced), m, L);
    const Vector t = random_vector(L->num_free_traces(), 20);
    const double sp = t.dot(red.matrix() * t);
    // minimizer w = -P11^{-1} P21^T t
    const SparseMatrix P11 = full.inner().a11(), P21 = full.inner().a21();
    const Vector wmin = -factor_spd(P11).solve(SparseMatrix(P21.transpose()) * t);
    Vector x(L->num_dofs());
    x << wmin, t;
    EXPECT_NEAR(x.dot(full.matrix() * x), sp, 1e-10 * sp);
    for (unsigned seed : {21u, 22u, 23u}) {
      x << wmin + 0.1 * random_vector(L->num_cell_dofs(), seed), t;
      EXPECT_GT(x.dot(full.matrix() * x), sp);
    }
  }
}

TEST(Precond, CounterexampleReducedIsTraceBlock) {
  const Mesh m = unit_box_mesh(2, 2);
  const auto L = layout(m, Problem::darcy);
  const PrecondOperator P =
      build_reduced(spec_for(Problem::darcy, PrecondLevel::reduced, PrecondKind::counterexample), m, L);
  EXPECT_LE(SparseMatrix(P.matrix() - P.inner().a22()).norm(), 1e-14 * P.matrix().norm());
  const DenseMatrix dense_inverse = DenseMatrix(P.matrix()).inverse();
  const Vector r = random_vector(P.size(), 30);
  EXPECT_LE((P.apply(r) - dense_inverse * r).norm(), 1e-10 * (dense_inverse * r).norm());
}

TEST(Precond, PositiveDefiniteAcrossSweeps) {
  const Mesh m = unit_box_mesh(2, 2);
  const auto Ld = layout(m, Problem::darcy);
  for (double xi : {1.0, 1e-6})
    for (double gamma : {1e-4, 1.0, 1e4})
      for (PrecondKind kind : {PrecondKind::paper, PrecondKind::counterexample})
        for (PrecondLevel level : {PrecondLevel::full, PrecondLevel::reduced}) {
          PreconditionerSpec s = spec_for(Problem::darcy, level, kind);
          s.params.xi = xi;
          s.params.gamma = gamma;
          EXPECT_NO_THROW(build_preconditioner(s, m, Ld)) << s.label() << " xi " << xi << " gamma " << gamma;
        }
  const auto Ls = layout(m, Problem::stokes);
  for (double nu : {1.0, 1e-6})
    for (double zeta : {0.0, 100.0})
      for (bool hatted : {false, true})
        for (PrecondLevel level : {PrecondLevel::full, PrecondLevel::reduced}) {
          PreconditionerSpec s = spec_for(Problem::stokes, level);
          s.params.nu = nu;
          s.zeta = zeta;
          s.hatted = hatted;
          EXPECT_NO_THROW(build_preconditioner(s, m, Ls)) << s.label() << " nu " << nu;
        }
}

TEST(Precond, StokesViscosityScaling) {
  const Mesh m = unit_box_mesh(2, 2);
  const auto L = layout(m, Problem::stokes);
  PreconditionerSpec s = spec_for(Problem::stokes, PrecondLevel::full);
  const SparseMatrix P1 = build_full(s, m, L).matrix();
  s.params.nu = 1e-3;
  const SparseMatrix P2 = build_full(s, m, L).matrix();
  // velocity block scales with nu, cell pressure with 1/nu
  const Index u = L->cell_dof(0, 0), p = L->cell_dof(0, L->velocity_block);
  EXPECT_NEAR(P2.coeff(u, u), 1e-3 * P1.coeff(u, u), 1e-14 * P1.coeff(u, u));
  EXPECT_NEAR(P2.coeff(p, p), 1e3 * P1.coeff(p, p), 1e-10 * P1.coeff(p, p));
}

TEST(Precond, Labels) {
  EXPECT_EQ(spec_for(Problem::darcy, PrecondLevel::reduced).label(), "paper-reduced");
  EXPECT_EQ(spec_for(Problem::darcy, PrecondLevel::full, PrecondKind::counterexample).label(), "counterexample-full");
  PreconditionerSpec s = spec_for(Problem::stokes, PrecondLevel::full);
  EXPECT_EQ(s.label(), "paper-full");
  s.zeta = 100.0;
  s.hatted = true;
  EXPECT_EQ(s.label(), "hat-zeta100-full");
  s.hatted = false;
  s.level = PrecondLevel::reduced;
  EXPECT_EQ(s.label(), "zeta100-reduced");
  s.zeta = 0.0;
  s.hatted = true;
  EXPECT_EQ(s.label(), "hat-zeta0-reduced");
}

TEST(Precond, InvalidSpecs) {
  const Mesh m = unit_box_mesh(2, 1);
  EXPECT_THROW(spec_for(Problem::stokes, PrecondLevel::full, PrecondKind::counterexample).validate(), InvalidArgument);
  EXPECT_THROW(spec_for(Problem::hdg_poisson, PrecondLevel::full).validate(), InvalidArgument);
  PreconditionerSpec s = spec_for(Problem::darcy, PrecondLevel::full);
  s.hatted = true;
  EXPECT_THROW(s.validate(), InvalidArgument);
  s = spec_for(Problem::stokes, PrecondLevel::full);
  s.zeta = -1.0;
  EXPECT_THROW(s.validate(), InvalidArgument);
  s.zeta = 0.0;
  s.params.nu = 0.0;
  EXPECT_THROW(s.validate(), InvalidArgument);
  EXPECT_THROW(build_full(spec_for(Problem::darcy, PrecondLevel::full), m, layout(m, Problem::stokes)),
               InvalidArgument);
  EXPECT_THROW(build_full(spec_for(Problem::darcy, PrecondLevel::reduced), m, layout(m, Problem::darcy)),
               InvalidArgument);
  EXPECT_THROW(build_reduced(spec_for(Problem::darcy, PrecondLevel::full), m, layout(m, Problem::darcy)),
               InvalidArgument);
}
