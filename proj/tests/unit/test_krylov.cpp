#include <cmath>
#include <sstream>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "condensa/assembly.hpp"
#include "condensa/condense.hpp"
#include "condensa/error.hpp"
#include "condensa/krylov.hpp"
#include "condensa/precond.hpp"

using namespace condensa;

namespace {

SparseMatrix sparse(const DenseMatrix& D) { return D.sparseView(); }

LinearOperator identity() {
  return [](const Vector& x, Vector& y) { y = x; };
}

DenseMatrix random_spd(int n, unsigned seed) {
  std::srand(seed);
  const DenseMatrix R = DenseMatrix::Random(n, n);
  return R * R.transpose() + n * DenseMatrix::Identity(n, n);
}

DenseMatrix random_symmetric(int n, unsigned seed) {
  std::srand(seed);
  const DenseMatrix R = DenseMatrix::Random(n, n);
  return R + R.transpose();
}

struct DarcyReduced {
  Mesh mesh;
  LayoutPtr layout;
  CondensedSystem cs;
  PrecondOperator P;
};

DarcyReduced darcy_reduced(int n) {
  Mesh m = unit_box_mesh(2, n);
  auto L = std::make_shared<const BlockLayout>(make_layout(m, Problem::darcy, 2));
  const ProblemParams params;
  const ManufacturedProblem mp = manufactured_rhs("darcy", 2, params);
  CondensedSystem cs = condense(assemble_darcy(m, L, params, mp.f_darcy, mp.p_dirichlet));
  PreconditionerSpec spec;
  PrecondOperator P = build_reduced(spec, m, L);
  return {std::move(m), L, std::move(cs), std::move(P)};
}

}  // namespace

TEST(Factor, DiagonalSolve) {
  DenseMatrix D = DenseMatrix::Zero(2, 2);
  D.diagonal() << 1.0, 4.0;
  const SpdFactor f = factor_spd(sparse(D));
  EXPECT_EQ(f.size(), 2);
  const Vector x = f.solve(Vector::Constant(2, 4.0));
  EXPECT_NEAR(x[0], 4.0, 1e-15);
  EXPECT_NEAR(x[1], 1.0, 1e-15);
}

TEST(Factor, IndefiniteRejectedBySpd) {
  DenseMatrix D(2, 2);
  D << 0, 1, 1, 0;
  EXPECT_THROW(factor_spd(sparse(D)), NotSpdError);
  const Vector x = factor_sym_indef(sparse(D)).solve(Vector::Unit(2, 0));
  EXPECT_NEAR(x[0], 0.0, 1e-15);
  EXPECT_NEAR(x[1], 1.0, 1e-15);
}

TEST(Factor, SaddlePointSolve) {
  DenseMatrix D(2, 2);
  D << 1, 1, 1, 0;
  Vector b(2);
  b << 3.0, 2.0;
  // x + y = 3, x = 2
  const Vector x = factor_sym_indef(sparse(D)).solve(b);
  EXPECT_NEAR(x[0], 2.0, 1e-14);
  EXPECT_NEAR(x[1], 1.0, 1e-14);
}

TEST(Factor, RandomSpdResidual) {
  const DenseMatrix A = random_spd(50, 5);
  std::srand(6);
  const Vector b = Vector::Random(50);
  const Vector x = factor_spd(sparse(A)).solve(b);
  EXPECT_LE((A * x - b).norm() / b.norm(), 1e-13);
  Vector y;
  factor_spd(sparse(A)).inverse()(b, y);
  EXPECT_LE((x - y).norm(), 1e-14 * x.norm());
}

TEST(Factor, BorderedSolveIsOrthogonalToKernel) {
  // diag(1, 2, 0) with kernel e3
  DenseMatrix D = DenseMatrix::Zero(3, 3);
  D.diagonal() << 1.0, 2.0, 0.0;
  Vector b(3);
  b << 1.0, 4.0, 0.0;
  const Vector x = factor_sym_indef(sparse(D), {Vector::Unit(3, 2)}).solve(b);
  EXPECT_NEAR(x[0], 1.0, 1e-14);
  EXPECT_NEAR(x[1], 2.0, 1e-14);
  EXPECT_NEAR(x[2], 0.0, 1e-14);
}

TEST(Krylov, ZeroRightHandSide) {
  const SparseMatrix A = sparse(random_spd(10, 1));
  const KrylovResult r = cg(as_operator(A), identity(), Vector::Zero(10));
  EXPECT_EQ(r.x.norm(), 0.0);
  EXPECT_EQ(r.report.iterations, 0);
  EXPECT_TRUE(r.report.converged);
  const KrylovResult m = minres(as_operator(A), identity(), Vector::Zero(10));
  EXPECT_EQ(m.x.norm(), 0.0);
  EXPECT_TRUE(m.report.converged);
}

TEST(Krylov, ExactPreconditionerConvergesInOneStep) {
  const SparseMatrix A = sparse(random_spd(30, 2));
  const SpdFactor f = factor_spd(A);
  std::srand(3);
  const Vector b = Vector::Random(30);
  for (const KrylovResult& r : {cg(as_operator(A), f.inverse(), b), minres(as_operator(A), f.inverse(), b)}) {
    EXPECT_EQ(r.report.iterations, 1);
    EXPECT_LE((A * r.x - b).norm() / b.norm(), 1e-12);
    ASSERT_EQ(r.report.history.size(), 2u);
    EXPECT_EQ(r.report.history[0], 1.0);
  }
}

TEST(Krylov, IterationsBoundedByDistinctEigenvalues) {
  DenseMatrix D = DenseMatrix::Zero(12, 12);
  for (int i = 0; i < 12; ++i) D(i, i) = (i % 3 == 0) ? 1.0 : (i % 3 == 1 ? 5.0 : 9.0);
  const Vector b = Vector::Ones(12);
  const KrylovResult r = cg(as_operator(sparse(D)), identity(), b, {1e-12, 50, {}});
  EXPECT_TRUE(r.report.converged);
  EXPECT_LE(r.report.iterations, 3);
  // indefinite: eigenvalues {-2, 3}
  for (int i = 0; i < 12; ++i) D(i, i) = i % 2 ? -2.0 : 3.0;
  const KrylovResult m = minres(as_operator(sparse(D)), identity(), b, {1e-12, 50, {}});
  EXPECT_TRUE(m.report.converged);
  EXPECT_LE(m.report.iterations, 2);
  EXPECT_LE((D * m.x - b).norm(), 1e-11);
}

TEST(Krylov, CgRejectsIndefiniteOperator) {
  DenseMatrix D = DenseMatrix::Identity(4, 4);
  D(3, 3) = -1.0;
  EXPECT_THROW(cg(as_operator(sparse(D)), identity(), Vector::Unit(4, 3)), BreakdownError);
}

TEST(Krylov, MaxitReportsNotConverged) {
  DenseMatrix D = DenseMatrix::Zero(40, 40);
  for (int i = 0; i < 40; ++i) D(i, i) = 1.0 + i;
  const KrylovResult r = cg(as_operator(sparse(D)), identity(), Vector::Ones(40), {1e-14, 3, {}});
  EXPECT_FALSE(r.report.converged);
  EXPECT_EQ(r.report.iterations, 3);
  EXPECT_GT(r.report.relative_residual, 1e-14);
}

TEST(Krylov, HistoryCsv) {
  KrylovReport rep;
  rep.history = {1.0, 0.5};
  std::ostringstream out;
  write_history_csv(out, rep);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "iteration,residual");
  EXPECT_NE(out.str().find("1,0.5"), std::string::npos);
}

TEST(Krylov, DarcyIterationsWithinChebyshevBound) {
  const DarcyReduced d = darcy_reduced(8);
  ASSERT_EQ(d.mesh.num_cells(), 128);
  const KrylovResult r = cg(as_operator(d.cs.S), d.P.inverse(), d.cs.rhs, {1e-10, 999, {}});
  ASSERT_TRUE(r.report.converged);
  EXPECT_GE(r.report.iterations, 15);
  EXPECT_LE(r.report.iterations, 60);
  const Vector ev = generalized_eigs(d.cs.S, d.P.matrix(), EigMode::extreme);
  const double kappa = ev[1] / ev[0];
  const double bound = std::ceil(0.5 * std::sqrt(kappa) * std::log(2.0 / 1e-10));
  EXPECT_LE(r.report.iterations, 2.0 * bound) << "kappa " << kappa;
  EXPECT_LE((d.cs.S * r.x - d.cs.rhs).norm() / d.cs.rhs.norm(), 1e-8);
}

TEST(Krylov, StokesMinresMatchesDirectSolve) {
  const Mesh m = unit_box_mesh(2, 4);
  auto L = std::make_shared<const BlockLayout>(make_layout(m, Problem::stokes, 2));
  const ProblemParams params;
  const ManufacturedProblem mp = manufactured_rhs("stokes", 2, params);
  const CondensedSystem cs = condense(assemble_stokes(m, L, params, mp.f_stokes, mp.u_dirichlet));
  PreconditionerSpec spec;
  spec.problem = Problem::stokes;
  const PrecondOperator P = build_reduced(spec, m, L);
  const Vector z = stokes_trace_kernel(m, *L);
  const KrylovResult r = minres(as_operator(cs.S), P.inverse(), cs.rhs, {1e-12, 999, {z}});
  ASSERT_TRUE(r.report.converged);
  const Vector ref = factor_sym_indef(cs.S, {z}).solve(cs.rhs);
  const Vector x = r.x - (r.x.dot(z) / z.squaredNorm()) * z;
  EXPECT_LE((x - ref).norm() / ref.norm(), 1e-8);
  // deflated iterates stay orthogonal to the kernel
  EXPECT_LE(std::abs(r.x.dot(z)) / (r.x.norm() * z.norm()), 1e-10);
}

TEST(Eigs, MultipleOfB) {
  const DenseMatrix B = random_spd(20, 9);
  const Vector ev = generalized_eigs(sparse(2.0 * B), sparse(B), EigMode::full);
  ASSERT_EQ(ev.size(), 20);
  EXPECT_LE((ev.array() - 2.0).abs().maxCoeff(), 1e-12);
}

TEST(Eigs, DiagonalPencil) {
  DenseMatrix A = DenseMatrix::Zero(2, 2);
  A.diagonal() << 3.0, 1.0;
  const Vector ev = generalized_eigs(sparse(A), sparse(DenseMatrix::Identity(2, 2)), EigMode::full);
  EXPECT_NEAR(ev[0], 1.0, 1e-15);
  EXPECT_NEAR(ev[1], 3.0, 1e-15);
}

TEST(Eigs, RandomPencilMatchesCholeskyReduction) {
  const DenseMatrix A = random_symmetric(30, 12), B = random_spd(30, 13);
  // oracle: eigenvalues of L^{-1} A L^{-T} with B = L L^T
  const Eigen::LLT<DenseMatrix> llt(B);
  const DenseMatrix Linv = llt.matrixL().solve(DenseMatrix::Identity(30, 30));
  const Vector ref = Eigen::SelfAdjointEigenSolver<DenseMatrix>(Linv * A * Linv.transpose()).eigenvalues();
  const Vector full = generalized_eigs(sparse(A), sparse(B), EigMode::full);
  const Vector dense = generalized_eigs_dense(A, B);
  EXPECT_LE((full - ref).cwiseAbs().maxCoeff(), 1e-10 * ref.cwiseAbs().maxCoeff());
  EXPECT_LE((dense - ref).cwiseAbs().maxCoeff(), 1e-10 * ref.cwiseAbs().maxCoeff());
  const Vector ext = generalized_eigs(sparse(A), sparse(B), EigMode::extreme);
  ASSERT_EQ(ext.size(), 2);
  EXPECT_NEAR(ext[0], ref[0], 1e-6 * ref.cwiseAbs().maxCoeff());
  EXPECT_NEAR(ext[1], ref[29], 1e-6 * ref.cwiseAbs().maxCoeff());
}

TEST(Eigs, ScalingInvariance) {
  const DenseMatrix A = random_symmetric(25, 14), B = random_spd(25, 15);
  const Vector ref = generalized_eigs(sparse(A), sparse(B), EigMode::full);
  for (double c : {1e-6, 1.0, 1e6}) {
    const Vector ev = generalized_eigs(sparse(c * A), sparse(c * B), EigMode::full);
    EXPECT_LE((ev - ref).cwiseAbs().maxCoeff(), 1e-10 * ref.cwiseAbs().maxCoeff()) << "c " << c;
  }
}

TEST(Eigs, KernelIsExcluded) {
  DenseMatrix A = DenseMatrix::Zero(3, 3);
  A.diagonal() << 2.0, -1.0, 0.0;
  const Vector ev = generalized_eigs(sparse(A), sparse(DenseMatrix::Identity(3, 3)), EigMode::full,
                                     {Vector::Unit(3, 2)});
  ASSERT_EQ(ev.size(), 2);
  EXPECT_NEAR(ev[0], -1.0, 1e-14);
  EXPECT_NEAR(ev[1], 2.0, 1e-14);
}

TEST(Eigs, NonSpdRightHandRejected) {
  DenseMatrix B = DenseMatrix::Identity(3, 3);
  B(1, 1) = -1.0;
  EXPECT_THROW(generalized_eigs(sparse(B), sparse(B), EigMode::full), NotSpdError);
}

TEST(Eigs, PencilExtremesOnDarcy) {
  const DarcyReduced d = darcy_reduced(4);
  const Vector full = generalized_eigs(d.cs.S, d.P.matrix(), EigMode::full);
  const PencilExtremes e = pencil_extremes(d.cs.S, d.P.matrix());
  EXPECT_NEAR(e.lambda_min, full[0], 1e-6 * full[full.size() - 1]);
  EXPECT_NEAR(e.lambda_max, full[full.size() - 1], 1e-6 * full[full.size() - 1]);
  EXPECT_NEAR(e.abs_min, full.cwiseAbs().minCoeff(), 1e-6 * full.cwiseAbs().minCoeff());
  EXPECT_NEAR(e.abs_max, full.cwiseAbs().maxCoeff(), 1e-6 * full[full.size() - 1]);
}
