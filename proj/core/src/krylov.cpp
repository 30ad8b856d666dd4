#include "condensa/krylov.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <random>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "condensa/error.hpp"

namespace condensa {

LinearOperator as_operator(const SparseMatrix& A) {
  return [&A](const Vector& x, Vector& y) { y.noalias() = A * x; };
}

// ---------------------------------------------------------------------------
// Direct factorizations

struct SpdFactor::Impl {
  Eigen::SimplicialLLT<SparseMatrix> llt;
};

SpdFactor::SpdFactor(const SparseMatrix& A) : n_(A.rows()) {
  if (A.rows() != A.cols()) throw InvalidArgument("factor_spd: matrix is not square");
  auto impl = std::make_shared<Impl>();
  impl->llt.compute(A);
  if (impl->llt.info() != Eigen::Success) throw NotSpdError("factor_spd: matrix is not symmetric positive definite");
  impl_ = std::move(impl);
}
SpdFactor::~SpdFactor() = default;
SpdFactor::SpdFactor(SpdFactor&&) noexcept = default;
SpdFactor& SpdFactor::operator=(SpdFactor&&) noexcept = default;

Vector SpdFactor::solve(const Vector& b) const {
  if (b.size() != n_) throw InvalidArgument("SpdFactor::solve: size mismatch");
  return impl_->llt.solve(b);
}

LinearOperator SpdFactor::inverse() const {
  auto impl = impl_;
  return [impl](const Vector& x, Vector& y) { y = impl->llt.solve(x); };
}

struct SymIndefFactor::Impl {
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
};

SymIndefFactor::SymIndefFactor(const SparseMatrix& A, const std::vector<Vector>& kernel)
    : n_(A.rows()), border_(static_cast<int>(kernel.size())) {
  if (A.rows() != A.cols()) throw InvalidArgument("factor_sym_indef: matrix is not square");
  SparseMatrix M;
  if (kernel.empty()) {
    M = A;
  } else {
    std::vector<Triplet> t;
    t.reserve(A.nonZeros() + 2 * n_ * border_);
    for (int k = 0; k < A.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(A, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
    for (int j = 0; j < border_; ++j) {
      if (kernel[j].size() != n_) throw InvalidArgument("factor_sym_indef: kernel vector size mismatch");
      const Vector z = kernel[j] / kernel[j].norm();
      for (Index i = 0; i < n_; ++i)
        if (z(i) != 0.0) {
          t.emplace_back(i, n_ + j, z(i));
          t.emplace_back(n_ + j, i, z(i));
        }
    }
    M.resize(n_ + border_, n_ + border_);
    M.setFromTriplets(t.begin(), t.end());
  }
  M.makeCompressed();
  auto impl = std::make_shared<Impl>();
  impl->lu.compute(M);
  if (impl->lu.info() != Eigen::Success)
    throw Error("factor_sym_indef: factorization failed: " + impl->lu.lastErrorMessage());
  impl_ = std::move(impl);
}
SymIndefFactor::~SymIndefFactor() = default;
SymIndefFactor::SymIndefFactor(SymIndefFactor&&) noexcept = default;
SymIndefFactor& SymIndefFactor::operator=(SymIndefFactor&&) noexcept = default;

Vector SymIndefFactor::solve(const Vector& b) const {
  if (b.size() != n_) throw InvalidArgument("SymIndefFactor::solve: size mismatch");
  if (border_ == 0) return impl_->lu.solve(b);
  Vector rhs = Vector::Zero(n_ + border_);
  rhs.head(n_) = b;
  const Vector x = impl_->lu.solve(rhs);
  return x.head(n_);
}

SpdFactor factor_spd(const SparseMatrix& A) { return SpdFactor(A); }
SymIndefFactor factor_sym_indef(const SparseMatrix& A, const std::vector<Vector>& kernel) {
  return SymIndefFactor(A, kernel);
}

// ---------------------------------------------------------------------------
// Krylov solvers

namespace {

// Euclidean projector onto the orthogonal complement of the kernel vectors.
class Deflation {
 public:
  explicit Deflation(const std::vector<Vector>& z) {
    if (z.empty()) return;
    DenseMatrix Z(z[0].size(), z.size());
    for (size_t j = 0; j < z.size(); ++j) Z.col(j) = z[j];
    Eigen::HouseholderQR<DenseMatrix> qr(Z);
    Q_ = qr.householderQ() * DenseMatrix::Identity(Z.rows(), Z.cols());
  }
  void apply(Vector& x) const {
    if (Q_.size() == 0) return;
    x.noalias() -= Q_ * (Q_.transpose() * x);
  }

 private:
  DenseMatrix Q_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

KrylovResult cg(const LinearOperator& A, const LinearOperator& Pinv, const Vector& b, const KrylovOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const Deflation defl(opts.deflate);
  KrylovResult res;
  KrylovReport& rep = res.report;
  const Index n = b.size();
  res.x = Vector::Zero(n);
  Vector r = b;
  defl.apply(r);
  Vector z, q;
  auto precondition = [&](const Vector& in, Vector& out) {
    Vector tmp = in;
    defl.apply(tmp);
    Pinv(tmp, out);
    defl.apply(out);
  };
  precondition(r, z);
  double rho = r.dot(z);
  if (rho < 0) throw BreakdownError("cg: preconditioner is not positive");
  const double rho0 = rho;
  if (rho0 == 0.0) {
    rep.converged = true;
    rep.seconds = seconds_since(t0);
    return res;
  }
  rep.history.push_back(1.0);
  Vector p = z;
  double best = 1.0;
  for (int k = 1; k <= opts.maxit; ++k) {
    A(p, q);
    const double pq = p.dot(q);
    if (!(pq > 0)) throw BreakdownError("cg: non-positive curvature; operator is not SPD on the working subspace");
    const double alpha = rho / pq;
    res.x.noalias() += alpha * p;
    r.noalias() -= alpha * q;
    precondition(r, z);
    const double rho_new = r.dot(z);
    if (rho_new < 0) throw BreakdownError("cg: preconditioner is not positive");
    const double rel = std::sqrt(rho_new / rho0);
    rep.history.push_back(rel);
    rep.iterations = k;
    rep.relative_residual = rel;
    if (rel > 1.1 * best) rep.nonmonotone = true;
    best = std::min(best, rel);
    if (rel <= opts.tol) {
      rep.converged = true;
      break;
    }
    p = z + (rho_new / rho) * p;
    rho = rho_new;
  }
  defl.apply(res.x);
  rep.seconds = seconds_since(t0);
  return res;
}

KrylovResult minres(const LinearOperator& A, const LinearOperator& Pinv, const Vector& b, const KrylovOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const Deflation defl(opts.deflate);
  KrylovResult res;
  KrylovReport& rep = res.report;
  const Index n = b.size();
  res.x = Vector::Zero(n);
  auto precondition = [&](const Vector& in, Vector& out) {
    Vector tmp = in;
    defl.apply(tmp);
    Pinv(tmp, out);
    defl.apply(out);
  };
  Vector r1 = b;
  defl.apply(r1);
  Vector y;
  precondition(r1, y);
  double beta1 = r1.dot(y);
  if (beta1 < 0) throw BreakdownError("minres: preconditioner is not positive");
  beta1 = std::sqrt(beta1);
  if (beta1 == 0.0) {
    rep.converged = true;
    rep.seconds = seconds_since(t0);
    return res;
  }
  rep.history.push_back(1.0);
  Vector r2 = r1, v(n), w = Vector::Zero(n), w1(n), w2 = Vector::Zero(n);
  double oldb = 0, beta = beta1, dbar = 0, epsln = 0, phibar = beta1, cs = -1, sn = 0;
  for (int k = 1; k <= opts.maxit; ++k) {
    v = y / beta;
    A(v, y);
    defl.apply(y);
    if (k >= 2) y.noalias() -= (beta / oldb) * r1;
    const double alfa = v.dot(y);
    y.noalias() -= (alfa / beta) * r2;
    r1 = r2;
    r2 = y;
    precondition(r2, y);
    oldb = beta;
    const double bb = r2.dot(y);
    if (bb < 0) throw BreakdownError("minres: preconditioner is not positive");
    beta = std::sqrt(bb);
    const double oldeps = epsln;
    const double delta = cs * dbar + sn * alfa;
    const double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    const double gamma = std::hypot(gbar, beta);
    if (gamma == 0.0) throw BreakdownError("minres: singular tridiagonal system");
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar = sn * phibar;
    w1 = w2;
    w2 = w;
    w = (v - oldeps * w1 - delta * w2) / gamma;
    res.x.noalias() += phi * w;
    const double rel = phibar / beta1;
    rep.history.push_back(rel);
    rep.iterations = k;
    rep.relative_residual = rel;
    if (rel <= opts.tol) {
      rep.converged = true;
      break;
    }
    if (beta == 0.0) break;
  }
  defl.apply(res.x);
  rep.seconds = seconds_since(t0);
  return res;
}

void write_history_csv(std::ostream& out, const KrylovReport& report) {
  out << "iteration,residual\n";
  for (size_t i = 0; i < report.history.size(); ++i) out << i << ',' << report.history[i] << '\n';
}

// ---------------------------------------------------------------------------
// Eigenvalues

Vector generalized_eigs_dense(const DenseMatrix& A, const DenseMatrix& B, const std::vector<Vector>& kernel) {
  if (A.rows() != A.cols() || B.rows() != B.cols() || A.rows() != B.rows())
    throw InvalidArgument("generalized_eigs: dimension mismatch");
  const Index n = A.rows();
  Eigen::LLT<DenseMatrix> llt(B);
  if (llt.info() != Eigen::Success) throw NotSpdError("generalized_eigs: B is not symmetric positive definite");
  const DenseMatrix Linv = llt.matrixL().solve(DenseMatrix::Identity(n, n));
  DenseMatrix C = Linv * A * Linv.transpose();
  C = 0.5 * (C + C.transpose());
  const int r = static_cast<int>(kernel.size());
  if (r > 0) {
    DenseMatrix Y(n, r);
    for (int j = 0; j < r; ++j) Y.col(j) = llt.matrixU() * kernel[j];
    Eigen::HouseholderQR<DenseMatrix> qr(Y);
    const DenseMatrix Q = qr.householderQ() * DenseMatrix::Identity(n, r);
    const double sigma = 2.0 * C.cwiseAbs().rowwise().sum().maxCoeff() + 1.0;
    C.noalias() += sigma * Q * Q.transpose();
  }
  Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(C, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().head(n - r);
}

namespace {

using Apply = std::function<Vector(const Vector&)>;

struct Ritz {
  double min = 0, max = 0;
  int steps = 0;
};

// Lanczos with full reorthogonalization in the B inner product for a
// B-self-adjoint operator T. Returns the extreme Ritz values once their
// residuals drop below tol * max|theta|.
Ritz lanczos(const Apply& T, const SparseMatrix& B, const std::function<void(Vector&)>& project, Index n,
             Index space_dim, double tol, int max_steps, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vector q(n);
  for (Index i = 0; i < n; ++i) q(i) = dist(gen);
  project(q);
  Vector Bq = B * q;
  double nrm = std::sqrt(q.dot(Bq));
  if (!(nrm > 0)) throw Error("lanczos: empty search space");
  q /= nrm;
  Bq /= nrm;
  const int m_max = static_cast<int>(std::min<Index>(max_steps, space_dim));
  DenseMatrix Q(n, std::min(m_max, 64)), BQ(n, std::min(m_max, 64));
  std::vector<double> alpha, beta;
  Ritz out;
  for (int j = 0; j < m_max; ++j) {
    if (j >= Q.cols()) {
      const Index grow = std::min<Index>(m_max, 2 * Q.cols());
      Q.conservativeResize(Eigen::NoChange, grow);
      BQ.conservativeResize(Eigen::NoChange, grow);
    }
    Q.col(j) = q;
    BQ.col(j) = Bq;
    Vector w = T(q);
    project(w);
    const double a = w.dot(Bq);
    alpha.push_back(a);
    for (int pass = 0; pass < 2; ++pass) {
      const Vector c = BQ.leftCols(j + 1).transpose() * w;
      w.noalias() -= Q.leftCols(j + 1) * c;
    }
    Vector Bw = B * w;
    const double b = std::sqrt(std::max(0.0, w.dot(Bw)));
    const int m = j + 1;
    const int every = std::max(5, m / 10);
    const bool check = m == m_max || m % every == 0 || m <= 2;
    double scale = 0;
    if (check || b == 0.0) {
      Vector d = Eigen::Map<Vector>(alpha.data(), m);
      Vector e = Eigen::Map<Vector>(beta.data(), m - 1);
      Eigen::SelfAdjointEigenSolver<DenseMatrix> eig;
      eig.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
      const Vector& th = eig.eigenvalues();
      out.min = th(0);
      out.max = th(m - 1);
      out.steps = m;
      scale = std::max(std::abs(out.min), std::abs(out.max));
      const double r0 = b * std::abs(eig.eigenvectors()(m - 1, 0));
      const double r1 = b * std::abs(eig.eigenvectors()(m - 1, m - 1));
      if (b <= 1e-14 * scale || (r0 <= tol * scale && r1 <= tol * scale && m >= 3) || m == space_dim) return out;
    }
    beta.push_back(b);
    q = w / b;
    Bq = Bw / b;
  }
  return out;
}

}  // namespace

PencilExtremes pencil_extremes(const SparseMatrix& A, const SparseMatrix& B, const std::vector<Vector>& kernel,
                               const LanczosOptions& opts) {
  const Index n = A.rows();
  if (A.cols() != n || B.rows() != n || B.cols() != n) throw InvalidArgument("pencil_extremes: dimension mismatch");
  const SpdFactor Bf(B);
  const int r = static_cast<int>(kernel.size());
  DenseMatrix Z(n, r), BZ(n, r);
  for (int j = 0; j < r; ++j) {
    Z.col(j) = kernel[j];
    BZ.col(j) = B * kernel[j];
  }
  Eigen::LLT<DenseMatrix> G;
  if (r > 0) G.compute(Z.transpose() * BZ);
  auto project = [&](Vector& x) {
    if (r == 0) return;
    x.noalias() -= Z * G.solve(BZ.transpose() * x);
  };
  PencilExtremes pe;
  const Ritz fwd = lanczos([&](const Vector& x) { return Bf.solve(A * x); }, B, project, n, n - r, opts.tol,
                           opts.max_steps, opts.seed);
  pe.lambda_min = fwd.min;
  pe.lambda_max = fwd.max;
  pe.abs_max = std::max(std::abs(fwd.min), std::abs(fwd.max));
  pe.steps = fwd.steps;
  if (opts.abs_min) {
    Apply inv;
    std::shared_ptr<SpdFactor> spd;
    std::shared_ptr<SymIndefFactor> lu;
    if (r == 0 && fwd.min > 0) {
      try {
        spd = std::make_shared<SpdFactor>(A);
      } catch (const NotSpdError&) {
      }
    }
    if (spd) {
      inv = [spd, &B](const Vector& x) { return spd->solve(B * x); };
    } else {
      lu = std::make_shared<SymIndefFactor>(A, kernel);
      inv = [lu, &B](const Vector& x) { return lu->solve(B * x); };
    }
    const Ritz bwd = lanczos(inv, B, project, n, n - r, opts.tol, opts.max_steps, opts.seed + 1);
    pe.abs_min = 1.0 / std::max(std::abs(bwd.min), std::abs(bwd.max));
    pe.steps += bwd.steps;
  }
  return pe;
}

Vector generalized_eigs(const SparseMatrix& A, const SparseMatrix& B, EigMode mode, const std::vector<Vector>& kernel) {
  if (mode == EigMode::full) return generalized_eigs_dense(DenseMatrix(A), DenseMatrix(B), kernel);
  LanczosOptions o;
  o.abs_min = false;
  const PencilExtremes pe = pencil_extremes(A, B, kernel, o);
  Vector v(2);
  v << pe.lambda_min, pe.lambda_max;
  return v;
}

}  // namespace condensa
