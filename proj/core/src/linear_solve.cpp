#include "dpq2p1/error.hpp"
#include "dpq2p1/newton.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <string>

namespace dpq2p1 {

namespace {

double backward_error(const SparseMatrix& K, const Eigen::VectorXd& x, const Eigen::VectorXd& b) {
  const Eigen::VectorXd r = K * x - b;
  double knorm = 0.0;
  for (int j = 0; j < K.outerSize(); ++j) {
    for (SparseMatrix::InnerIterator it(K, j); it; ++it) knorm = std::max(knorm, std::abs(it.value()));
  }
  const double scale = knorm * x.lpNorm<Eigen::Infinity>() + b.lpNorm<Eigen::Infinity>();
  return scale > 0.0 ? r.lpNorm<Eigen::Infinity>() / scale : 0.0;
}

Increment split(const SaddleSystem& system, const Eigen::VectorXd& x, double residual) {
  Increment inc;
  inc.w = x.head(system.num_u());
  inc.p = x.segment(system.num_u(), system.num_p());
  inc.multipliers = x.tail(system.num_constraints());
  inc.relative_residual = residual;
  return inc;
}

constexpr double kResidualTolerance = 1e-10;

using SparseLUSolver = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>;

void factorize(SparseLUSolver& lu, const SparseMatrix& K) {
  lu.analyzePattern(K);
  lu.factorize(K);
  if (lu.info() != Eigen::Success) {
    throw Error(ErrorCode::SingularMatrix, "sparse LU failed: " + lu.lastErrorMessage());
  }
}

// Pure-traction systems. A and B annihilate rigid translations, so the sparse
// block [A B^T; B 0] is factorised with the two dofs of node 0 removed, and the
// dense constraint rows D are recovered through a (k+2)x(k+2) bordered system
// for the multipliers m and the translation part a:
//   (D T)^T m = T^T r1,   -D_f Y m + (D T) a = r2 - D_f z,
// with Y = K_ff^{-1} D_f^T and z = K_ff^{-1} r1_f.
class BorderedSolver {
 public:
  explicit BorderedSolver(const SaddleSystem& system)
      : nu_(system.num_u()), n_(system.num_u() + system.num_p()), k_(system.num_constraints()) {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(system.A.nonZeros() + 2 * system.B.nonZeros());
    for (int j = 0; j < system.A.outerSize(); ++j) {
      for (SparseMatrix::InnerIterator it(system.A, j); it; ++it) {
        if (it.row() >= kPinned && it.col() >= kPinned) {
          trip.emplace_back(it.row() - kPinned, it.col() - kPinned, it.value());
        }
      }
    }
    for (int j = 0; j < system.B.outerSize(); ++j) {
      for (SparseMatrix::InnerIterator it(system.B, j); it; ++it) {
        if (it.col() < kPinned) continue;
        const int r = nu_ + static_cast<int>(it.row()) - kPinned;
        const int c = static_cast<int>(it.col()) - kPinned;
        trip.emplace_back(r, c, it.value());
        trip.emplace_back(c, r, it.value());
      }
    }
    SparseMatrix K(n_ - kPinned, n_ - kPinned);
    K.setFromTriplets(trip.begin(), trip.end());
    K.makeCompressed();
    factorize(lu_, K);

    const Eigen::MatrixXd C(system.C);
    Df_ = Eigen::MatrixXd::Zero(k_, n_ - kPinned);
    Df_.leftCols(nu_ - kPinned) = C.rightCols(nu_ - kPinned);
    DT_ = Eigen::MatrixXd::Zero(k_, 2);
    for (int i = 0; i < nu_; ++i) DT_.col(i % 2) += C.col(i);

    Y_ = lu_.solve(Eigen::MatrixXd(Df_.transpose()));
    if (!Y_.allFinite()) throw Error(ErrorCode::SingularMatrix, "sparse LU produced non-finite values");
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(k_ + 2, k_ + 2);
    M.topLeftCorner(2, k_) = DT_.transpose();
    M.bottomLeftCorner(k_, k_) = -Df_ * Y_;
    M.bottomRightCorner(k_, 2) = DT_;
    border_.compute(M);
    border_.setThreshold(1e-12);
    if (!border_.isInvertible()) {
      throw Error(ErrorCode::SingularMatrix, "bordered system is singular");
    }
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    const Eigen::VectorXd r1 = b.head(n_);
    const Eigen::VectorXd z = lu_.solve(Eigen::VectorXd(r1.tail(n_ - kPinned)));
    Eigen::VectorXd rhs(k_ + 2);
    rhs(0) = rhs(1) = 0.0;
    for (int i = 0; i < nu_; ++i) rhs(i % 2) += r1(i);
    rhs.tail(k_) = b.tail(k_) - Df_ * z;
    const Eigen::VectorXd ma = border_.solve(rhs);
    const Eigen::VectorXd m = ma.head(k_);

    Eigen::VectorXd x(n_ + k_);
    x(0) = x(1) = 0.0;
    x.segment(kPinned, n_ - kPinned) = z - Y_ * m;
    for (int i = 0; i < nu_; ++i) x(i) += ma(k_ + i % 2);
    x.tail(k_) = m;
    return x;
  }

 private:
  static constexpr int kPinned = 2;
  int nu_;
  int n_;
  int k_;
  SparseLUSolver lu_;
  Eigen::MatrixXd Df_;
  Eigen::MatrixXd DT_;
  Eigen::MatrixXd Y_;
  Eigen::FullPivLU<Eigen::MatrixXd> border_;
};

template <class Solve>
Increment refine(const SaddleSystem& system, const SparseMatrix& K, const Eigen::VectorXd& b,
                 const Solve& solve) {
  Eigen::VectorXd x = solve(b);
  if (!x.allFinite()) throw Error(ErrorCode::SingularMatrix, "sparse LU produced non-finite values");
  double err = backward_error(K, x, b);
  for (int it = 0; it < 3 && err > 1e-14; ++it) {
    x += solve(Eigen::VectorXd(b - K * x));
    err = backward_error(K, x, b);
  }
  if (!(err <= kResidualTolerance)) {
    throw Error(ErrorCode::LinearSolveFailed,
                "relative residual " + std::to_string(err) + " above 1e-10");
  }
  return split(system, x, err);
}

}  // namespace

Increment linear_solve(const SaddleSystem& system) {
  SparseMatrix K = system.matrix();
  K.makeCompressed();
  const Eigen::VectorXd b = system.rhs();

  if (system.num_constraints() > 0) {
    const Eigen::MatrixXd C(system.C);
    Eigen::FullPivLU<Eigen::MatrixXd> gram(C * C.transpose());
    gram.setThreshold(1e-12);
    if (gram.rank() < system.num_constraints()) {
      throw Error(ErrorCode::SingularMatrix, "constraint rows are linearly dependent");
    }
  }
  const bool any_fixed = std::find(system.fixed.begin(), system.fixed.end(), true) != system.fixed.end();
  if (system.num_constraints() > 0 && !any_fixed && system.num_u() > 2) {
    // K_ff is singular when rotations also lie in the kernel of A and B
    // (stress-free states); the full factorisation handles that case.
    try {
      const BorderedSolver solver(system);
      return refine(system, K, b, [&](const Eigen::VectorXd& r) { return solver.solve(r); });
    } catch (const Error&) {
    }
  }
  SparseLUSolver lu;
  factorize(lu, K);
  return refine(system, K, b, [&](const Eigen::VectorXd& r) { return Eigen::VectorXd(lu.solve(r)); });
}

Increment linear_solve_dense(const SaddleSystem& system) {
  const SparseMatrix K = system.matrix();
  const Eigen::MatrixXd dense(K);
  const Eigen::VectorXd b = system.rhs();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(dense);
  if (!lu.isInvertible()) throw Error(ErrorCode::SingularMatrix, "dense LU: matrix is singular");
  const Eigen::VectorXd x = lu.solve(b);
  return split(system, x, backward_error(K, x, b));
}

}  // namespace dpq2p1
