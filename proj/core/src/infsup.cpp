#include "dpq2p1/verify.hpp"

#include "dpq2p1/error.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>

namespace dpq2p1 {

namespace {

struct ReducedOperators {
  Eigen::MatrixXd Mu;  // H1 Gram on the constrained space
  Eigen::MatrixXd B;   // pressure form on the constrained space
  Eigen::MatrixXd Mp;  // pressure mass
};

Eigen::MatrixXd h1_gram(const Discretization& disc) {
  const Mesh& mesh = *disc.mesh;
  const QuadratureRule rule = gauss_rule(disc.quadrature_order);
  const int n = 2 * mesh.num_nodes();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  for (const Element& e : mesh.elements) {
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const PointGeometry geo = point_geometry(e, rule.points[q]);
      const double w = rule.weights[q] * geo.det;
      for (int a = 0; a < 9; ++a) {
        for (int b = 0; b < 9; ++b) {
          const double v = w * (geo.phi[a] * geo.phi[b] + geo.grad_phi[a].dot(geo.grad_phi[b]));
          for (int c = 0; c < 2; ++c) M(2 * e.node_ids[a] + c, 2 * e.node_ids[b] + c) += v;
        }
      }
    }
  }
  return M;
}

Eigen::MatrixXd pressure_mass(const Discretization& disc) {
  const Mesh& mesh = *disc.mesh;
  const QuadratureRule rule = gauss_rule(disc.quadrature_order);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(3 * mesh.num_elements(), 3 * mesh.num_elements());
  for (int ie = 0; ie < mesh.num_elements(); ++ie) {
    const Element& e = mesh.elements[ie];
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Vec2& xhat = rule.points[q];
      const double w = rule.weights[q] * e.map.jacobian(xhat).det;
      const auto psi = ReferenceBasisP1::values(xhat);
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) M(3 * ie + a, 3 * ie + b) += w * psi[a] * psi[b];
      }
    }
  }
  return M;
}

// Orthonormal basis of {v : v_fixed = 0, C v = 0}.
Eigen::MatrixXd constrained_basis(const Discretization& disc) {
  const DofMap& dofs = *disc.dofs;
  std::vector<int> free;
  for (int i = 0; i < dofs.num_u; ++i) {
    if (!dofs.fixed[i]) free.push_back(i);
  }
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(dofs.num_u, static_cast<int>(free.size()));
  for (std::size_t k = 0; k < free.size(); ++k) P(free[k], static_cast<int>(k)) = 1.0;
  if (dofs.num_constraints == 0) return P;

  const Eigen::MatrixXd Ct = (Eigen::MatrixXd(assemble_constraints(disc)) * P).transpose();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Ct);
  const Eigen::MatrixXd Q = qr.householderQ();
  const int r = static_cast<int>(Ct.cols());
  return P * Q.rightCols(Q.cols() - r);
}

ReducedOperators reduce(const Discretization& disc, const DiscreteState& state) {
  if (disc.mesh == nullptr || disc.dofs == nullptr) {
    throw Error(ErrorCode::InvalidArgument, "inf-sup probe needs a mesh and a dof map");
  }
  const Eigen::MatrixXd Z = constrained_basis(disc);
  ReducedOperators ops;
  ops.Mu = Z.transpose() * h1_gram(disc) * Z;
  ops.B = Eigen::MatrixXd(assemble_b(disc, state)) * Z;
  ops.Mp = pressure_mass(disc);
  return ops;
}

}  // namespace

InfSupReport infsup_constant(const Discretization& disc, const DiscreteState& state,
                             const std::string& label) {
  const ReducedOperators ops = reduce(disc, state);
  Eigen::LLT<Eigen::MatrixXd> mu(ops.Mu);
  if (mu.info() != Eigen::Success) {
    throw Error(ErrorCode::EigenSolveFailed, "H1 Gram matrix is not positive definite");
  }
  const Eigen::MatrixXd S = ops.B * mu.solve(ops.B.transpose());
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(S, ops.Mp);
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorCode::EigenSolveFailed, "generalized eigenproblem did not converge");
  }
  const double lambda_min = eig.eigenvalues()(0);
  const Eigen::VectorXd q = eig.eigenvectors().col(0);
  const Eigen::VectorXd Sq = S * q;

  InfSupReport report;
  report.beta = std::sqrt(std::max(lambda_min, 0.0));
  report.h = disc.mesh->h;
  report.state = label;
  report.eigen_residual = (Sq - lambda_min * ops.Mp * q).norm() / std::max(Sq.norm(), 1e-300);
  report.num_u = static_cast<int>(ops.Mu.rows());
  report.num_p = static_cast<int>(ops.Mp.rows());
  if (!std::isfinite(report.beta)) {
    throw Error(ErrorCode::EigenSolveFailed, "non-finite inf-sup constant");
  }
  return report;
}

double infsup_constant_svd(const Discretization& disc, const DiscreteState& state) {
  const ReducedOperators ops = reduce(disc, state);
  Eigen::LLT<Eigen::MatrixXd> lu(ops.Mu);
  Eigen::LLT<Eigen::MatrixXd> lp(ops.Mp);
  if (lu.info() != Eigen::Success || lp.info() != Eigen::Success) {
    throw Error(ErrorCode::EigenSolveFailed, "Gram matrix is not positive definite");
  }
  // L_p^{-1} B L_u^{-T}
  Eigen::MatrixXd X = lp.matrixL().solve(ops.B);
  X = lu.matrixL().solve(X.transpose()).transpose();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(X);
  return svd.singularValues().minCoeff();
}

}  // namespace dpq2p1
