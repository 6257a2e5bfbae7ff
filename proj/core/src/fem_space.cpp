#include "dpq2p1/fem_space.hpp"

#include "dpq2p1/error.hpp"

#include <Eigen/Dense>

#include <string>

namespace dpq2p1 {

std::array<Vec2, 9> physical_gradient(const Element& element, const Vec2& xhat,
                                      const std::array<Vec2, 9>& reference_gradients) {
  const MapJacobian jac = element.map.jacobian(xhat);
  if (!(jac.det > 0.0)) {
    throw Error(ErrorCode::SingularGeometryJacobian, "det(dx/dxhat) <= 0 at a quadrature point");
  }
  const Mat2 inv_t = jac.matrix.inverse().transpose();
  std::array<Vec2, 9> out{};
  for (int k = 0; k < 9; ++k) out[k] = inv_t * reference_gradients[k];
  return out;
}

PointGeometry point_geometry(const Element& element, const Vec2& xhat) {
  PointGeometry g;
  const MapJacobian jac = element.map.jacobian(xhat);
  if (!(jac.det > 0.0)) {
    throw Error(ErrorCode::SingularGeometryJacobian, "det(dx/dxhat) <= 0 at a quadrature point");
  }
  g.x = element.map.eval(xhat);
  g.jacobian = jac.matrix;
  g.det = jac.det;
  g.phi = ReferenceBasisQ2::values(xhat);
  const Mat2 inv_t = jac.matrix.inverse().transpose();
  const auto ref = ReferenceBasisQ2::gradients(xhat);
  for (int k = 0; k < 9; ++k) g.grad_phi[k] = inv_t * ref[k];
  return g;
}

std::array<Mat2, 9> physical_hessians(const Element& element, const Vec2& xhat) {
  // phi(xhat) = psi(x(xhat)) gives G^T H_psi G = H_phi - sum_k (grad_x psi)_k H(x_k).
  const MapJacobian jac = element.map.jacobian(xhat);
  if (!(jac.det > 0.0)) {
    throw Error(ErrorCode::SingularGeometryJacobian, "det(dx/dxhat) <= 0 at a quadrature point");
  }
  const Mat2 K = jac.matrix.inverse();
  const auto map_h = element.map.hessian(xhat);
  const auto ref_g = ReferenceBasisQ2::gradients(xhat);
  const auto ref_h = ReferenceBasisQ2::hessians(xhat);
  std::array<Mat2, 9> out{};
  for (int k = 0; k < 9; ++k) {
    const Vec2 gx = K.transpose() * ref_g[k];
    const Mat2 corrected = ref_h[k] - gx.x() * map_h[0] - gx.y() * map_h[1];
    out[k] = K.transpose() * corrected * K;
  }
  return out;
}

DofMap build_dof_map(const Mesh& mesh, const BoundaryConditions& bc) {
  DofMap dofs;
  dofs.num_nodes = mesh.num_nodes();
  dofs.num_elements = mesh.num_elements();
  dofs.num_u = 2 * dofs.num_nodes;
  dofs.num_p = 3 * dofs.num_elements;
  dofs.boundary = bc.kind;
  dofs.fixed.assign(dofs.num_u, false);
  if (bc.kind == BoundaryKind::PureTraction) {
    dofs.pin_rotation = bc.pin_rotation;
    dofs.num_constraints = bc.pin_rotation ? 3 : 2;
  } else {
    for (int node : bc.dirichlet_nodes) {
      if (node < 0 || node >= dofs.num_nodes) {
        throw Error(ErrorCode::InvalidArgument, "Dirichlet node " + std::to_string(node) +
                                                    " out of range");
      }
      dofs.fixed[dofs.u_index(node, 0)] = true;
      dofs.fixed[dofs.u_index(node, 1)] = true;
    }
  }
  dofs.num_free_u = 0;
  for (bool f : dofs.fixed) dofs.num_free_u += f ? 0 : 1;
  return dofs;
}

Eigen::VectorXd interpolate(const Mesh& mesh, const std::function<Vec2(const Vec2&)>& field) {
  Eigen::VectorXd u(2 * mesh.num_nodes());
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    const Vec2 v = field(mesh.nodes[i]);
    u(2 * i) = v.x();
    u(2 * i + 1) = v.y();
  }
  return u;
}

Eigen::VectorXd project_pressure(const Mesh& mesh,
                                 const std::function<double(const Vec2&)>& field,
                                 int quadrature_order) {
  const QuadratureRule rule = gauss_rule(quadrature_order);
  Eigen::VectorXd p(3 * mesh.num_elements());
  for (int ie = 0; ie < mesh.num_elements(); ++ie) {
    const Element& e = mesh.elements[ie];
    Eigen::Matrix3d mass = Eigen::Matrix3d::Zero();
    Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Vec2& xhat = rule.points[q];
      const double w = rule.weights[q] * e.map.jacobian(xhat).det;
      const auto psi = ReferenceBasisP1::values(xhat);
      const double value = field(e.map.eval(xhat));
      for (int a = 0; a < 3; ++a) {
        rhs(a) += w * value * psi[a];
        for (int b = 0; b < 3; ++b) mass(a, b) += w * psi[a] * psi[b];
      }
    }
    p.segment<3>(3 * ie) = mass.ldlt().solve(rhs);
  }
  return p;
}

FieldValue evaluate_u(const Element& element, const PointGeometry& geometry,
                      const Eigen::VectorXd& u) {
  FieldValue v;
  for (int k = 0; k < 9; ++k) {
    const int node = element.node_ids[k];
    const Vec2 uk{u(2 * node), u(2 * node + 1)};
    v.u += geometry.phi[k] * uk;
    v.grad += uk * geometry.grad_phi[k].transpose();
  }
  return v;
}

double evaluate_p(int element, const Vec2& xhat, const Eigen::VectorXd& p) {
  return p(3 * element) + p(3 * element + 1) * xhat.x() + p(3 * element + 2) * xhat.y();
}

}  // namespace dpq2p1
