#pragma once

#include "dpq2p1/basis.hpp"
#include "dpq2p1/mesh.hpp"
#include "dpq2p1/quadrature.hpp"

#include <Eigen/Core>

#include <array>
#include <functional>
#include <vector>

namespace dpq2p1 {

/// Chain rule grad_x phi = (dx/dxhat)^{-T} grad_xhat phi for each function.
/// Throws Error(SingularGeometryJacobian) when det(dx/dxhat) <= 0.
std::array<Vec2, 9> physical_gradient(const Element& element, const Vec2& xhat,
                                      const std::array<Vec2, 9>& reference_gradients);

/// Geometry and Q2 basis data at one reference point of one element.
struct PointGeometry {
  Vec2 x = Vec2::Zero();
  Mat2 jacobian = Mat2::Identity();
  double det = 0.0;
  std::array<double, 9> phi{};
  std::array<Vec2, 9> grad_phi{};  // physical gradients
};

PointGeometry point_geometry(const Element& element, const Vec2& xhat);

/// Physical Hessians of the nine Q2 functions, including the curvature terms
/// of the geometry map.
std::array<Mat2, 9> physical_hessians(const Element& element, const Vec2& xhat);

enum class BoundaryKind { PureTraction, Dirichlet };

struct BoundaryConditions {
  BoundaryKind kind = BoundaryKind::PureTraction;
  /// Nodes whose deformation is prescribed (Dirichlet only).
  std::vector<int> dirichlet_nodes;
  /// Adds the row  int x ^ v dx = 0  to the mean-zero rows (pure traction only).
  bool pin_rotation = false;
};

/// Global numbering for the DP-Q2-P1 pair.
///
/// Deformation dof of (node, component) is 2 node + component. Pressure dofs
/// are the coefficients of {1, xhat1, xhat2} on each element, numbered
/// 3 element + k. Constraint multipliers, when active, follow.
struct DofMap {
  int num_nodes = 0;
  int num_elements = 0;
  int num_u = 0;
  int num_p = 0;
  int num_constraints = 0;
  BoundaryKind boundary = BoundaryKind::PureTraction;
  bool pin_rotation = false;
  std::vector<bool> fixed;  // per deformation dof
  int num_free_u = 0;

  /// Deformation degrees of freedom N_d, excluding pressure and constraints.
  int deformation_dofs() const { return num_u; }
  int total() const { return num_u + num_p + num_constraints; }

  int u_index(int node, int component) const { return 2 * node + component; }
  int p_index(int element, int k) const { return 3 * element + k; }
  int element_u_index(const Element& element, int local_node, int component) const {
    return u_index(element.node_ids[local_node], component);
  }
};

DofMap build_dof_map(const Mesh& mesh, const BoundaryConditions& bc = {});

/// Nodal Q2 interpolant of a vector field.
Eigen::VectorXd interpolate(const Mesh& mesh, const std::function<Vec2(const Vec2&)>& field);

/// Element-wise L2 projection of a scalar field onto {1, xhat1, xhat2}.
Eigen::VectorXd project_pressure(const Mesh& mesh,
                                 const std::function<double(const Vec2&)>& field,
                                 int quadrature_order = 5);

/// Deformation u_h and its physical gradient at a reference point.
struct FieldValue {
  Vec2 u = Vec2::Zero();
  Mat2 grad = Mat2::Zero();
};

FieldValue evaluate_u(const Element& element, const PointGeometry& geometry,
                      const Eigen::VectorXd& u);
double evaluate_p(int element, const Vec2& xhat, const Eigen::VectorXd& p);

}  // namespace dpq2p1
