#pragma once

#include "dpq2p1/fem_space.hpp"
#include "dpq2p1/material.hpp"
#include "dpq2p1/mesh.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <string>

namespace dpq2p1 {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Dead-load traction on the loaded boundary edges:
/// t(x) = (1 + eta |cos theta|) t n(x). RadialConstant is eta = 0.
struct TractionSpec {
  enum class Kind { RadialConstant, Modulated };
  Kind kind = Kind::RadialConstant;
  double magnitude = 0.0;
  double eta = 0.0;

  static TractionSpec radial(double t) { return {Kind::RadialConstant, t, 0.0}; }
  static TractionSpec modulated(double t, double eta) { return {Kind::Modulated, t, eta}; }

  /// Traction vector at a boundary point with outward unit normal n.
  Vec2 at(const Vec2& x, const Vec2& n) const;
};

/// Everything the element loops need besides the iterate itself.
struct Discretization {
  const Mesh* mesh = nullptr;
  const DofMap* dofs = nullptr;
  MaterialParams material;
  int quadrature_order = 3;
  /// Worker threads for element loops; results do not depend on it.
  int jobs = 1;
};

/// Iterate (u_h, p_h): nodal deformation values and pressure coefficients.
struct DiscreteState {
  Eigen::VectorXd u;
  Eigen::VectorXd p;
};

/// One Newton-step linear system
///
///   [ A  B^T  C^T ] [ w ]   [ f ]
///   [ B  0    0   ] [ q ] = [ g ]
///   [ C  0    0   ] [ m ]   [ 0 ]
///
/// with A from the linearised form a, B the pressure form b, and C the rows
/// of int v dx (and optionally int x ^ v dx) in the pure-traction case.
struct SaddleSystem {
  SparseMatrix A;
  SparseMatrix B;
  SparseMatrix C;
  Eigen::VectorXd f;
  Eigen::VectorXd g;
  /// Prescribed deformation dofs; their rows and columns are replaced by the
  /// identity in the assembled matrix.
  std::vector<bool> fixed;

  int num_u() const { return static_cast<int>(A.rows()); }
  int num_p() const { return static_cast<int>(B.rows()); }
  int num_constraints() const { return static_cast<int>(C.rows()); }
  int size() const { return num_u() + num_p() + num_constraints(); }

  SparseMatrix matrix() const;
  Eigen::VectorXd rhs() const;
};

SparseMatrix assemble_a(const Discretization& disc, const DiscreteState& state);
SparseMatrix assemble_b(const Discretization& disc, const DiscreteState& state);
/// Boundary work minus (dW/dF - p cof F) : grad v, i.e. the negative residual
/// of the discrete equilibrium equation.
Eigen::VectorXd assemble_f(const Discretization& disc, const DiscreteState& state,
                           const TractionSpec& traction);
/// g(q) = -int q (det grad u - 1).
Eigen::VectorXd assemble_g(const Discretization& disc, const DiscreteState& state);
/// Boundary work int t . v ds alone.
Eigen::VectorXd assemble_traction(const Discretization& disc, const TractionSpec& traction);
/// Rows of the mean-zero (and optional rotation) constraints.
SparseMatrix assemble_constraints(const Discretization& disc);

SaddleSystem assemble_system(const Discretization& disc, const DiscreteState& state,
                             const TractionSpec& traction);

/// E(u, p) = int W(grad u) - p (det grad u - 1) dx - int t . u ds.
double total_energy(const Discretization& disc, const DiscreteState& state,
                    const TractionSpec& traction);

/// Solution dump, `dpq2p1-sol v1` format.
std::string format_solution(const Mesh& mesh, const DiscreteState& state);

}  // namespace dpq2p1
