#pragma once

#include "dpq2p1/assembly.hpp"
#include "dpq2p1/cavitation.hpp"
#include "dpq2p1/newton.hpp"

#include <Eigen/Core>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace dpq2p1 {

struct ErrorReport {
  double h = 0.0;
  int deformation_dofs = 0;
  double energy_error = 0.0;      // |E(u_h) - E(u)|
  double w1s_seminorm = 0.0;      // |u_h - u|_{1,s}
  double det_l1 = 0.0;            // ||det grad u_h - 1||_{L1}
  double det_l2 = 0.0;            // ||det grad u_h - 1||_{L2}
  double pressure_l2 = 0.0;       // ||p_h - p||_{L2}
  double area = 0.0;
};

/// Reference solution a discrete state is measured against.
struct ReferenceSolution {
  std::function<Vec2(const Vec2&)> displacement;
  std::function<Mat2(const Vec2&)> gradient;
  std::function<double(const Vec2&)> pressure;
  double energy = 0.0;
  std::string label;
};

ReferenceSolution analytic_reference(const AnalyticCavitation& oracle);

/// Reference given by another discrete solution (typically on a finer mesh),
/// evaluated by point location. The caller keeps `disc` and `state` alive.
ReferenceSolution discrete_reference(const Discretization& disc, const DiscreteState& state,
                                     const TractionSpec& traction);

/// Element-wise quadrature of all error norms. `quadrature_order` should exceed
/// the assembly order; s is the material exponent. E(u_h) excludes the
/// multiplier term.
ErrorReport error_norms(const Discretization& disc, const DiscreteState& state,
                        const TractionSpec& traction, const ReferenceSolution& reference,
                        int quadrature_order);

/// Mean of |u_h| over the nodes on the cavity surface |x| = rho.
double deformed_inner_radius(const Mesh& mesh, const Eigen::VectorXd& u);

/// ||det grad u_h - 1|| in L1 and L2.
struct DetDefect {
  double l1 = 0.0;
  double l2 = 0.0;
};
DetDefect det_defect(const Discretization& disc, const Eigen::VectorXd& u, int quadrature_order);

struct InfSupReport {
  double beta = 0.0;
  double h = 0.0;
  std::string state;
  /// ||S q - beta^2 M_p q|| / ||S q|| for the extremal eigenpair.
  double eigen_residual = 0.0;
  int num_u = 0;
  int num_p = 0;
};

/// beta_h = sqrt(lambda_min(M_p^{-1} B M_u^{-1} B^T)) on the constrained
/// deformation space, M_u the H1 Gram matrix and M_p the pressure mass matrix.
/// Dense; intended for coarse meshes. Throws Error(EigenSolveFailed).
InfSupReport infsup_constant(const Discretization& disc, const DiscreteState& state,
                             const std::string& label = "");

/// Same constant as the smallest singular value of L_u^{-1} B^T L_p^{-T}
/// (Cholesky factors of the Gram matrices).
double infsup_constant_svd(const Discretization& disc, const DiscreteState& state);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct ConvergenceRow {
  ErrorReport errors;
  int layers = 0;
  int elements_per_layer = 0;
  int newton_iterations = 0;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  std::string reference_label;
  /// Slopes against h.
  double slope_dofs = 0.0;
  double slope_energy = 0.0;
  double slope_w1s = 0.0;
  double slope_det_l1 = 0.0;
  double slope_det_l2 = 0.0;
  double slope_pressure = 0.0;

  /// h, N_d, dE, W1s, detL1, detL2, pL2 rows, then a `slope` summary row.
  std::string to_csv() const;
};

struct MeshSpec {
  std::vector<Layer> layers;
  int elements_per_layer = 0;
  /// Nominal mesh size reported in place of the measured one when positive.
  double h = 0.0;
};

/// Every layer split in two, elements per layer doubled.
MeshSpec refine(const MeshSpec& spec);

struct StudyOptions {
  double rho = 0.01;
  double lambda = 2.0;
  TractionSpec::Kind traction_kind = TractionSpec::Kind::RadialConstant;
  double eta = 0.1;
  MaterialParams material;
  NewtonConfig newton;
  ContinuationOptions continuation;
  /// Quadrature order for error norms is newton.quadrature_order + this.
  int error_order_increment = 2;
  bool pin_rotation = false;
  int jobs = 1;
  /// Modulated traction only: mesh for the fine self-reference. When empty,
  /// the finest studied mesh with every layer halved and N doubled is used.
  std::optional<MeshSpec> reference_mesh;
};

/// Solves on every mesh by continuation and tabulates errors. For the radial
/// load the reference is the analytic solution; for the modulated load it is a
/// self-solution on a finer mesh. Requires at least two meshes (three for the
/// slope fits to be meaningful).
ConvergenceTable convergence_study(const std::vector<MeshSpec>& meshes,
                                   const StudyOptions& options);

}  // namespace dpq2p1
