#pragma once

#include "dpq2p1/assembly.hpp"
#include "dpq2p1/error.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace dpq2p1 {

struct NewtonConfig {
  double alpha0 = 1.0;
  double tol_u = 1e-8;
  double tol_p = 1e-8;
  /// Principal stretches must lie in [sigma, 1/sigma].
  double sigma = 0.5;
  /// det grad u must lie in [det_min, det_max].
  double det_min = 1e-2;
  double det_max = 1e2;
  /// Bound on h_T |u_h|_{2,inf,T}.
  double c2_bound = 1e3;
  double alpha_min = 1e-6;
  int max_iter = 50;
  int quadrature_order = 3;

  /// Throws Error(InvalidArgument) when the constants are out of range.
  void validate() const;
};

/// Outcome of an admissibility check with the first violation, if any.
struct CriterionResult {
  bool pass = true;
  int element = -1;
  int point = -1;
  std::string quantity;
  double value = 0.0;
  /// Extremes over all quadrature points (C1) or elements (C2).
  double min_det = 0.0;
  double max_det = 0.0;
  double min_sv = 0.0;
  double max_sv = 0.0;
  double max_scaled_hessian = 0.0;
};

/// Singular values of grad u_h in [sigma, 1/sigma] and det in [c, C] at every
/// quadrature point.
CriterionResult check_c1(const Discretization& disc, const Eigen::VectorXd& u, double sigma,
                         double det_min, double det_max);
/// h_T max|d^2 u_h / dx dx| <= c2_bound on every element.
CriterionResult check_c2(const Discretization& disc, const Eigen::VectorXd& u, double c2_bound);

/// Singular values (ascending) of a 2x2 matrix.
Eigen::Vector2d singular_values(const Mat2& F);

struct NewtonIteration {
  int iter = 0;
  double alpha = 0.0;
  int halvings = 0;
  double res_u = 0.0;
  double res_p = 0.0;
  double inc_u = 0.0;
  double inc_p = 0.0;
  double min_det = 0.0;
  double max_det = 0.0;
  double min_sv = 0.0;
  double max_sv = 0.0;
  double energy = 0.0;
  /// False only for a final row whose step was rejected at the damping floor;
  /// its alpha is the last value tried and the state columns are zero.
  bool accepted = true;
};

struct NewtonTrace {
  std::vector<NewtonIteration> iterations;
  bool converged = false;

  /// CSV with columns iter, alpha, halvings, res_u, res_p, inc_u, inc_p,
  /// min_det, max_det, min_sv, max_sv, energy.
  std::string to_csv() const;
};

class NewtonError : public Error {
 public:
  NewtonError(ErrorCode code, const std::string& detail, NewtonTrace trace, int step = -1)
      : Error(code, detail), trace_(std::move(trace)), step_(step) {}

  const NewtonTrace& trace() const { return trace_; }
  /// Continuation step that failed, or -1 outside continuation.
  int step() const { return step_; }

 private:
  NewtonTrace trace_;
  int step_;
};

struct Increment {
  Eigen::VectorXd w;
  Eigen::VectorXd p;
  Eigen::VectorXd multipliers;
  double relative_residual = 0.0;
};

/// Sparse LU solve of the saddle system. Throws Error(SingularMatrix) when the
/// factorisation fails and Error(LinearSolveFailed) when the relative residual
/// exceeds 1e-10.
Increment linear_solve(const SaddleSystem& system);
/// Dense LU solve, for cross-checking.
Increment linear_solve_dense(const SaddleSystem& system);

struct NewtonResult {
  DiscreteState state;
  NewtonTrace trace;
};

/// Damped Newton iteration: solve for (w, q), try u + alpha w and halve alpha
/// until (C1)-(C2) hold, stop when both increments are below tolerance,
/// otherwise alpha = min(alpha0, 2 alpha). Throws NewtonError.
NewtonResult newton_solve(const Discretization& disc, const DiscreteState& initial,
                          const TractionSpec& traction, const NewtonConfig& config);

struct ContinuationOptions {
  int steps = 8;
  /// Stretch parameter of the analytic map used as initial guess and initial load.
  double lambda0 = 1.2;
};

struct ContinuationResult {
  DiscreteState state;
  std::vector<NewtonTrace> traces;
  std::vector<double> loads;
};

/// Ramps the traction magnitude linearly from t(rho, lambda0) to the target in
/// `steps` solves, each warm-started from the previous one. The first solve
/// starts from the interpolated analytic state at lambda0.
ContinuationResult continuation_solve(const Discretization& disc, const TractionSpec& target,
                                      const ContinuationOptions& options,
                                      const NewtonConfig& config);

}  // namespace dpq2p1
