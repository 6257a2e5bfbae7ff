#pragma once

#include "dpq2p1/material.hpp"
#include "dpq2p1/quadrature.hpp"

namespace dpq2p1 {

/// Radially symmetric incompressible family u(x) = f(R)/R x with
/// f(R) = sqrt(R^2 + lambda^2 - 1), on the annulus rho <= R <= 1.
///
/// The multiplier p and the dead load t follow from radial equilibrium: in the
/// deformed frame the Cauchy stress satisfies dT_rr/dr = (T_tt - T_rr)/r, and
/// on det F = 1 the deviatoric part T_tt - T_rr depends only on the stretches,
/// so T_rr is a quadrature from the traction-free cavity. The integrals are
/// evaluated by composite 30-point Gauss-Legendre on dyadic pieces of [rho, R].
class AnalyticCavitation {
 public:
  /// Requires rho in (0, 1) and lambda >= 1.
  AnalyticCavitation(double rho, double lambda, MaterialParams material = {});

  double rho() const { return rho_; }
  double lambda() const { return lambda_; }
  const MaterialParams& material() const { return material_; }

  /// f(R) = sqrt(R^2 + lambda^2 - 1).
  double radial_map(double R) const;

  /// Throws Error(InsideDefect) for |x| < rho (with 1e-12 relative slack).
  Vec2 displacement(const Vec2& x) const;
  Mat2 gradient(const Vec2& x) const;

  /// Radial Cauchy stress T_rr at reference radius R, zero at R = rho.
  double radial_cauchy_stress(double R) const;
  /// Multiplier p(R). Throws Error(OutOfRange) for R outside [rho, 1].
  double pressure(double R) const;
  /// Dead-load magnitude t such that S n = t n on R = 1.
  double traction() const;
  /// E(u) = int W(grad u) dx - int t . u ds (the multiplier term vanishes).
  double energy() const;

 private:
  double rho_;
  double lambda_;
  MaterialParams material_;
  double integrand(double R) const;
};

inline Vec2 analytic_u(const AnalyticCavitation& oracle, const Vec2& x) {
  return oracle.displacement(x);
}
inline Mat2 analytic_grad(const AnalyticCavitation& oracle, const Vec2& x) {
  return oracle.gradient(x);
}
inline double analytic_pressure(const AnalyticCavitation& oracle, double R) {
  return oracle.pressure(R);
}

/// t_{rho, lambda}: the dead load that holds the analytic state in equilibrium.
double traction_for(double rho, double lambda, const MaterialParams& material = {});

/// Stretch parameter lambda whose equilibrium load equals t (bisection).
double lambda_for_traction(double rho, double t, const MaterialParams& material = {});

}  // namespace dpq2p1
