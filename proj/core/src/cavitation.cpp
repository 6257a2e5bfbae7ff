#include "dpq2p1/cavitation.hpp"

#include "dpq2p1/error.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <numbers>
#include <string>

namespace dpq2p1 {

namespace {

// 30-point Gauss-Legendre on pieces [a 2^k, a 2^(k+1)]. The integrands are
// analytic with singularities at distance ~sqrt(lambda^2 - 1) from the real
// axis, so each piece is integrated to rounding.
template <class F>
double integrate(F&& f, double a, double b) {
  if (!(b > a)) return 0.0;
  double total = 0.0;
  double lo = a;
  while (lo < b) {
    const double hi = std::min(b, lo * 2.0);
    total += boost::math::quadrature::gauss<double, 30>::integrate(f, lo, hi);
    lo = hi;
  }
  return total;
}

}  // namespace

AnalyticCavitation::AnalyticCavitation(double rho, double lambda, MaterialParams material)
    : rho_(rho), lambda_(lambda), material_(material) {
  if (!(rho > 0.0 && rho < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "cavity radius must lie in (0, 1)");
  }
  if (!(lambda >= 1.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be >= 1");
  material_.validate();
}

double AnalyticCavitation::radial_map(double R) const {
  return std::sqrt(R * R + lambda_ * lambda_ - 1.0);
}

Vec2 AnalyticCavitation::displacement(const Vec2& x) const {
  const double R = x.norm();
  if (R < rho_ * (1.0 - 1e-12)) {
    throw Error(ErrorCode::InsideDefect, "point inside the cavity");
  }
  return (radial_map(R) / R) * x;
}

Mat2 AnalyticCavitation::gradient(const Vec2& x) const {
  const double R = x.norm();
  if (R < rho_ * (1.0 - 1e-12)) {
    throw Error(ErrorCode::InsideDefect, "point inside the cavity");
  }
  const double f = radial_map(R);
  // grad u = (f/R) I + d(f/R)/dR x x^T / R with d(f/R)/dR = -(lambda^2 - 1)/(f R^2).
  const double k = (lambda_ * lambda_ - 1.0) / (f * R * R * R);
  return (f / R) * Mat2::Identity() - k * (x * x.transpose());
}

double AnalyticCavitation::integrand(double R) const {
  const double f = radial_map(R);
  const double lr = R / f;
  const double lt = f / R;
  const double norm = std::hypot(lr, lt);
  const double iso = 0.5 * material_.mu * material_.s * std::pow(norm, material_.s - 2.0);
  return iso * (lt * lt - lr * lr) * R / (f * f);
}

double AnalyticCavitation::radial_cauchy_stress(double R) const {
  return integrate([this](double r) { return integrand(r); }, rho_, R);
}

double AnalyticCavitation::pressure(double R) const {
  if (R < rho_ * (1.0 - 1e-12) || R > 1.0 + 1e-12) {
    throw Error(ErrorCode::OutOfRange, "radius outside [rho, 1]");
  }
  const double f = radial_map(R);
  const double lr = R / f;
  const double lt = f / R;
  const double norm = std::hypot(lr, lt);
  const double iso = 0.5 * material_.mu * material_.s * std::pow(norm, material_.s - 2.0);
  // T_rr = iso lr^2 - (p + 1) on det F = 1.
  return iso * lr * lr - radial_cauchy_stress(R) - 1.0;
}

double AnalyticCavitation::traction() const {
  // Dead load S_rr = T_rr / lambda_r with lambda_r(1) = 1 / lambda.
  return lambda_ * radial_cauchy_stress(1.0);
}

double AnalyticCavitation::energy() const {
  const double stored = integrate(
      [this](double R) {
        const double f = radial_map(R);
        const double n2 = (R / f) * (R / f) + (f / R) * (f / R);
        return (0.5 * material_.mu * std::pow(n2, 0.5 * material_.s) + 1.0) * R;
      },
      rho_, 1.0);
  return 2.0 * std::numbers::pi * (stored - traction() * lambda_);
}

double traction_for(double rho, double lambda, const MaterialParams& material) {
  if (!(rho > 0.0)) throw Error(ErrorCode::InvalidArgument, "rho must be positive");
  if (!(lambda > 1.0)) throw Error(ErrorCode::InvalidArgument, "lambda must exceed 1");
  return AnalyticCavitation(rho, lambda, material).traction();
}

double lambda_for_traction(double rho, double t, const MaterialParams& material) {
  double lo = 1.0;
  double hi = 2.0;
  while (AnalyticCavitation(rho, hi, material).traction() < t) {
    hi *= 2.0;
    if (hi > 1e6) throw Error(ErrorCode::OutOfRange, "traction beyond the analytic family");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (AnalyticCavitation(rho, mid, material).traction() < t ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace dpq2p1
