#include "dpq2p1/quadrature.hpp"

#include "dpq2p1/error.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <utility>

namespace dpq2p1 {

namespace {

// P_n(x) and P_n'(x) by the three-term recurrence.
std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0;
  double p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = pk;
  }
  if (n == 1) return {x, 1.0};
  return {p1, n * (x * p1 - p0) / (x * x - 1.0)};
}

}  // namespace

GaussRule1D gauss_rule_1d(int n) {
  if (n < 1 || n > kMaxQuadratureOrder) {
    throw Error(ErrorCode::UnsupportedOrder,
                "quadrature order " + std::to_string(n) + " outside [1, 10]");
  }
  GaussRule1D rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  // Newton iteration on P_n from the usual cosine initial guess; the roots are
  // symmetric so only half are computed.
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(n, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre(n, x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.points[i] = -x;
    rule.points[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.points[n / 2] = 0.0;
  return rule;
}

QuadratureRule gauss_rule(int n) {
  const GaussRule1D line = gauss_rule_1d(n);
  QuadratureRule rule;
  rule.order = n;
  rule.points.reserve(n * n);
  rule.weights.reserve(n * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      rule.points.emplace_back(line.points[i], line.points[j]);
      rule.weights.push_back(line.weights[i] * line.weights[j]);
    }
  }
  return rule;
}

}  // namespace dpq2p1
