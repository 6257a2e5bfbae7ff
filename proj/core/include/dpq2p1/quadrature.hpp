#pragma once

#include <Eigen/Core>
#include <Eigen/LU>

#include <vector>

namespace dpq2p1 {

using Vec2 = Eigen::Vector2d;

/// One-dimensional Gauss-Legendre rule on [-1, 1].
struct GaussRule1D {
  std::vector<double> points;
  std::vector<double> weights;
};

/// Tensor Gauss-Legendre rule on the reference square [-1, 1]^2.
///
/// Points are stored with the first coordinate running fastest. An n x n rule
/// integrates x1^a x2^b exactly for a, b <= 2n - 1.
struct QuadratureRule {
  int order = 0;
  std::vector<Vec2> points;
  std::vector<double> weights;

  std::size_t size() const { return points.size(); }
};

inline constexpr int kMaxQuadratureOrder = 10;

/// Throws Error(UnsupportedOrder) unless 1 <= n <= kMaxQuadratureOrder.
GaussRule1D gauss_rule_1d(int n);
QuadratureRule gauss_rule(int n);

}  // namespace dpq2p1
