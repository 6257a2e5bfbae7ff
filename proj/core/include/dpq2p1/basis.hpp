#pragma once

#include "dpq2p1/quadrature.hpp"

#include <Eigen/Core>
#include <Eigen/LU>

#include <array>

namespace dpq2p1 {

using Mat2 = Eigen::Matrix2d;

/// Reference nodes of the biquadratic element.
///
/// Vertices a0..a3 run anticlockwise from (-1,-1). Midpoints a5 and a7 sit on
/// the x1 = +1 and x1 = -1 edges, a4 and a6 on the x2 = -1 and x2 = +1 edges,
/// and a8 is the centre.
inline constexpr std::array<std::array<double, 2>, 9> kReferenceNodes{{
    {-1.0, -1.0},
    {1.0, -1.0},
    {1.0, 1.0},
    {-1.0, 1.0},
    {0.0, -1.0},
    {1.0, 0.0},
    {0.0, 1.0},
    {-1.0, 0.0},
    {0.0, 0.0},
}};

inline Vec2 reference_node(int k) {
  return {kReferenceNodes[k][0], kReferenceNodes[k][1]};
}

/// Tensor-product quadratic Lagrange functions on {-1, 0, 1}^2, ordered as
/// kReferenceNodes.
struct ReferenceBasisQ2 {
  static constexpr int kSize = 9;

  static std::array<double, 9> values(const Vec2& xhat);
  static std::array<Vec2, 9> gradients(const Vec2& xhat);
  /// Reference Hessians d^2 phi / dxhat_i dxhat_j.
  static std::array<Mat2, 9> hessians(const Vec2& xhat);
};

/// Bilinear functions on the four vertices, used by bilinear geometry maps.
struct ReferenceBasisQ1 {
  static std::array<double, 4> values(const Vec2& xhat);
  static std::array<Vec2, 4> gradients(const Vec2& xhat);
  static std::array<Mat2, 4> hessians(const Vec2& xhat);
};

/// Per-element pressure basis {1, xhat1, xhat2} in reference coordinates.
/// A pressure on T is p = phat o F_T^{-1}; evaluation always happens at a
/// reference point so F_T is never inverted.
struct ReferenceBasisP1 {
  static constexpr int kSize = 3;

  static std::array<double, 3> values(const Vec2& xhat) {
    return {1.0, xhat.x(), xhat.y()};
  }
};

}  // namespace dpq2p1
