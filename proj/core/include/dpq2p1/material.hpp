#pragma once

#include <Eigen/Core>
#include <Eigen/LU>

namespace dpq2p1 {

using Mat2 = Eigen::Matrix2d;

/// Fourth-order tangent stored as 4x4 with index 2 i + j for the pair (i, j):
/// entry (2i+j, 2k+l) is d^2 W / dF_ij dF_kl.
using Tangent = Eigen::Matrix4d;

/// Parameters of W(F) = mu/2 |F|^s + (det F - 1)^2 / 2 + 1 / det F.
struct MaterialParams {
  double mu = 2.0;
  double s = 1.5;

  /// Throws Error(InvalidArgument) unless mu > 0 and 1 < s < 2.
  void validate() const;
};

/// cof [[a, b], [c, d]] = [[d, -c], [-b, a]], so F cof(F)^T = det F I.
inline Mat2 cofactor(const Mat2& F) {
  Mat2 c;
  c << F(1, 1), -F(1, 0), -F(0, 1), F(0, 0);
  return c;
}

/// Kinematic quantities cached for one deformation gradient.
struct StrainState {
  Mat2 F;
  double J;
  Mat2 cof;
  double norm;  // Frobenius

  explicit StrainState(const Mat2& gradient)
      : F(gradient), J(gradient.determinant()), cof(cofactor(gradient)), norm(gradient.norm()) {}
};

/// Each of these throws Error(NonPositiveJacobian) when det F <= 0.
double energy_density(const MaterialParams& params, const Mat2& F);
Mat2 first_piola(const MaterialParams& params, const Mat2& F);
Tangent tangent_tensor(const MaterialParams& params, const Mat2& F);

/// Constant tensor d(cof F)_ij / dF_kl in the 4x4 ordering.
const Tangent& cofactor_derivative();

/// Flattens F row-major, matching the tangent ordering.
inline Eigen::Vector4d flatten(const Mat2& F) { return {F(0, 0), F(0, 1), F(1, 0), F(1, 1)}; }
inline Mat2 unflatten(const Eigen::Vector4d& v) {
  Mat2 F;
  F << v(0), v(1), v(2), v(3);
  return F;
}

/// Multiplier that balances first_piola(I) on the undeformed state:
/// (mu s / 2) 2^{(s-2)/2} - 1.
double identity_pressure(const MaterialParams& params);

}  // namespace dpq2p1
