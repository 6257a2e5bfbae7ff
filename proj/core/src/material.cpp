#include "dpq2p1/material.hpp"

#include "dpq2p1/error.hpp"

#include <cmath>

namespace dpq2p1 {

namespace {

void require_positive_det(double J) {
  if (!(J > 0.0)) {
    throw Error(ErrorCode::NonPositiveJacobian, "det F <= 0");
  }
}

}  // namespace

void MaterialParams::validate() const {
  if (!(mu > 0.0)) throw Error(ErrorCode::InvalidArgument, "mu must be positive");
  if (!(s > 1.0 && s < 2.0)) throw Error(ErrorCode::InvalidArgument, "s out of (1,2)");
}

double energy_density(const MaterialParams& params, const Mat2& F) {
  const double J = F.determinant();
  require_positive_det(J);
  return 0.5 * params.mu * std::pow(F.norm(), params.s) + 0.5 * (J - 1.0) * (J - 1.0) + 1.0 / J;
}

Mat2 first_piola(const MaterialParams& params, const Mat2& F) {
  const StrainState st(F);
  require_positive_det(st.J);
  const double iso = 0.5 * params.mu * params.s * std::pow(st.norm, params.s - 2.0);
  return iso * F + (st.J - 1.0 - 1.0 / (st.J * st.J)) * st.cof;
}

const Tangent& cofactor_derivative() {
  // cof = [[F11, -F10], [-F01, F00]] in row-major flattening.
  static const Tangent d = [] {
    Tangent m = Tangent::Zero();
    m(0, 3) = 1.0;
    m(1, 2) = -1.0;
    m(2, 1) = -1.0;
    m(3, 0) = 1.0;
    return m;
  }();
  return d;
}

Tangent tangent_tensor(const MaterialParams& params, const Mat2& F) {
  const StrainState st(F);
  require_positive_det(st.J);
  const Eigen::Vector4d f = flatten(F);
  const Eigen::Vector4d c = flatten(st.cof);
  const double n2 = st.norm * st.norm;
  const double iso = 0.5 * params.mu * params.s * std::pow(st.norm, params.s - 2.0);
  Tangent A = iso * ((params.s - 2.0) / n2 * (f * f.transpose()) + Tangent::Identity());
  A += (1.0 + 2.0 / (st.J * st.J * st.J)) * (c * c.transpose());
  A += (st.J - 1.0 - 1.0 / (st.J * st.J)) * cofactor_derivative();
  return A;
}

double identity_pressure(const MaterialParams& params) {
  return 0.5 * params.mu * params.s * std::pow(2.0, 0.5 * (params.s - 2.0)) - 1.0;
}

}  // namespace dpq2p1
