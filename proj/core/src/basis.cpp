#include "dpq2p1/basis.hpp"

namespace dpq2p1 {

namespace {

// Quadratic Lagrange polynomials on {-1, 0, 1}, indexed by node coordinate.
struct Lagrange1D {
  static double value(int node, double t) {
    switch (node) {
      case -1: return 0.5 * t * (t - 1.0);
      case 0: return (1.0 - t) * (1.0 + t);
      default: return 0.5 * t * (t + 1.0);
    }
  }
  static double derivative(int node, double t) {
    switch (node) {
      case -1: return t - 0.5;
      case 0: return -2.0 * t;
      default: return t + 0.5;
    }
  }
  static double second(int node) {
    return node == 0 ? -2.0 : 1.0;
  }
};

int node_coord(int k, int axis) { return static_cast<int>(kReferenceNodes[k][axis]); }

}  // namespace

std::array<double, 9> ReferenceBasisQ2::values(const Vec2& xhat) {
  std::array<double, 9> out{};
  for (int k = 0; k < 9; ++k) {
    out[k] = Lagrange1D::value(node_coord(k, 0), xhat.x()) *
             Lagrange1D::value(node_coord(k, 1), xhat.y());
  }
  return out;
}

std::array<Vec2, 9> ReferenceBasisQ2::gradients(const Vec2& xhat) {
  std::array<Vec2, 9> out{};
  for (int k = 0; k < 9; ++k) {
    const int a = node_coord(k, 0);
    const int b = node_coord(k, 1);
    out[k] = {Lagrange1D::derivative(a, xhat.x()) * Lagrange1D::value(b, xhat.y()),
              Lagrange1D::value(a, xhat.x()) * Lagrange1D::derivative(b, xhat.y())};
  }
  return out;
}

std::array<Mat2, 9> ReferenceBasisQ2::hessians(const Vec2& xhat) {
  std::array<Mat2, 9> out{};
  for (int k = 0; k < 9; ++k) {
    const int a = node_coord(k, 0);
    const int b = node_coord(k, 1);
    const double xy = Lagrange1D::derivative(a, xhat.x()) * Lagrange1D::derivative(b, xhat.y());
    out[k] << Lagrange1D::second(a) * Lagrange1D::value(b, xhat.y()), xy, xy,
        Lagrange1D::value(a, xhat.x()) * Lagrange1D::second(b);
  }
  return out;
}

std::array<double, 4> ReferenceBasisQ1::values(const Vec2& xhat) {
  std::array<double, 4> out{};
  for (int k = 0; k < 4; ++k) {
    out[k] = 0.25 * (1.0 + kReferenceNodes[k][0] * xhat.x()) *
             (1.0 + kReferenceNodes[k][1] * xhat.y());
  }
  return out;
}

std::array<Vec2, 4> ReferenceBasisQ1::gradients(const Vec2& xhat) {
  std::array<Vec2, 4> out{};
  for (int k = 0; k < 4; ++k) {
    const double a = kReferenceNodes[k][0];
    const double b = kReferenceNodes[k][1];
    out[k] = {0.25 * a * (1.0 + b * xhat.y()), 0.25 * b * (1.0 + a * xhat.x())};
  }
  return out;
}

std::array<Mat2, 4> ReferenceBasisQ1::hessians(const Vec2&) {
  std::array<Mat2, 4> out{};
  for (int k = 0; k < 4; ++k) {
    const double ab = 0.25 * kReferenceNodes[k][0] * kReferenceNodes[k][1];
    out[k] << 0.0, ab, ab, 0.0;
  }
  return out;
}

}  // namespace dpq2p1
