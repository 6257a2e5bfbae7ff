#pragma once

#include "dpq2p1/assembly.hpp"
#include "dpq2p1/fem_space.hpp"
#include "dpq2p1/mesh.hpp"

#include <cmath>
#include <memory>
#include <random>

namespace dpq2p1::test {

/// Mesh, dof map and discretization kept together so the pointers stay valid.
struct Problem {
  Mesh mesh;
  DofMap dofs;
  Discretization disc;

  Problem(Mesh m, BoundaryConditions bc = {}, MaterialParams material = {}, int order = 3)
      : mesh(std::move(m)), dofs(build_dof_map(mesh, bc)) {
    disc.mesh = &mesh;
    disc.dofs = &dofs;
    disc.material = material;
    disc.quadrature_order = order;
  }
  Problem(const Problem&) = delete;
  Problem& operator=(const Problem&) = delete;
};

inline Mesh uniform_annulus(double rho, int layers, int n) {
  return build_annulus_mesh(rho, geometric_layers(rho, layers, 1.0), n);
}

/// Interpolated state near the identity with a smooth, non-symmetric perturbation.
inline DiscreteState perturbed_state(const Problem& pb, double amplitude, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> c(-1.0, 1.0);
  const double a = c(gen), b = c(gen), d = c(gen), e = c(gen);
  DiscreteState s;
  s.u = interpolate(pb.mesh, [&](const Vec2& x) {
    return Vec2(x.x() + amplitude * (a * x.x() * x.y() + b * x.y() * x.y()),
                x.y() + amplitude * (d * x.x() * x.x() + e * std::sin(x.x() + 2.0 * x.y())));
  });
  s.p = Eigen::VectorXd(pb.dofs.num_p);
  for (int i = 0; i < s.p.size(); ++i) s.p(i) = 0.3 * c(gen);
  return s;
}

}  // namespace dpq2p1::test
