#include "dpq2p1/assembly.hpp"

#include "dpq2p1/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <sstream>
#include <thread>

namespace dpq2p1 {

namespace {

using Matrix18 = Eigen::Matrix<double, 18, 18>;
using Vector18 = Eigen::Matrix<double, 18, 1>;
using Matrix3x18 = Eigen::Matrix<double, 3, 18>;

struct Needs {
  bool matrix = false;
  bool residual = false;
  bool energy = false;
};

struct ElementContribution {
  Matrix18 a = Matrix18::Zero();
  Matrix3x18 b = Matrix3x18::Zero();
  Vector18 f = Vector18::Zero();
  Eigen::Vector3d g = Eigen::Vector3d::Zero();
  double energy = 0.0;
};

const Discretization& checked(const Discretization& disc) {
  if (disc.mesh == nullptr || disc.dofs == nullptr) {
    throw Error(ErrorCode::InvalidArgument, "discretization without mesh or dof map");
  }
  return disc;
}

ElementContribution element_kernel(const Discretization& disc, const QuadratureRule& rule,
                                   int ie, const DiscreteState& state, Needs needs) {
  const Element& e = disc.mesh->elements[ie];
  const Tangent& dcof = cofactor_derivative();
  ElementContribution out;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Vec2& xhat = rule.points[q];
    const PointGeometry geo = point_geometry(e, xhat);
    const double w = rule.weights[q] * geo.det;
    const FieldValue uv = evaluate_u(e, geo, state.u);
    const Mat2& F = uv.grad;
    const double J = F.determinant();
    if (!(J > 0.0)) {
      throw Error(ErrorCode::NonPositiveJacobian, "det grad u <= 0 at element " +
                                                      std::to_string(ie) + ", point " +
                                                      std::to_string(q));
    }
    const double pbar = evaluate_p(ie, xhat, state.p);
    const auto psi = ReferenceBasisP1::values(xhat);
    const Mat2 cof = cofactor(F);

    if (needs.residual) {
      const Mat2 stress = first_piola(disc.material, F) - pbar * cof;
      for (int k = 0; k < 9; ++k) {
        const Vec2 t = stress * geo.grad_phi[k];
        out.f(2 * k) -= w * t.x();
        out.f(2 * k + 1) -= w * t.y();
      }
      for (int a = 0; a < 3; ++a) out.g(a) -= w * psi[a] * (J - 1.0);
    }
    if (needs.matrix) {
      const Tangent eff = tangent_tensor(disc.material, F) - pbar * dcof;
      for (int k = 0; k < 9; ++k) {
        const Vec2 cg = cof * geo.grad_phi[k];
        for (int a = 0; a < 3; ++a) {
          out.b(a, 2 * k) += w * psi[a] * cg.x();
          out.b(a, 2 * k + 1) += w * psi[a] * cg.y();
        }
      }
      // a(w, v): grad v = e_c (x) grad phi_k, grad w = e_d (x) grad phi_l.
      for (int k = 0; k < 9; ++k) {
        const Vec2& gk = geo.grad_phi[k];
        for (int c = 0; c < 2; ++c) {
          const Eigen::Vector4d row =
              (eff.row(2 * c) * gk.x() + eff.row(2 * c + 1) * gk.y()).transpose();
          for (int l = 0; l < 9; ++l) {
            const Vec2& gl = geo.grad_phi[l];
            out.a(2 * k + c, 2 * l) += w * (row(0) * gl.x() + row(1) * gl.y());
            out.a(2 * k + c, 2 * l + 1) += w * (row(2) * gl.x() + row(3) * gl.y());
          }
        }
      }
    }
    if (needs.energy) {
      out.energy += w * (energy_density(disc.material, F) - pbar * (J - 1.0));
    }
  }
  return out;
}

// Runs the kernel over all elements, optionally on several threads. Results are
// stored per element and consumed in element order, so the reduction does not
// depend on scheduling.
std::vector<ElementContribution> element_loop(const Discretization& disc,
                                              const DiscreteState& state, Needs needs) {
  const int n = disc.mesh->num_elements();
  const QuadratureRule rule = gauss_rule(disc.quadrature_order);
  std::vector<ElementContribution> out(n);
  const int jobs = std::clamp(disc.jobs, 1, std::max(1, n));
  if (jobs == 1) {
    for (int ie = 0; ie < n; ++ie) out[ie] = element_kernel(disc, rule, ie, state, needs);
    return out;
  }
  std::vector<std::exception_ptr> errors(jobs);
  std::vector<int> error_element(jobs, n);
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (int t = 0; t < jobs; ++t) {
    workers.emplace_back([&, t] {
      for (int ie = t; ie < n; ie += jobs) {
        try {
          out[ie] = element_kernel(disc, rule, ie, state, needs);
        } catch (...) {
          errors[t] = std::current_exception();
          error_element[t] = ie;
          return;
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  const auto first = std::min_element(error_element.begin(), error_element.end());
  if (*first < n) std::rethrow_exception(errors[first - error_element.begin()]);
  return out;
}

int global_u(const Element& e, int local) {
  return 2 * e.node_ids[local / 2] + local % 2;
}

Vec2 edge_reference_point(EdgeSide side, double t) {
  switch (side) {
    case EdgeSide::XiMinus: return {-1.0, t};
    case EdgeSide::XiPlus: return {1.0, t};
    case EdgeSide::EtaMinus: return {t, -1.0};
    case EdgeSide::EtaPlus: return {t, 1.0};
  }
  return {0.0, 0.0};
}

struct EdgePoint {
  Vec2 xhat;
  Vec2 x;
  Vec2 normal;
  double ds;
};

// Quadrature points on an edge with outward normal and arc-length weight.
std::vector<EdgePoint> edge_points(const Element& e, EdgeSide side, int order) {
  const GaussRule1D rule = gauss_rule_1d(order);
  const bool xi_side = side == EdgeSide::XiMinus || side == EdgeSide::XiPlus;
  // Clockwise rotation of the tangent is outward on XiPlus and EtaMinus.
  const bool clockwise = side == EdgeSide::XiPlus || side == EdgeSide::EtaMinus;
  std::vector<EdgePoint> pts;
  pts.reserve(rule.points.size());
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const Vec2 xhat = edge_reference_point(side, rule.points[q]);
    const Mat2 G = e.map.jacobian(xhat).matrix;
    const Vec2 tangent = G.col(xi_side ? 1 : 0);
    const double len = tangent.norm();
    const Vec2 n = clockwise ? Vec2(tangent.y(), -tangent.x()) / len
                             : Vec2(-tangent.y(), tangent.x()) / len;
    pts.push_back({xhat, e.map.eval(xhat), n, rule.weights[q] * len});
  }
  return pts;
}

}  // namespace

Vec2 TractionSpec::at(const Vec2& x, const Vec2& n) const {
  double factor = 1.0;
  if (kind == Kind::Modulated) {
    const double r = x.norm();
    factor += eta * (r > 0.0 ? std::abs(x.x() / r) : 0.0);
  }
  return factor * magnitude * n;
}

SparseMatrix SaddleSystem::matrix() const {
  const int nu = num_u();
  const int np = num_p();
  const int n = size();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(A.nonZeros() + 2 * B.nonZeros() + 2 * C.nonZeros() + nu);
  auto is_fixed = [&](int i) { return !fixed.empty() && fixed[i]; };
  for (int k = 0; k < A.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(A, k); it; ++it) {
      if (is_fixed(it.row()) || is_fixed(it.col())) continue;
      trip.emplace_back(it.row(), it.col(), it.value());
    }
  }
  for (int k = 0; k < B.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(B, k); it; ++it) {
      if (is_fixed(it.col())) continue;
      trip.emplace_back(nu + it.row(), it.col(), it.value());
      trip.emplace_back(it.col(), nu + it.row(), it.value());
    }
  }
  for (int k = 0; k < C.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(C, k); it; ++it) {
      if (is_fixed(it.col())) continue;
      trip.emplace_back(nu + np + it.row(), it.col(), it.value());
      trip.emplace_back(it.col(), nu + np + it.row(), it.value());
    }
  }
  for (int i = 0; i < nu; ++i) {
    if (is_fixed(i)) trip.emplace_back(i, i, 1.0);
  }
  SparseMatrix K(n, n);
  K.setFromTriplets(trip.begin(), trip.end());
  return K;
}

Eigen::VectorXd SaddleSystem::rhs() const {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(size());
  r.head(num_u()) = f;
  r.segment(num_u(), num_p()) = g;
  for (int i = 0; i < num_u(); ++i) {
    if (!fixed.empty() && fixed[i]) r(i) = 0.0;
  }
  return r;
}

SparseMatrix assemble_a(const Discretization& disc, const DiscreteState& state) {
  const auto contributions = element_loop(checked(disc), state, {.matrix = true});
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(contributions.size() * 324);
  for (int ie = 0; ie < disc.mesh->num_elements(); ++ie) {
    const Element& e = disc.mesh->elements[ie];
    for (int i = 0; i < 18; ++i) {
      for (int j = 0; j < 18; ++j) {
        trip.emplace_back(global_u(e, i), global_u(e, j), contributions[ie].a(i, j));
      }
    }
  }
  SparseMatrix A(disc.dofs->num_u, disc.dofs->num_u);
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

SparseMatrix assemble_b(const Discretization& disc, const DiscreteState& state) {
  const auto contributions = element_loop(checked(disc), state, {.matrix = true});
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(contributions.size() * 54);
  for (int ie = 0; ie < disc.mesh->num_elements(); ++ie) {
    const Element& e = disc.mesh->elements[ie];
    for (int a = 0; a < 3; ++a) {
      for (int j = 0; j < 18; ++j) {
        trip.emplace_back(3 * ie + a, global_u(e, j), contributions[ie].b(a, j));
      }
    }
  }
  SparseMatrix B(disc.dofs->num_p, disc.dofs->num_u);
  B.setFromTriplets(trip.begin(), trip.end());
  return B;
}

Eigen::VectorXd assemble_traction(const Discretization& disc, const TractionSpec& traction) {
  checked(disc);
  Eigen::VectorXd t = Eigen::VectorXd::Zero(disc.dofs->num_u);
  for (const BoundaryEdge& edge : disc.mesh->loaded_edges) {
    const Element& e = disc.mesh->elements[edge.element];
    for (const EdgePoint& pt : edge_points(e, edge.side, disc.quadrature_order)) {
      const Vec2 tv = traction.at(pt.x, pt.normal);
      const auto phi = ReferenceBasisQ2::values(pt.xhat);
      for (int k = 0; k < 9; ++k) {
        t(2 * e.node_ids[k]) += pt.ds * tv.x() * phi[k];
        t(2 * e.node_ids[k] + 1) += pt.ds * tv.y() * phi[k];
      }
    }
  }
  return t;
}

Eigen::VectorXd assemble_f(const Discretization& disc, const DiscreteState& state,
                           const TractionSpec& traction) {
  const auto contributions = element_loop(checked(disc), state, {.residual = true});
  Eigen::VectorXd f = assemble_traction(disc, traction);
  for (int ie = 0; ie < disc.mesh->num_elements(); ++ie) {
    const Element& e = disc.mesh->elements[ie];
    for (int i = 0; i < 18; ++i) f(global_u(e, i)) += contributions[ie].f(i);
  }
  return f;
}

Eigen::VectorXd assemble_g(const Discretization& disc, const DiscreteState& state) {
  const auto contributions = element_loop(checked(disc), state, {.residual = true});
  Eigen::VectorXd g(disc.dofs->num_p);
  for (int ie = 0; ie < disc.mesh->num_elements(); ++ie) {
    g.segment<3>(3 * ie) = contributions[ie].g;
  }
  return g;
}

SparseMatrix assemble_constraints(const Discretization& disc) {
  checked(disc);
  const int nc = disc.dofs->num_constraints;
  SparseMatrix C(nc, disc.dofs->num_u);
  if (nc == 0) return C;
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(nc, disc.dofs->num_u);
  const QuadratureRule rule = gauss_rule(disc.quadrature_order);
  for (const Element& e : disc.mesh->elements) {
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Vec2& xhat = rule.points[q];
      const double w = rule.weights[q] * e.map.jacobian(xhat).det;
      const auto phi = ReferenceBasisQ2::values(xhat);
      const Vec2 x = e.map.eval(xhat);
      for (int k = 0; k < 9; ++k) {
        const int node = e.node_ids[k];
        dense(0, 2 * node) += w * phi[k];
        dense(1, 2 * node + 1) += w * phi[k];
        if (nc == 3) {
          dense(2, 2 * node) -= w * x.y() * phi[k];
          dense(2, 2 * node + 1) += w * x.x() * phi[k];
        }
      }
    }
  }
  C = dense.sparseView();
  return C;
}

SaddleSystem assemble_system(const Discretization& disc, const DiscreteState& state,
                             const TractionSpec& traction) {
  const auto contributions =
      element_loop(checked(disc), state, {.matrix = true, .residual = true});
  const int nu = disc.dofs->num_u;
  SaddleSystem sys;
  std::vector<Eigen::Triplet<double>> ta;
  std::vector<Eigen::Triplet<double>> tb;
  ta.reserve(contributions.size() * 324);
  tb.reserve(contributions.size() * 54);
  sys.f = assemble_traction(disc, traction);
  sys.g.resize(disc.dofs->num_p);
  for (int ie = 0; ie < disc.mesh->num_elements(); ++ie) {
    const Element& e = disc.mesh->elements[ie];
    const ElementContribution& c = contributions[ie];
    for (int i = 0; i < 18; ++i) {
      const int gi = global_u(e, i);
      sys.f(gi) += c.f(i);
      for (int j = 0; j < 18; ++j) ta.emplace_back(gi, global_u(e, j), c.a(i, j));
    }
    for (int a = 0; a < 3; ++a) {
      for (int j = 0; j < 18; ++j) tb.emplace_back(3 * ie + a, global_u(e, j), c.b(a, j));
    }
    sys.g.segment<3>(3 * ie) = c.g;
  }
  sys.A.resize(nu, nu);
  sys.A.setFromTriplets(ta.begin(), ta.end());
  sys.B.resize(disc.dofs->num_p, nu);
  sys.B.setFromTriplets(tb.begin(), tb.end());
  sys.C = assemble_constraints(disc);
  sys.fixed = disc.dofs->fixed;
  return sys;
}

double total_energy(const Discretization& disc, const DiscreteState& state,
                    const TractionSpec& traction) {
  const auto contributions = element_loop(checked(disc), state, {.energy = true});
  double energy = 0.0;
  for (const auto& c : contributions) energy += c.energy;
  return energy - assemble_traction(disc, traction).dot(state.u);
}

std::string format_solution(const Mesh& mesh, const DiscreteState& state) {
  std::ostringstream out;
  char buf[128];
  out << "dpq2p1-sol v1\n";
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    std::snprintf(buf, sizeof buf, "u %d %.17g %.17g\n", i, state.u(2 * i), state.u(2 * i + 1));
    out << buf;
  }
  for (int e = 0; e < mesh.num_elements(); ++e) {
    std::snprintf(buf, sizeof buf, "p %d %.17g %.17g %.17g\n", e, state.p(3 * e),
                  state.p(3 * e + 1), state.p(3 * e + 2));
    out << buf;
  }
  return out.str();
}

}  // namespace dpq2p1
