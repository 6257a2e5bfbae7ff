#include "dpq2p1/verify.hpp"

#include "dpq2p1/error.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace dpq2p1 {

ReferenceSolution analytic_reference(const AnalyticCavitation& oracle) {
  auto o = std::make_shared<AnalyticCavitation>(oracle);
  ReferenceSolution ref;
  ref.displacement = [o](const Vec2& x) { return o->displacement(x); };
  ref.gradient = [o](const Vec2& x) { return o->gradient(x); };
  ref.pressure = [o](const Vec2& x) {
    return o->pressure(std::clamp(x.norm(), o->rho(), 1.0));
  };
  ref.energy = o->energy();
  ref.label = "analytic";
  return ref;
}

ReferenceSolution discrete_reference(const Discretization& disc, const DiscreteState& state,
                                     const TractionSpec& traction) {
  const Mesh* mesh = disc.mesh;
  const DiscreteState* s = &state;
  auto find = [mesh](const Vec2& x) {
    const auto hit = locate(*mesh, x);
    if (!hit) throw Error(ErrorCode::OutOfRange, "reference point outside the annulus");
    return *hit;
  };
  ReferenceSolution ref;
  ref.displacement = [mesh, s, find](const Vec2& x) {
    const auto [ie, xhat] = find(x);
    const Element& e = mesh->elements[ie];
    return evaluate_u(e, point_geometry(e, xhat), s->u).u;
  };
  ref.gradient = [mesh, s, find](const Vec2& x) {
    const auto [ie, xhat] = find(x);
    const Element& e = mesh->elements[ie];
    return evaluate_u(e, point_geometry(e, xhat), s->u).grad;
  };
  ref.pressure = [s, find](const Vec2& x) {
    const auto [ie, xhat] = find(x);
    return evaluate_p(ie, xhat, s->p);
  };
  DiscreteState no_multiplier{state.u, Eigen::VectorXd::Zero(state.p.size())};
  Discretization fine = disc;
  fine.quadrature_order = std::min(disc.quadrature_order + 2, kMaxQuadratureOrder);
  ref.energy = total_energy(fine, no_multiplier, traction);
  ref.label = "discrete(L=" + std::to_string(mesh->layers.size()) +
              ",N=" + std::to_string(mesh->elements_per_layer) + ")";
  return ref;
}

ErrorReport error_norms(const Discretization& disc, const DiscreteState& state,
                        const TractionSpec& traction, const ReferenceSolution& reference,
                        int quadrature_order) {
  const Mesh& mesh = *disc.mesh;
  const QuadratureRule rule = gauss_rule(quadrature_order);
  const double s = disc.material.s;

  double w1s = 0.0;
  double det_l1 = 0.0;
  double det_l2 = 0.0;
  double p_l2 = 0.0;
  double area = 0.0;
  for (int ie = 0; ie < mesh.num_elements(); ++ie) {
    const Element& e = mesh.elements[ie];
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Vec2& xhat = rule.points[q];
      const PointGeometry geo = point_geometry(e, xhat);
      const double w = rule.weights[q] * geo.det;
      const Mat2 F = evaluate_u(e, geo, state.u).grad;
      const double dJ = F.determinant() - 1.0;
      const double dp = evaluate_p(ie, xhat, state.p) - reference.pressure(geo.x);
      w1s += w * std::pow((F - reference.gradient(geo.x)).norm(), s);
      det_l1 += w * std::abs(dJ);
      det_l2 += w * dJ * dJ;
      p_l2 += w * dp * dp;
      area += w;
    }
  }

  Discretization energy_disc = disc;
  energy_disc.quadrature_order = quadrature_order;
  const DiscreteState no_multiplier{state.u, Eigen::VectorXd::Zero(state.p.size())};

  ErrorReport report;
  report.h = mesh.h;
  report.deformation_dofs = disc.dofs ? disc.dofs->deformation_dofs() : 2 * mesh.num_nodes();
  report.energy_error = std::abs(total_energy(energy_disc, no_multiplier, traction) -
                                 reference.energy);
  report.w1s_seminorm = std::pow(w1s, 1.0 / s);
  report.det_l1 = det_l1;
  report.det_l2 = std::sqrt(det_l2);
  report.pressure_l2 = std::sqrt(p_l2);
  report.area = area;
  return report;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "slope fit needs two or more matching points");
  }
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "slope fit needs positive data");
    }
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  if (!(std::abs(denom) > 0.0)) throw Error(ErrorCode::InvalidArgument, "degenerate slope fit");
  return (n * sxy - sx * sy) / denom;
}

double deformed_inner_radius(const Mesh& mesh, const Eigen::VectorXd& u) {
  const double tol = 1e-10 * std::max(1.0, mesh.inner_radius);
  double sum = 0.0;
  int count = 0;
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    if (std::abs(mesh.nodes[i].norm() - mesh.inner_radius) > tol) continue;
    sum += Vec2(u(2 * i), u(2 * i + 1)).norm();
    ++count;
  }
  if (count == 0) throw Error(ErrorCode::InvalidArgument, "mesh has no cavity nodes");
  return sum / count;
}

DetDefect det_defect(const Discretization& disc, const Eigen::VectorXd& u, int quadrature_order) {
  const QuadratureRule rule = gauss_rule(quadrature_order);
  DetDefect out;
  for (const Element& e : disc.mesh->elements) {
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const PointGeometry g = point_geometry(e, rule.points[q]);
      const double d = evaluate_u(e, g, u).grad.determinant() - 1.0;
      const double w = rule.weights[q] * g.det;
      out.l1 += w * std::abs(d);
      out.l2 += w * d * d;
    }
  }
  out.l2 = std::sqrt(out.l2);
  return out;
}

}  // namespace dpq2p1
