#include "dpq2p1/verify.hpp"

#include "dpq2p1/error.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <memory>
#include <sstream>

namespace dpq2p1 {

namespace {

struct Solved {
  Mesh mesh;
  DofMap dofs;
  DiscreteState state;
  int newton_iterations = 0;
};

Solved solve_on(const MeshSpec& spec, const StudyOptions& options, const TractionSpec& load) {
  Solved s;
  s.mesh = build_annulus_mesh(options.rho, spec.layers, spec.elements_per_layer);
  if (spec.h > 0.0) s.mesh.h = spec.h;
  BoundaryConditions bc;
  bc.pin_rotation = options.pin_rotation;
  s.dofs = build_dof_map(s.mesh, bc);
  Discretization disc{&s.mesh, &s.dofs, options.material, options.newton.quadrature_order,
                      options.jobs};
  ContinuationResult res = continuation_solve(disc, load, options.continuation, options.newton);
  s.state = std::move(res.state);
  for (const NewtonTrace& t : res.traces) {
    s.newton_iterations += static_cast<int>(t.iterations.size());
  }
  return s;
}

}  // namespace

MeshSpec refine(const MeshSpec& spec) {
  MeshSpec out;
  out.elements_per_layer = 2 * spec.elements_per_layer;
  for (const Layer& l : spec.layers) {
    out.layers.push_back({l.inner_radius, 0.5 * l.thickness});
    out.layers.push_back({l.inner_radius + 0.5 * l.thickness, 0.5 * l.thickness});
  }
  return out;
}

ConvergenceTable convergence_study(const std::vector<MeshSpec>& meshes,
                                   const StudyOptions& options) {
  if (meshes.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "convergence study needs at least two meshes");
  }
  options.material.validate();
  options.newton.validate();
  const double t = traction_for(options.rho, options.lambda, options.material);
  const TractionSpec load = options.traction_kind == TractionSpec::Kind::RadialConstant
                                ? TractionSpec::radial(t)
                                : TractionSpec::modulated(t, options.eta);
  const int error_order =
      std::min(options.newton.quadrature_order + options.error_order_increment,
               kMaxQuadratureOrder);

  ConvergenceTable table;
  std::unique_ptr<Solved> fine;
  ReferenceSolution reference;
  if (load.kind == TractionSpec::Kind::RadialConstant) {
    reference = analytic_reference(AnalyticCavitation(options.rho, options.lambda,
                                                      options.material));
  } else {
    const MeshSpec spec = options.reference_mesh ? *options.reference_mesh : refine(meshes.back());
    fine = std::make_unique<Solved>(solve_on(spec, options, load));
    Discretization disc{&fine->mesh, &fine->dofs, options.material,
                        options.newton.quadrature_order, options.jobs};
    reference = discrete_reference(disc, fine->state, load);
  }
  table.reference_label = reference.label;

  for (const MeshSpec& spec : meshes) {
    Solved s = solve_on(spec, options, load);
    Discretization disc{&s.mesh, &s.dofs, options.material, options.newton.quadrature_order,
                        options.jobs};
    ConvergenceRow row;
    row.errors = error_norms(disc, s.state, load, reference, error_order);
    row.layers = static_cast<int>(spec.layers.size());
    row.elements_per_layer = spec.elements_per_layer;
    row.newton_iterations = s.newton_iterations;
    table.rows.push_back(row);
  }

  std::vector<double> h, nd, de, w1s, dl1, dl2, pl2;
  for (const ConvergenceRow& r : table.rows) {
    h.push_back(r.errors.h);
    nd.push_back(r.errors.deformation_dofs);
    de.push_back(r.errors.energy_error);
    w1s.push_back(r.errors.w1s_seminorm);
    dl1.push_back(r.errors.det_l1);
    dl2.push_back(r.errors.det_l2);
    pl2.push_back(r.errors.pressure_l2);
  }
  auto slope = [&h](const std::vector<double>& y) {
    for (double v : y) {
      if (!(v > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    }
    return loglog_slope(h, y);
  };
  table.slope_dofs = slope(nd);
  table.slope_energy = slope(de);
  table.slope_w1s = slope(w1s);
  table.slope_det_l1 = slope(dl1);
  table.slope_det_l2 = slope(dl2);
  table.slope_pressure = slope(pl2);
  return table;
}

std::string ConvergenceTable::to_csv() const {
  std::ostringstream out;
  out << "h,N_d,dE,W1s,detL1,detL2,pL2\n";
  char buf[512];
  for (const ConvergenceRow& r : rows) {
    const ErrorReport& e = r.errors;
    std::snprintf(buf, sizeof buf, "%.17g,%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", e.h,
                  e.deformation_dofs, e.energy_error, e.w1s_seminorm, e.det_l1, e.det_l2,
                  e.pressure_l2);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "slope,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g\n", slope_dofs,
                slope_energy, slope_w1s, slope_det_l1, slope_det_l2, slope_pressure);
  out << buf;
  return out.str();
}

}  // namespace dpq2p1
