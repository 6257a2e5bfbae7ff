#include "dpq2p1/newton.hpp"

#include "dpq2p1/cavitation.hpp"
#include "dpq2p1/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace dpq2p1 {

namespace {

double max_abs(const Eigen::VectorXd& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

double max_abs_free(const Eigen::VectorXd& v, const std::vector<bool>& fixed) {
  double m = 0.0;
  for (int i = 0; i < v.size(); ++i) {
    if (fixed.empty() || !fixed[i]) m = std::max(m, std::abs(v(i)));
  }
  return m;
}

void fail(CriterionResult& r, int element, int point, const char* quantity, double value) {
  if (!r.pass) return;
  r.pass = false;
  r.element = element;
  r.point = point;
  r.quantity = quantity;
  r.value = value;
}

}  // namespace

void NewtonConfig::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
  if (!(sigma > 0.0 && sigma < 1.0)) bad("sigma out of (0,1)");
  if (!(det_min > 0.0 && det_min < 1.0 && det_max > 1.0)) bad("need 0 < c < 1 < C");
  if (!(c2_bound > 1.0)) bad("C2 bound must exceed 1");
  if (!(alpha0 > 0.0 && alpha0 <= 1.0)) bad("alpha0 out of (0,1]");
  if (!(alpha_min > 0.0 && alpha_min < alpha0)) bad("need 0 < alpha_min < alpha0");
  if (!(tol_u > 0.0 && tol_p > 0.0)) bad("tolerances must be positive");
  if (max_iter < 1) bad("max_iter must be >= 1");
  if (quadrature_order < 1 || quadrature_order > kMaxQuadratureOrder) bad("quadrature order out of [1,10]");
}

Eigen::Vector2d singular_values(const Mat2& F) {
  const double e = 0.5 * (F(0, 0) + F(1, 1));
  const double f = 0.5 * (F(0, 0) - F(1, 1));
  const double g = 0.5 * (F(1, 0) + F(0, 1));
  const double h = 0.5 * (F(1, 0) - F(0, 1));
  const double q = std::hypot(e, h);
  const double r = std::hypot(f, g);
  return {std::abs(q - r), q + r};
}

CriterionResult check_c1(const Discretization& disc, const Eigen::VectorXd& u, double sigma,
                         double det_min, double det_max) {
  const QuadratureRule rule = gauss_rule(disc.quadrature_order);
  CriterionResult r;
  r.min_det = r.min_sv = std::numeric_limits<double>::infinity();
  r.max_det = r.max_sv = -std::numeric_limits<double>::infinity();
  const Mesh& mesh = *disc.mesh;
  for (int ie = 0; ie < mesh.num_elements(); ++ie) {
    const Element& e = mesh.elements[ie];
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const PointGeometry geo = point_geometry(e, rule.points[q]);
      const Mat2 F = evaluate_u(e, geo, u).grad;
      const Eigen::Vector2d sv = singular_values(F);
      const double J = F.determinant();
      r.min_det = std::min(r.min_det, J);
      r.max_det = std::max(r.max_det, J);
      r.min_sv = std::min(r.min_sv, sv(0));
      r.max_sv = std::max(r.max_sv, sv(1));
      const int qi = static_cast<int>(q);
      if (!(sv(0) >= sigma)) fail(r, ie, qi, "lambda1", sv(0));
      if (!(sv(1) <= 1.0 / sigma)) fail(r, ie, qi, "lambda2", sv(1));
      if (!(J >= det_min)) fail(r, ie, qi, "det_min", J);
      if (!(J <= det_max)) fail(r, ie, qi, "det_max", J);
    }
  }
  return r;
}

CriterionResult check_c2(const Discretization& disc, const Eigen::VectorXd& u, double c2_bound) {
  const QuadratureRule rule = gauss_rule(disc.quadrature_order);
  CriterionResult r;
  const Mesh& mesh = *disc.mesh;
  for (int ie = 0; ie < mesh.num_elements(); ++ie) {
    const Element& e = mesh.elements[ie];
    double seminorm = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto hess = physical_hessians(e, rule.points[q]);
      Mat2 h0 = Mat2::Zero();
      Mat2 h1 = Mat2::Zero();
      for (int k = 0; k < 9; ++k) {
        h0 += u(2 * e.node_ids[k]) * hess[k];
        h1 += u(2 * e.node_ids[k] + 1) * hess[k];
      }
      seminorm = std::max({seminorm, h0.cwiseAbs().maxCoeff(), h1.cwiseAbs().maxCoeff()});
    }
    const double hT = mesh.element_h.empty() ? mesh.h : mesh.element_h[ie];
    const double scaled = hT * seminorm;
    r.max_scaled_hessian = std::max(r.max_scaled_hessian, scaled);
    if (!(scaled <= c2_bound)) fail(r, ie, -1, "h_T|u|_2,inf", scaled);
  }
  return r;
}

std::string NewtonTrace::to_csv() const {
  std::ostringstream out;
  out << "iter,alpha,halvings,res_u,res_p,inc_u,inc_p,min_det,max_det,min_sv,max_sv,energy\n";
  char buf[512];
  for (const NewtonIteration& it : iterations) {
    std::snprintf(buf, sizeof buf,
                  "%d,%.17g,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", it.iter,
                  it.alpha, it.halvings, it.res_u, it.res_p, it.inc_u, it.inc_p, it.min_det,
                  it.max_det, it.min_sv, it.max_sv, it.energy);
    out << buf;
  }
  return out.str();
}

NewtonResult newton_solve(const Discretization& disc, const DiscreteState& initial,
                          const TractionSpec& traction, const NewtonConfig& config) {
  config.validate();
  Discretization d = disc;
  d.quadrature_order = config.quadrature_order;

  NewtonResult result{initial, {}};
  DiscreteState& state = result.state;
  NewtonTrace& trace = result.trace;
  double alpha = config.alpha0;

  for (int k = 0; k < config.max_iter; ++k) {
    SaddleSystem system;
    Increment inc;
    try {
      system = assemble_system(d, state, traction);
      inc = linear_solve(system);
    } catch (const Error& e) {
      const ErrorCode code = e.code() == ErrorCode::SingularMatrix ? ErrorCode::SingularMatrix
                             : e.code() == ErrorCode::NonPositiveJacobian
                                 ? ErrorCode::NonPositiveJacobian
                                 : ErrorCode::LinearSolveFailed;
      throw NewtonError(code, std::string("newton iteration ") + std::to_string(k) + ": " + e.what(),
                        trace);
    }

    NewtonIteration rec;
    rec.iter = k + 1;
    rec.res_u = max_abs_free(system.f, system.fixed);
    rec.res_p = max_abs(system.g);

    DiscreteState trial;
    CriterionResult c1;
    while (true) {
      if (alpha < config.alpha_min) {
        rec.alpha = alpha;
        rec.accepted = false;
        trace.iterations.push_back(rec);
        throw NewtonError(ErrorCode::DampingFloorReached,
                          "damping fell below " + std::to_string(config.alpha_min) +
                              " at iteration " + std::to_string(k + 1) + " (" + c1.quantity +
                              " = " + std::to_string(c1.value) + ")",
                          trace);
      }
      trial.u = state.u + alpha * inc.w;
      // The symmetric system carries +b(v, q) where the linearisation has
      // -b(v, q), so the multiplier moves against the solved component.
      trial.p = state.p - alpha * inc.p;
      c1 = check_c1(d, trial.u, config.sigma, config.det_min, config.det_max);
      if (c1.pass) {
        const CriterionResult c2 = check_c2(d, trial.u, config.c2_bound);
        if (c2.pass) break;
        c1.quantity = c2.quantity;
        c1.value = c2.value;
      }
      alpha *= 0.5;
      ++rec.halvings;
    }

    rec.alpha = alpha;
    rec.inc_u = alpha * max_abs(inc.w);
    rec.inc_p = alpha * max_abs(inc.p);
    rec.min_det = c1.min_det;
    rec.max_det = c1.max_det;
    rec.min_sv = c1.min_sv;
    rec.max_sv = c1.max_sv;
    rec.energy = total_energy(d, trial, traction);
    trace.iterations.push_back(rec);
    state = std::move(trial);

    if (rec.inc_u <= config.tol_u && rec.inc_p < config.tol_p) {
      trace.converged = true;
      return result;
    }
    alpha = std::min(config.alpha0, 2.0 * alpha);
  }
  throw NewtonError(ErrorCode::MaxIterationsExceeded,
                    "no convergence in " + std::to_string(config.max_iter) + " iterations", trace);
}

ContinuationResult continuation_solve(const Discretization& disc, const TractionSpec& target,
                                      const ContinuationOptions& options,
                                      const NewtonConfig& config) {
  if (options.steps < 1) throw Error(ErrorCode::InvalidArgument, "continuation needs steps >= 1");
  if (disc.mesh == nullptr || !disc.mesh->is_annulus()) {
    throw Error(ErrorCode::InvalidArgument, "continuation needs an annulus mesh");
  }
  const AnalyticCavitation start(disc.mesh->inner_radius, options.lambda0, disc.material);
  ContinuationResult result;
  result.state.u = interpolate(*disc.mesh, [&](const Vec2& x) { return start.displacement(x); });
  result.state.p = project_pressure(*disc.mesh, [&](const Vec2& x) {
    return start.pressure(std::clamp(x.norm(), start.rho(), 1.0));
  });

  const double t0 = start.traction();
  for (int k = 1; k <= options.steps; ++k) {
    TractionSpec load = target;
    load.magnitude = t0 + (target.magnitude - t0) * static_cast<double>(k) / options.steps;
    try {
      NewtonResult step = newton_solve(disc, result.state, load, config);
      result.state = std::move(step.state);
      result.traces.push_back(std::move(step.trace));
      result.loads.push_back(load.magnitude);
    } catch (const NewtonError& e) {
      throw NewtonError(e.code(),
                        "continuation step " + std::to_string(k) + ": " + e.what(), e.trace(), k);
    }
  }
  return result;
}

}  // namespace dpq2p1
