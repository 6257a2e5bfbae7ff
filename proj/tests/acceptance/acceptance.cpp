// Acceptance checks. Usage: acceptance <criterion 1-9> [...]; no argument runs all.
// Each criterion prints its measurements and one `criterion N: PASS|FAIL` line.

#include "dpq2p1/cavitation.hpp"
#include "dpq2p1/config.hpp"
#include "dpq2p1/error.hpp"
#include "dpq2p1/verify.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cstdarg>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace dpq2p1;

namespace {

struct Outcome {
  bool pass = true;
  std::string summary;

  void check(bool ok, const std::string& what) {
    std::printf("  [%s] %s\n", ok ? "ok" : "FAILED", what.c_str());
    pass = pass && ok;
  }
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

struct Problem {
  Mesh mesh;
  DofMap dofs;
  Discretization disc;

  explicit Problem(Mesh m, BoundaryConditions bc = {}) : mesh(std::move(m)), dofs(build_dof_map(mesh, bc)) {
    disc.mesh = &mesh;
    disc.dofs = &dofs;
  }
};

// Layer profile and N of a tabulated rho = 0.01 row, applied to any rho.
Mesh table_style_mesh(double rho, int row) {
  const MeshTableRow r = mesh_table(0.01).at(row);
  Mesh mesh = build_annulus_mesh(rho, profile_layers(rho, r.layers, r.tau_min, r.tau_max),
                                 r.elements_per_layer);
  mesh.h = r.h;
  return mesh;
}

Mat2 random_admissible(std::mt19937& gen) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> d(std::log(0.5), std::log(2.0));
  Mat2 F;
  do {
    F = Mat2::Identity() + 0.6 * Mat2::NullaryExpr([&] { return u(gen); });
  } while (F.determinant() < 0.2);
  return F * std::sqrt(std::exp(d(gen)) / F.determinant());
}

Outcome traction_oracle() {
  Outcome o;
  const struct {
    double rho, published;
  } cases[] = {{0.1, 3.00487}, {0.01, 3.94237}, {0.0001, 4.21590}};
  for (const auto& c : cases) {
    const double t = traction_for(c.rho, 2.0);
    o.check(std::abs(t - c.published) <= 1e-3,
            fmt("t(%g, 2) = %.6f, reference %.5f, |diff| = %.2e (tol 1e-3)", c.rho, t, c.published,
                std::abs(t - c.published)));
  }
  return o;
}

Outcome material_derivatives() {
  Outcome o;
  const MaterialParams m;
  std::mt19937 gen(2024);
  double worst_p = 0.0, worst_a = 0.0;
  for (int sample = 0; sample < 100; ++sample) {
    const Mat2 F = random_admissible(gen);
    const Mat2 P = first_piola(m, F);
    Mat2 fd;
    const double h = 1e-6;
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        Mat2 E = Mat2::Zero();
        E(i, j) = h;
        fd(i, j) = (energy_density(m, F + E) - energy_density(m, F - E)) / (2 * h);
      }
    }
    worst_p = std::max(worst_p, (P - fd).norm() / P.norm());
    const Tangent A = tangent_tensor(m, F);
    Tangent fa;
    const double k = 1e-5;
    for (int kl = 0; kl < 4; ++kl) {
      Eigen::Vector4d e = Eigen::Vector4d::Zero();
      e(kl) = k;
      fa.col(kl) =
          (flatten(first_piola(m, F + unflatten(e))) - flatten(first_piola(m, F - unflatten(e)))) /
          (2 * k);
    }
    worst_a = std::max(worst_a, (A - fa).norm() / A.norm());
  }
  o.check(worst_p <= 1e-6, fmt("first_piola vs FD(energy), 100 F: max rel err %.2e (tol 1e-6)", worst_p));
  o.check(worst_a <= 1e-6, fmt("tangent vs FD(first_piola), 100 F: max rel err %.2e (tol 1e-6)", worst_a));
  return o;
}

Outcome identity_state() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  const Mesh polar = build_table_mesh(0.01, mesh_table(0.01).front());
  const double p0 = identity_pressure({});
  auto identity = [p0](const Problem& pb) {
    DiscreteState s{interpolate(pb.mesh, [](const Vec2& x) { return x; }),
                    Eigen::VectorXd::Zero(pb.dofs.num_p)};
    for (int ie = 0; ie < pb.mesh.num_elements(); ++ie) s.p(3 * ie) = p0;
    return s;
  };
  BoundaryConditions bc;
  bc.pin_rotation = true;
  const TractionSpec zero = TractionSpec::radial(0.0);

  {
    Problem pb(polar, bc);
    const DiscreteState s = identity(pb);
    std::printf("  info: polar-map mesh, interpolated identity: |f|_max = %.2e, |g|_max = %.2e\n",
                assemble_f(pb.disc, s, zero).cwiseAbs().maxCoeff(),
                assemble_g(pb.disc, s).cwiseAbs().maxCoeff());
  }
  Problem pb(isoparametric_copy(polar), bc);
  const DiscreteState s = identity(pb);
  const double f = assemble_f(pb.disc, s, zero).cwiseAbs().maxCoeff();
  const double g = assemble_g(pb.disc, s).cwiseAbs().maxCoeff();
  o.check(std::max(f, g) <= 1e-10,
          fmt("h = 0.05 mesh (isoparametric), p = %.6f: residual max-norm %.2e (tol 1e-10)", p0,
              std::max(f, g)));
  const NewtonResult r = newton_solve(pb.disc, s, zero, NewtonConfig{});
  o.check(r.trace.converged && r.trace.iterations.size() == 1,
          fmt("newton_solve: %zu iteration(s), increment %.2e", r.trace.iterations.size(),
              r.trace.iterations.front().inc_u));
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.check(secs < 5.0, fmt("runtime %.2f s (budget 5 s)", secs));
  return o;
}

Outcome linearisation() {
  Outcome o;
  Problem pb(build_annulus_mesh(0.1, {{0.1, 0.9}}, 4));
  const AnalyticCavitation a(0.1, 1.5);
  DiscreteState s{interpolate(pb.mesh,
                              [&](const Vec2& x) {
                                return Vec2(a.displacement(x) +
                                            0.05 * Vec2(x.y() * x.y(), std::sin(x.x())));
                              }),
                  Eigen::VectorXd::LinSpaced(pb.dofs.num_p, -0.5, 0.7)};
  const TractionSpec t = TractionSpec::modulated(2.0, 0.1);
  const Eigen::MatrixXd A(assemble_a(pb.disc, s));
  Eigen::MatrixXd J(A.rows(), A.cols());
  const double h = 1e-6;
  for (int j = 0; j < pb.dofs.num_u; ++j) {
    DiscreteState sp = s, sm = s;
    sp.u(j) += h;
    sm.u(j) -= h;
    J.col(j) = -(assemble_f(pb.disc, sp, t) - assemble_f(pb.disc, sm, t)) / (2 * h);
  }
  const double rel = (A - J).norm() / A.norm();
  o.check(rel <= 1e-5, fmt("1 layer, N = 4: ||A - J_fd|| / ||A|| = %.2e (tol 1e-5)", rel));
  return o;
}

Outcome cavitation_solve() {
  Outcome o;
  const double rho = 0.1;
  const double t = traction_for(rho, 2.0);
  Problem pb(table_style_mesh(rho, 0));
  NewtonConfig c;
  c.sigma = rho / 2;
  ContinuationOptions opt;
  const ContinuationResult r = continuation_solve(pb.disc, TractionSpec::radial(t), opt, c);
  int its = 0;
  for (const NewtonTrace& tr : r.traces) its += static_cast<int>(tr.iterations.size());
  o.check(r.traces.back().converged,
          fmt("continuation converged: %zu steps, %d Newton iterations, t = %.6f",
              r.traces.size(), its, t));
  const double radius = deformed_inner_radius(pb.mesh, r.state.u);
  const double target = std::sqrt(3.01);
  o.check(std::abs(radius - target) <= 0.02 * target,
          fmt("inner radius %.6f vs sqrt(3.01) = %.6f, rel diff %.2e (tol 2e-2)", radius, target,
              std::abs(radius - target) / target));
  const DetDefect d = det_defect(pb.disc, r.state.u, 5);
  o.check(d.l1 <= 0.05, fmt("||det grad u_h - 1||_L1 = %.3e (tol 0.05)", d.l1));
  return o;
}

bool strictly_decreasing(const ConvergenceTable& t, double ErrorReport::*field) {
  for (std::size_t k = 1; k < t.rows.size(); ++k) {
    if (!(t.rows[k].errors.*field < t.rows[k - 1].errors.*field)) return false;
  }
  return true;
}

void print_table(const ConvergenceTable& t) {
  std::printf("  reference: %s\n", t.reference_label.c_str());
  std::printf("  %-6s %6s %11s %11s %11s %11s %11s\n", "h", "N_d", "dE", "W1s", "detL1", "detL2",
              "pL2");
  for (const ConvergenceRow& r : t.rows) {
    const ErrorReport& e = r.errors;
    std::printf("  %-6.3g %6d %11.4e %11.4e %11.4e %11.4e %11.4e\n", e.h, e.deformation_dofs,
                e.energy_error, e.w1s_seminorm, e.det_l1, e.det_l2, e.pressure_l2);
  }
  std::printf("  slopes vs h: N_d %.3f dE %.3f W1s %.3f detL1 %.3f detL2 %.3f pL2 %.3f\n",
              t.slope_dofs, t.slope_energy, t.slope_w1s, t.slope_det_l1, t.slope_det_l2,
              t.slope_pressure);
}

void check_monotone(Outcome& o, const ConvergenceTable& t) {
  const struct {
    const char* name;
    double ErrorReport::*field;
  } norms[] = {{"dE", &ErrorReport::energy_error},  {"W1s", &ErrorReport::w1s_seminorm},
               {"detL1", &ErrorReport::det_l1},     {"detL2", &ErrorReport::det_l2},
               {"pL2", &ErrorReport::pressure_l2}};
  for (const auto& n : norms) {
    o.check(strictly_decreasing(t, n.field), fmt("%s strictly decreases", n.name));
  }
}

Outcome convergence_symmetric() {
  Outcome o;
  StudyOptions opt;
  opt.rho = 0.01;
  opt.newton.sigma = opt.rho / 2;
  std::vector<MeshSpec> meshes;
  for (const MeshTableRow& r : mesh_table(0.01)) {
    meshes.push_back({profile_layers(0.01, r.layers, r.tau_min, r.tau_max), r.elements_per_layer, r.h});
  }
  const ConvergenceTable t = convergence_study(meshes, opt);
  print_table(t);
  check_monotone(o, t);
  o.check(std::abs(t.slope_dofs + 2.0) <= 0.2,
          fmt("N_d vs h slope %.3f, expected -2 +- 0.2", t.slope_dofs));
  // Pairwise slopes of the W1s error between consecutive meshes.
  std::string pairs;
  bool positive = true;
  for (std::size_t k = 1; k < t.rows.size(); ++k) {
    const double s = std::log(t.rows[k - 1].errors.w1s_seminorm / t.rows[k].errors.w1s_seminorm) /
                     std::log(t.rows[k - 1].errors.h / t.rows[k].errors.h);
    positive = positive && s > 0.0;
    pairs += fmt(" %.3f", s);
  }
  o.check(t.slope_w1s > 0.0 && positive,
          fmt("W1s slope %.3f, consecutive slopes%s (all positive)", t.slope_w1s, pairs.c_str()));
  return o;
}

Outcome infsup() {
  Outcome o;
  // Identity state on nested uniform meshes of B_1 \ B_0.5.
  std::vector<double> betas;
  for (auto [L, N] : {std::pair{1, 8}, std::pair{2, 16}, std::pair{4, 32}}) {
    Problem pb(build_annulus_mesh(0.5, geometric_layers(0.5, L, 1.0), N));
    DiscreteState s{interpolate(pb.mesh, [](const Vec2& x) { return x; }),
                    Eigen::VectorXd::Zero(pb.dofs.num_p)};
    const InfSupReport r = infsup_constant(pb.disc, s, "identity");
    std::printf("  identity %dx%d: beta = %.6f (eigen residual %.1e)\n", L, N, r.beta,
                r.eigen_residual);
    betas.push_back(r.beta);
  }
  const double hi = *std::max_element(betas.begin(), betas.end());
  const double lo = *std::min_element(betas.begin(), betas.end());
  o.check((hi - lo) / hi < 0.2, fmt("identity: (max - min) / max = %.3f (< 0.2)", (hi - lo) / hi));

  // Interpolated lambda = 2 cavitation states, sigma = rho / 2, on the same mesh topology.
  std::vector<std::pair<double, double>> sweep;
  for (double rho : {0.1, 0.05, 0.01}) {
    Problem pb(table_style_mesh(rho, 0));
    const AnalyticCavitation a(rho, 2.0);
    DiscreteState s{interpolate(pb.mesh, [&](const Vec2& x) { return a.displacement(x); }),
                    Eigen::VectorXd::Zero(pb.dofs.num_p)};
    const InfSupReport r = infsup_constant(pb.disc, s, "analytic");
    std::printf("  cavitation rho = %g (sigma = %g): beta = %.6f\n", rho, rho / 2, r.beta);
    o.check(r.beta > 0.0, fmt("beta > 0 at sigma = %g", rho / 2));
    sweep.push_back({rho / 2, r.beta});
  }
  bool monotone = true;
  for (std::size_t k = 1; k < sweep.size(); ++k) monotone = monotone && sweep[k].second < sweep[k - 1].second;
  std::vector<double> s, b;
  for (auto [x, y] : sweep) {
    s.push_back(x);
    b.push_back(y);
  }
  o.check(monotone, fmt("beta decreases with sigma; log-log slope vs sigma %.3f", loglog_slope(s, b)));
  return o;
}

Outcome damping() {
  Outcome o;
  Problem pb(table_style_mesh(0.1, 0));
  NewtonConfig c;
  c.sigma = 0.5;
  const DiscreteState s{3.0 * interpolate(pb.mesh, [](const Vec2& x) { return x; }),
                        Eigen::VectorXd::Zero(pb.dofs.num_p)};
  const TractionSpec t = TractionSpec::radial(traction_for(0.1, 2.0));
  const CriterionResult start = check_c1(pb.disc, s.u, c.sigma, c.det_min, c.det_max);
  o.check(!start.pass, fmt("initial guess violates (C1): %s = %.3f", start.quantity.c_str(), start.value));
  NewtonTrace trace;
  std::string outcome;
  try {
    trace = newton_solve(pb.disc, s, t, c).trace;
    outcome = "recovered";
  } catch (const NewtonError& e) {
    trace = e.trace();
    outcome = std::string(error_code_name(e.code()));
    o.check(e.code() == ErrorCode::DampingFloorReached,
            fmt("failure code %s", outcome.c_str()));
  }
  int halvings = 0, accepted = 0;
  bool admissible = true;
  for (const NewtonIteration& it : trace.iterations) {
    halvings += it.halvings;
    if (!it.accepted) continue;
    ++accepted;
    admissible = admissible && it.min_sv >= c.sigma && it.max_sv <= 1.0 / c.sigma &&
                 it.min_det >= c.det_min && it.max_det <= c.det_max;
  }
  std::printf("  outcome: %s after %zu rows, %d halvings\n", outcome.c_str(),
              trace.iterations.size(), halvings);
  o.check(halvings >= 1, fmt("%d alpha-halvings", halvings));
  o.check(admissible, fmt("replay: %d accepted rows all satisfy (C1) with sigma = 0.5", accepted));
  return o;
}

Outcome convergence_nonsymmetric() {
  Outcome o;
  StudyOptions opt;
  opt.rho = 0.1;
  opt.traction_kind = TractionSpec::Kind::Modulated;
  opt.eta = 0.1;
  opt.newton.sigma = opt.rho / 2;
  // The modulated load drives a strongly elongated state. The h = 0.05 and
  // 0.04 profiles are pre-asymptotic (the latter has several equilibria), so
  // the study uses the two finer profiles; the reference refines the finest.
  std::vector<MeshSpec> meshes;
  for (int row : {2, 3}) {
    const MeshTableRow r = mesh_table(0.01).at(row);
    meshes.push_back({profile_layers(0.1, r.layers, r.tau_min, r.tau_max), r.elements_per_layer, r.h});
  }
  const ConvergenceTable t = convergence_study(meshes, opt);
  print_table(t);
  o.check(t.rows.size() == 2, "study completed on two meshes");
  check_monotone(o, t);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  std::setvbuf(stdout, nullptr, _IOLBF, 0);
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"traction oracle", traction_oracle},
      {"material derivatives", material_derivatives},
      {"identity-state exactness", identity_state},
      {"linearisation consistency", linearisation},
      {"cavitation solve", cavitation_solve},
      {"symmetric convergence study", convergence_symmetric},
      {"inf-sup stability", infsup},
      {"damping machinery", damping},
      {"non-symmetric study", convergence_nonsymmetric},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  if (selected.empty()) {
    for (int i = 1; i <= 9; ++i) selected.push_back(i);
  }
  bool all = true;
  for (int n : selected) {
    if (n < 1 || n > 9) {
      std::fprintf(stderr, "unknown criterion %d\n", n);
      return 2;
    }
    std::printf("criterion %d (%s)\n", n, criteria[n - 1].first);
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[n - 1].second();
    } catch (const Error& e) {
      o.check(false, fmt("ERROR %s %s", std::string(error_code_name(e.code())).c_str(), e.what()));
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %d: %s (%.1f s)\n", n, o.pass ? "PASS" : "FAIL", secs);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
