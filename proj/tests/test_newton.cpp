#include "dpq2p1/cavitation.hpp"
#include "dpq2p1/error.hpp"
#include "dpq2p1/newton.hpp"
#include "dpq2p1/verify.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <Eigen/SVD>

#include <cmath>
#include <random>

using namespace dpq2p1;

namespace {

Mesh cavity_mesh(int row = 0) {
  const MeshTableRow r = mesh_table(0.01).at(row);
  return build_annulus_mesh(0.1, profile_layers(0.1, r.layers, r.tau_min, r.tau_max),
                            r.elements_per_layer);
}

NewtonConfig cavity_config() {
  NewtonConfig c;
  c.sigma = 0.05;
  return c;
}

DiscreteState analytic_state(const test::Problem& pb, double lambda) {
  const AnalyticCavitation oracle(pb.mesh.inner_radius, lambda, pb.disc.material);
  return {interpolate(pb.mesh, [&](const Vec2& x) { return oracle.displacement(x); }),
          project_pressure(pb.mesh, [&](const Vec2& x) {
            return oracle.pressure(std::clamp(x.norm(), oracle.rho(), 1.0));
          })};
}

// Fitted K in inc_{k+1} <= K inc_k^2 over the undamped tail of a trace.
double quadratic_constant(const NewtonTrace& t) {
  double K = 0.0;
  const auto& it = t.iterations;
  for (std::size_t k = 1; k < it.size(); ++k) {
    if (it[k].alpha != 1.0 || it[k - 1].alpha != 1.0) continue;
    if (it[k - 1].inc_u > 1e-2 || it[k].inc_u < 1e-13) continue;
    K = std::max(K, it[k].inc_u / (it[k - 1].inc_u * it[k - 1].inc_u));
  }
  return K;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Io;
}

}  // namespace

TEST(Newton, SingularValuesMatchSvd) {
  std::mt19937 gen(21);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    const Mat2 F = Mat2::NullaryExpr([&] { return u(gen); });
    const Eigen::Vector2d sv = Eigen::JacobiSVD<Mat2>(F).singularValues();
    const Eigen::Vector2d mine = singular_values(F);
    EXPECT_NEAR(mine(0), sv(1), 1e-13);
    EXPECT_NEAR(mine(1), sv(0), 1e-13);
  }
}

TEST(Newton, ConfigValidation) {
  EXPECT_NO_THROW(NewtonConfig{}.validate());
  auto bad = [](auto edit) {
    NewtonConfig c;
    edit(c);
    return code_of([&] { c.validate(); });
  };
  EXPECT_EQ(bad([](NewtonConfig& c) { c.sigma = 1.0; }), ErrorCode::InvalidArgument);
  EXPECT_EQ(bad([](NewtonConfig& c) { c.det_max = 0.9; }), ErrorCode::InvalidArgument);
  EXPECT_EQ(bad([](NewtonConfig& c) { c.c2_bound = 1.0; }), ErrorCode::InvalidArgument);
  EXPECT_EQ(bad([](NewtonConfig& c) { c.alpha0 = 1.5; }), ErrorCode::InvalidArgument);
  EXPECT_EQ(bad([](NewtonConfig& c) { c.alpha_min = 2.0; }), ErrorCode::InvalidArgument);
}

TEST(Newton, CriterionC1) {
  test::Problem pb(isoparametric_copy(test::uniform_annulus(0.3, 2, 8)));
  const Eigen::VectorXd id = interpolate(pb.mesh, [](const Vec2& x) { return x; });
  EXPECT_TRUE(check_c1(pb.disc, id, 0.5, 0.1, 10.0).pass);
  const CriterionResult r = check_c1(pb.disc, 3.0 * id, 0.5, 0.1, 10.0);
  EXPECT_FALSE(r.pass);
  EXPECT_EQ(r.quantity, "lambda2");
  EXPECT_NEAR(r.value, 3.0, 1e-12);
}

TEST(Newton, CriterionC1HoldsForAnalyticCavityWithSigmaHalfRho) {
  test::Problem pb(cavity_mesh());
  const CriterionResult r = check_c1(pb.disc, analytic_state(pb, 2.0).u, 0.05, 1e-2, 1e2);
  EXPECT_TRUE(r.pass) << r.quantity << " " << r.value;
  EXPECT_GT(r.min_sv, 0.05);
  EXPECT_LT(r.max_sv, 20.0);
}

TEST(Newton, CriterionC2) {
  // Linear field on bilinear elements: no second derivatives.
  std::vector<Vec2> nodes;
  std::vector<Element> elements;
  for (int j = 0; j < 5; ++j) {
    for (int i = 0; i < 5; ++i) nodes.emplace_back(0.25 * i + 0.05 * j, 0.25 * j);
  }
  auto id = [](int i, int j) { return 5 * j + i; };
  for (int j = 0; j < 2; ++j) {
    for (int i = 0; i < 2; ++i) {
      const int i0 = 2 * i, j0 = 2 * j;
      std::array<int, 9> n = {id(i0, j0),     id(i0 + 2, j0),     id(i0 + 2, j0 + 2),
                              id(i0, j0 + 2), id(i0 + 1, j0),     id(i0 + 2, j0 + 1),
                              id(i0 + 1, j0 + 2), id(i0, j0 + 1), id(i0 + 1, j0 + 1)};
      elements.push_back({DualParametricMap::bilinear({nodes[n[0]], nodes[n[1]], nodes[n[2]],
                                                       nodes[n[3]]}),
                          n, 0});
    }
  }
  test::Problem flat(build_mesh(nodes, elements));
  Mat2 M;
  M << 1.2, 0.3, -0.4, 0.9;
  const Eigen::VectorXd lin = interpolate(flat.mesh, [&](const Vec2& x) { return Vec2(M * x); });
  const CriterionResult ok = check_c2(flat.disc, lin, 1.0 + 1e-9);
  EXPECT_TRUE(ok.pass);
  EXPECT_LT(ok.max_scaled_hessian, 1e-10);

  test::Problem pb(test::uniform_annulus(0.2, 8, 32));
  Eigen::VectorXd osc(pb.dofs.num_u);
  for (int i = 0; i < osc.size(); ++i) osc(i) = (i / 2) % 2 ? -1.0 : 1.0;
  EXPECT_FALSE(check_c2(pb.disc, osc, 1.0).pass);
}

TEST(Newton, CriterionC2OnAnalyticInterpolants) {
  // The observed maximum is recorded; the bound used by the solver is 1e3.
  for (const MeshTableRow& row : mesh_table(0.01)) {
    test::Problem pb(build_table_mesh(0.01, row));
    const CriterionResult r = check_c2(pb.disc, analytic_state(pb, 2.0).u, 1e3);
    EXPECT_TRUE(r.pass);
    RecordProperty("max_scaled_hessian_h" + std::to_string(row.h), std::to_string(r.max_scaled_hessian));
  }
}

TEST(Newton, IdentityStateConvergesInOneIteration) {
  BoundaryConditions bc;
  bc.pin_rotation = true;
  test::Problem pb(isoparametric_copy(build_table_mesh(0.01, mesh_table(0.01).front())), bc);
  DiscreteState s{interpolate(pb.mesh, [](const Vec2& x) { return x; }),
                  Eigen::VectorXd::Zero(pb.dofs.num_p)};
  for (int ie = 0; ie < pb.mesh.num_elements(); ++ie) s.p(3 * ie) = identity_pressure({});
  const NewtonResult r = newton_solve(pb.disc, s, TractionSpec::radial(0.0), NewtonConfig{});
  ASSERT_TRUE(r.trace.converged);
  ASSERT_EQ(r.trace.iterations.size(), 1u);
  EXPECT_LE(r.trace.iterations[0].inc_u, 1e-10);
  EXPECT_LE(r.trace.iterations[0].inc_p, 1e-10);
}

TEST(Newton, CavitySolveFromNearbyAnalyticState) {
  test::Problem pb(cavity_mesh());
  const double t = traction_for(0.1, 2.0);
  const NewtonResult r =
      newton_solve(pb.disc, analytic_state(pb, 1.9), TractionSpec::radial(t), cavity_config());
  ASSERT_TRUE(r.trace.converged);
  EXPECT_NEAR(deformed_inner_radius(pb.mesh, r.state.u), std::sqrt(3.01), 1e-3);
  for (const NewtonIteration& it : r.trace.iterations) {
    EXPECT_GE(it.min_sv, 0.05);
    EXPECT_LE(it.max_sv, 20.0);
  }
}

TEST(Newton, QuadraticConvergenceConstantIsStableAcrossMeshes) {
  double K[2];
  for (int row = 0; row < 2; ++row) {
    test::Problem pb(cavity_mesh(row));
    const NewtonResult r = newton_solve(pb.disc, analytic_state(pb, 1.9),
                                        TractionSpec::radial(traction_for(0.1, 2.0)),
                                        cavity_config());
    ASSERT_TRUE(r.trace.converged);
    K[row] = quadratic_constant(r.trace);
    EXPECT_GT(K[row], 0.0);
    RecordProperty("K_row" + std::to_string(row), std::to_string(K[row]));
  }
  EXPECT_LT(std::max(K[0], K[1]) / std::min(K[0], K[1]), 10.0);
}

TEST(Newton, DampingBookkeepingAndDeterminism) {
  test::Problem pb(cavity_mesh());
  NewtonConfig c = cavity_config();
  c.alpha0 = 0.5;
  const TractionSpec t = TractionSpec::radial(traction_for(0.1, 2.0));
  const NewtonResult a = newton_solve(pb.disc, analytic_state(pb, 1.5), t, c);
  const NewtonResult b = newton_solve(pb.disc, analytic_state(pb, 1.5), t, c);
  EXPECT_EQ(a.trace.to_csv(), b.trace.to_csv());
  const auto& it = a.trace.iterations;
  ASSERT_GT(it.size(), 2u);
  double expected = c.alpha0;
  for (const NewtonIteration& row : it) {
    EXPECT_LE(row.alpha, c.alpha0);
    EXPECT_EQ(row.alpha * std::pow(2.0, row.halvings), expected);
    expected = std::min(c.alpha0, 2.0 * row.alpha);
  }
}

TEST(Newton, OverStretchedStartTriggersDamping) {
  test::Problem pb(cavity_mesh());
  DiscreteState s{3.0 * interpolate(pb.mesh, [](const Vec2& x) { return x; }),
                  Eigen::VectorXd::Zero(pb.dofs.num_p)};
  NewtonConfig c;
  c.sigma = 0.5;
  try {
    const NewtonResult r = newton_solve(pb.disc, s, TractionSpec::radial(traction_for(0.1, 2.0)), c);
    int halvings = 0;
    for (const NewtonIteration& row : r.trace.iterations) halvings += row.halvings;
    EXPECT_GE(halvings, 1);
  } catch (const NewtonError& e) {
    EXPECT_EQ(e.code(), ErrorCode::DampingFloorReached);
    ASSERT_FALSE(e.trace().iterations.empty());
    EXPECT_FALSE(e.trace().iterations.back().accepted);
    EXPECT_GE(e.trace().iterations.back().halvings, 1);
  }
}

TEST(Newton, TraceCsvColumns) {
  NewtonTrace t;
  t.iterations.push_back({});
  const std::string csv = t.to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "iter,alpha,halvings,res_u,res_p,inc_u,inc_p,min_det,max_det,min_sv,max_sv,energy");
}

TEST(Continuation, RejectsZeroStepsAndConvergesInOneStepFromWarmStart) {
  test::Problem pb(cavity_mesh());
  ContinuationOptions o;
  o.steps = 0;
  EXPECT_EQ(code_of([&] {
              continuation_solve(pb.disc, TractionSpec::radial(3.0), o, cavity_config());
            }),
            ErrorCode::InvalidArgument);
  o.steps = 1;
  o.lambda0 = 1.9;
  const ContinuationResult r = continuation_solve(
      pb.disc, TractionSpec::radial(traction_for(0.1, 2.0)), o, cavity_config());
  ASSERT_EQ(r.traces.size(), 1u);
  EXPECT_TRUE(r.traces[0].converged);
}

TEST(Continuation, RampsLinearlyToTarget) {
  test::Problem pb(cavity_mesh());
  ContinuationOptions o;
  o.steps = 4;
  const double t = traction_for(0.1, 2.0);
  const ContinuationResult r =
      continuation_solve(pb.disc, TractionSpec::radial(t), o, cavity_config());
  ASSERT_EQ(r.loads.size(), 4u);
  EXPECT_DOUBLE_EQ(r.loads.back(), t);
  for (std::size_t k = 2; k < r.loads.size(); ++k) {
    EXPECT_NEAR(r.loads[k] - r.loads[k - 1], r.loads[1] - r.loads[0], 1e-12);
  }
  EXPECT_NEAR(deformed_inner_radius(pb.mesh, r.state.u), std::sqrt(3.01), 1e-3);
}
