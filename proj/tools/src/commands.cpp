#include "dpq2p1_cli/commands.hpp"

#include "dpq2p1/error.hpp"
#include "dpq2p1/verify.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>

namespace dpq2p1::cli {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string header(const RunConfig& config, const std::string& command) {
  return comment_block("command = " + command + "\n" + config.resolved());
}

Discretization make_disc(const RunConfig& config, const Mesh& mesh, const DofMap& dofs) {
  Discretization disc;
  disc.mesh = &mesh;
  disc.dofs = &dofs;
  disc.material = config.material;
  disc.quadrature_order = config.newton.quadrature_order;
  disc.jobs = config.jobs;
  return disc;
}

std::string trace_csv(const std::vector<NewtonTrace>& traces, const std::vector<double>& loads) {
  std::string out;
  for (std::size_t k = 0; k < traces.size(); ++k) {
    out += "# step " + std::to_string(k + 1) + " load " + num(loads.at(k)) + "\n";
    const std::string csv = traces[k].to_csv();
    // Keep the column line once, before the first step.
    out += k == 0 ? csv : csv.substr(csv.find('\n') + 1);
  }
  return out;
}

}  // namespace

RunConfig apply_overrides(RunConfig config, const Overrides& o) {
  if (o.out) config.output_dir = *o.out;
  if (o.jobs) config.jobs = *o.jobs;
  if (o.quadrature) config.newton.quadrature_order = *o.quadrature;
  if (o.pin_rotation) config.pin_rotation = true;
  config.validate();
  return config;
}

void cmd_mesh(const RunConfig& config, std::ostream& log) {
  const Mesh mesh = build_config_mesh(config.geometry);
  const MeshQualityReport q = check_regularity(mesh, 0.0);
  const fs::path dir = config.output_dir;
  write_text_file(dir / "mesh.txt", format_mesh(mesh));

  std::string csv = header(config, "mesh");
  csv += "# m1_pass = " + std::string(q.m1_pass ? "true" : "false") + "\n";
  csv += "# min_shape_ratio = " + num(q.min_shape_ratio) + "\n";
  csv += "element,layer,h_T,edge_ratio,shape_ratio\n";
  for (int i = 0; i < mesh.num_elements(); ++i) {
    const ElementQuality& e = q.elements[i];
    csv += std::to_string(i) + "," + std::to_string(mesh.elements[i].layer_index) + "," +
           num(e.h_T) + "," + num(e.edge_ratio) + "," + num(e.shape_ratio) + "\n";
  }
  write_text_file(dir / "mesh_quality.csv", csv);
  log << "mesh: " << mesh.num_elements() << " elements, " << mesh.num_nodes() << " nodes, h "
      << num(mesh.h) << ", edge ratio " << num(q.max_edge_ratio) << ", min shape ratio "
      << num(q.min_shape_ratio) << "\n";
}

void cmd_solve(const RunConfig& config, std::ostream& log) {
  const Mesh mesh = build_config_mesh(config.geometry);
  BoundaryConditions bc;
  bc.pin_rotation = config.pin_rotation;
  const DofMap dofs = build_dof_map(mesh, bc);
  const Discretization disc = make_disc(config, mesh, dofs);
  const TractionSpec traction = config.traction_spec();
  const fs::path dir = config.output_dir;

  ContinuationResult result;
  try {
    result = continuation_solve(disc, traction, config.continuation, config.newton_config());
  } catch (const NewtonError& e) {
    write_text_file(dir / "newton_trace.csv",
                    header(config, "solve") + "# failed at step " + std::to_string(e.step()) +
                        "\n" + e.trace().to_csv());
    throw;
  }

  write_text_file(dir / "solution.txt", format_solution(mesh, result.state));
  write_text_file(dir / "newton_trace.csv",
                  header(config, "solve") + trace_csv(result.traces, result.loads));

  int iterations = 0;
  for (const NewtonTrace& t : result.traces) iterations += static_cast<int>(t.iterations.size());
  const int order = config.newton.quadrature_order + config.study.error_order_increment;
  const double radius = deformed_inner_radius(mesh, result.state.u);
  const DetDefect det = det_defect(disc, result.state.u, order);

  std::string csv = header(config, "solve") + "quantity,value\n";
  csv += "converged,true\n";
  csv += "continuation_steps," + std::to_string(result.traces.size()) + "\n";
  csv += "newton_iterations," + std::to_string(iterations) + "\n";
  csv += "traction," + num(traction.magnitude) + "\n";
  csv += "deformation_dofs," + std::to_string(dofs.deformation_dofs()) + "\n";
  csv += "inner_radius," + num(radius) + "\n";
  csv += "det_l1," + num(det.l1) + "\n";
  csv += "det_l2," + num(det.l2) + "\n";
  if (traction.kind == TractionSpec::Kind::RadialConstant) {
    const double lambda = config.traction.auto_magnitude
                              ? config.traction.lambda
                              : lambda_for_traction(config.geometry.rho, traction.magnitude,
                                                    config.material);
    const AnalyticCavitation oracle(config.geometry.rho, lambda, config.material);
    const ErrorReport r =
        error_norms(disc, result.state, traction, analytic_reference(oracle), order);
    csv += "analytic_inner_radius," + num(oracle.radial_map(config.geometry.rho)) + "\n";
    csv += "energy_error," + num(r.energy_error) + "\n";
    csv += "w1s_error," + num(r.w1s_seminorm) + "\n";
    csv += "pressure_l2_error," + num(r.pressure_l2) + "\n";
  }
  write_text_file(dir / "summary.csv", csv);
  log << "solve: converged in " << result.traces.size() << " steps, " << iterations
      << " Newton iterations; inner radius " << num(radius) << ", det L1 " << num(det.l1)
      << "\n";
}

void cmd_convergence(const RunConfig& config, std::ostream& log) {
  StudyOptions opt;
  opt.rho = config.geometry.rho;
  opt.lambda = config.traction.lambda;
  opt.traction_kind = config.traction.kind;
  opt.eta = config.traction.eta;
  opt.material = config.material;
  opt.newton = config.newton_config();
  opt.continuation = config.continuation;
  opt.error_order_increment = config.study.error_order_increment;
  opt.pin_rotation = config.pin_rotation;
  opt.jobs = config.jobs;
  opt.reference_mesh = study_reference(config);
  if (!config.traction.auto_magnitude) {
    throw Error(ErrorCode::Config, "convergence requires traction.t = auto");
  }
  const ConvergenceTable table = convergence_study(study_meshes(config), opt);

  const fs::path dir = config.output_dir;
  const std::string head =
      header(config, "convergence") + "# reference = " + table.reference_label + "\n";
  write_text_file(dir / "convergence.csv", head + table.to_csv());

  const std::string suffix =
      config.traction.kind == TractionSpec::Kind::RadialConstant ? "sym" : "nonsym";
  struct Figure {
    const char* name;
    const char* columns;
    std::function<std::string(const ErrorReport&)> values;
  };
  const std::vector<Figure> figures = {
      {"energy", "dE", [](const ErrorReport& r) { return num(r.energy_error); }},
      {"w1s", "W1s", [](const ErrorReport& r) { return num(r.w1s_seminorm); }},
      {"det", "detL1,detL2",
       [](const ErrorReport& r) { return num(r.det_l1) + "," + num(r.det_l2); }},
      {"pressure", "pL2", [](const ErrorReport& r) { return num(r.pressure_l2); }},
      {"dofs", "N_d", [](const ErrorReport& r) { return std::to_string(r.deformation_dofs); }},
  };
  for (const Figure& f : figures) {
    std::string csv = head + "h," + f.columns + "\n";
    for (const ConvergenceRow& row : table.rows) {
      csv += num(row.errors.h) + "," + f.values(row.errors) + "\n";
    }
    write_text_file(dir / ("fig_" + std::string(f.name) + "_" + suffix + ".csv"), csv);
  }

  for (const ConvergenceRow& row : table.rows) {
    log << "convergence: " << row.layers << "x" << row.elements_per_layer << " h "
        << num(row.errors.h) << " N_d " << row.errors.deformation_dofs << " dE "
        << num(row.errors.energy_error) << " W1s " << num(row.errors.w1s_seminorm) << "\n";
  }
  log << "convergence: slopes N_d " << num(table.slope_dofs) << " dE " << num(table.slope_energy)
      << " W1s " << num(table.slope_w1s) << "\n";
}

void cmd_infsup(const RunConfig& config, std::ostream& log) {
  const bool identity = config.infsup.state == "identity";
  std::string csv = header(config, "infsup") +
                    "layers,elements_per_layer,h,num_u,num_p,state,min_sv,beta,eigen_residual\n";
  for (const MeshSize& m : config.infsup.meshes) {
    const Mesh mesh = build_annulus_mesh(config.geometry.rho,
                                         config_layers(config.geometry, m.layers),
                                         m.elements_per_layer);
    BoundaryConditions bc;
    bc.pin_rotation = config.pin_rotation;
    const DofMap dofs = build_dof_map(mesh, bc);
    const Discretization disc = make_disc(config, mesh, dofs);

    DiscreteState state;
    if (identity) {
      state.u = interpolate(mesh, [](const Vec2& x) { return x; });
    } else {
      const AnalyticCavitation oracle(config.geometry.rho, config.traction.lambda,
                                      config.material);
      state.u = interpolate(mesh, [&](const Vec2& x) { return oracle.displacement(x); });
    }
    state.p = Eigen::VectorXd::Zero(dofs.num_p);
    const CriterionResult c1 = check_c1(disc, state.u, 0.0, 0.0, 1e300);
    const InfSupReport r = infsup_constant(disc, state, config.infsup.state);
    csv += std::to_string(m.layers) + "," + std::to_string(m.elements_per_layer) + "," +
           num(r.h) + "," + std::to_string(r.num_u) + "," + std::to_string(r.num_p) + "," +
           config.infsup.state + "," + num(c1.min_sv) + "," + num(r.beta) + "," +
           num(r.eigen_residual) + "\n";
    log << "infsup: " << m.layers << "x" << m.elements_per_layer << " beta " << num(r.beta)
        << "\n";
  }
  write_text_file(fs::path(config.output_dir) / "infsup.csv", csv);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"DP-Q2-P1 mixed finite elements for incompressible nonlinear elasticity",
               "dpq2p1"};
  app.require_subcommand(1);
  std::string config_path;
  Overrides overrides;
  app.add_option("--config", config_path, "configuration file")->required();
  app.add_option("--out", overrides.out, "output directory");
  app.add_option("--jobs", overrides.jobs, "worker threads for element loops");
  app.add_option("--quadrature", overrides.quadrature, "Gauss points per direction");
  app.add_flag("--pin-rotation", overrides.pin_rotation, "constrain the rigid rotation");
  app.fallthrough();

  using Command = void (*)(const RunConfig&, std::ostream&);
  const std::vector<std::pair<std::string, Command>> commands = {
      {"mesh", cmd_mesh},
      {"solve", cmd_solve},
      {"convergence", cmd_convergence},
      {"infsup", cmd_infsup},
  };
  const std::vector<std::string> help = {
      "build the annulus mesh and report its quality",
      "solve by load continuation",
      "run a convergence study",
      "estimate the discrete inf-sup constant",
  };
  for (std::size_t i = 0; i < commands.size(); ++i) {
    app.add_subcommand(commands[i].first, help[i]);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "ERROR config " << e.what() << "\n";
    return 2;
  }

  try {
    const RunConfig config = apply_overrides(load_config(config_path), overrides);
    for (const auto& [name, command] : commands) {
      if (app.got_subcommand(name)) command(config, out);
    }
  } catch (const Error& e) {
    err << "ERROR " << error_code_name(e.code()) << " " << e.what() << "\n";
    return e.code() == ErrorCode::Config ? 2 : 1;
  } catch (const std::exception& e) {
    err << "ERROR internal " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace dpq2p1::cli
