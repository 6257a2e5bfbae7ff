#pragma once

#include "dpq2p1/config.hpp"

#include <optional>
#include <ostream>
#include <string>

namespace dpq2p1::cli {

/// Command-line flags that override config keys.
struct Overrides {
  std::optional<std::string> out;
  std::optional<int> jobs;
  std::optional<int> quadrature;
  bool pin_rotation = false;
};

/// Applies the overrides and re-validates.
RunConfig apply_overrides(RunConfig config, const Overrides& overrides);

/// Writes mesh.txt and mesh_quality.csv.
void cmd_mesh(const RunConfig& config, std::ostream& log);
/// Writes solution.txt, newton_trace.csv and summary.csv. On a Newton failure
/// the partial trace is written before the error propagates.
void cmd_solve(const RunConfig& config, std::ostream& log);
/// Writes convergence.csv and the per-figure fig_*_{sym,nonsym}.csv files.
void cmd_convergence(const RunConfig& config, std::ostream& log);
/// Writes infsup.csv.
void cmd_infsup(const RunConfig& config, std::ostream& log);

/// Full driver: parses arguments, runs the subcommand, prints
/// `ERROR <code> <detail>` to `err` on failure. Returns 0 on success, 2 for
/// configuration and usage errors, 1 otherwise.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dpq2p1::cli
