#pragma once

#include "dpq2p1/assembly.hpp"
#include "dpq2p1/newton.hpp"
#include "dpq2p1/verify.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dpq2p1 {

/// One `layers x elements_per_layer` entry of a mesh list.
struct MeshSize {
  int layers = 0;
  int elements_per_layer = 0;
};

struct GeometryConfig {
  double rho = 0.1;
  int layers = 8;
  int elements_per_layer = 20;
  /// Thickness ratio of the outermost to the innermost layer (1 = uniform).
  double grading = 1.0;
  /// Row of table_rows(rho); -1 uses the grading.
  int table_row = -1;
};

struct TractionConfig {
  TractionSpec::Kind kind = TractionSpec::Kind::RadialConstant;
  /// Used when `auto_magnitude` is false.
  double magnitude = 0.0;
  bool auto_magnitude = true;
  /// Stretch of the analytic solution the automatic magnitude is taken from.
  double lambda = 2.0;
  double eta = 0.1;
};

struct StudyConfig {
  /// Empty means the tabulated meshes for geometry.rho.
  std::vector<MeshSize> meshes;
  /// Subset of the tabulated rows used when `meshes` is empty; empty means all.
  std::vector<int> table_rows;
  /// Reference mesh for the modulated load; 0x0 means automatic.
  MeshSize reference{};
  /// When >= 0, the reference is this tabulated row refined once.
  int reference_row = -1;
  int error_order_increment = 2;
};

struct InfSupConfig {
  std::vector<MeshSize> meshes{{2, 8}, {4, 16}, {8, 32}};
  /// `identity` or `analytic` (interpolant of the cavitation solution).
  std::string state = "identity";
};

struct RunConfig {
  MaterialParams material;
  GeometryConfig geometry;
  TractionConfig traction;
  NewtonConfig newton;
  /// newton.sigma = auto resolves to rho / 2.
  bool sigma_auto = true;
  ContinuationOptions continuation;
  bool pin_rotation = false;
  StudyConfig study;
  InfSupConfig infsup;
  std::string output_dir = "out";
  std::uint64_t seed = 0;
  int jobs = 1;

  /// Throws Error(Config) with a short detail such as "s out of (1,2)".
  void validate() const;
  /// Newton constants with sigma resolved.
  NewtonConfig newton_config() const;
  /// Configured magnitude, or t(rho, lambda) when automatic.
  TractionSpec traction_spec() const;
  /// All keys with their resolved values, in parse order, one `key = value` per line.
  std::string resolved() const;
};

/// Parses `[section]` headers and `key = value` lines; `#` starts a comment.
/// Unknown keys and malformed values throw Error(Config).
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Tabulated rows for rho = 0.01 and 0.0001; other radii reuse the rho = 0.01
/// layer profiles.
std::vector<MeshTableRow> table_rows(double rho);

/// Meshes of a convergence study: the selected tabulated rows, or the
/// configured LxN list with the geometry's grading.
std::vector<MeshSpec> study_meshes(const RunConfig& config);
/// Explicit reference mesh, if configured.
std::optional<MeshSpec> study_reference(const RunConfig& config);

/// Layers for the configured geometry: tabulated row or geometric grading.
std::vector<Layer> config_layers(const GeometryConfig& geometry, int layers);
Mesh build_config_mesh(const GeometryConfig& geometry);

/// Every line of `text` prefixed with "# ".
std::string comment_block(const std::string& text);
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace dpq2p1
