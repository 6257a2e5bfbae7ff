#pragma once

#include "dpq2p1/basis.hpp"

#include <Eigen/Core>
#include <Eigen/LU>

#include <array>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace dpq2p1 {

/// Ring sector: R and theta are affine in xhat1 and xhat2 respectively.
struct PolarSector {
  double r_inner = 0.0;
  double r_outer = 0.0;
  double theta_begin = 0.0;
  double theta_end = 0.0;
};

struct MapJacobian {
  Mat2 matrix;  // d x_i / d xhat_j
  double det = 0.0;
};

/// Geometry map F_T from the reference square onto a (curved) quadrilateral.
class DualParametricMap {
 public:
  enum class Kind { Polar, Bilinear, Biquadratic };

  /// Requires r_outer > r_inner > 0 and 0 < theta_end - theta_begin <= pi/2.
  static DualParametricMap polar(double r_inner, double r_outer, double theta_begin,
                                 double theta_end);
  /// Vertices a0..a3, anticlockwise.
  static DualParametricMap bilinear(const std::array<Vec2, 4>& vertices);
  /// Nodes a0..a8 in reference-node order.
  static DualParametricMap biquadratic(const std::array<Vec2, 9>& nodes);

  Kind kind() const;
  /// Only valid for Kind::Polar.
  const PolarSector& sector() const;

  Vec2 eval(const Vec2& xhat) const;
  MapJacobian jacobian(const Vec2& xhat) const;
  /// Second derivatives of each physical coordinate: result[k](i, j) is
  /// d^2 x_k / d xhat_i d xhat_j.
  std::array<Mat2, 2> hessian(const Vec2& xhat) const;

 private:
  using Storage = std::variant<PolarSector, std::array<Vec2, 4>, std::array<Vec2, 9>>;
  explicit DualParametricMap(Storage storage) : storage_(std::move(storage)) {}
  Storage storage_;
};

inline Vec2 eval_map(const DualParametricMap& map, const Vec2& xhat) { return map.eval(xhat); }
inline MapJacobian eval_map_jacobian(const DualParametricMap& map, const Vec2& xhat) {
  return map.jacobian(xhat);
}

struct Element {
  DualParametricMap map;
  std::array<int, 9> node_ids{};
  int layer_index = 0;
};

/// The four sides of the reference square.
enum class EdgeSide { XiMinus, XiPlus, EtaMinus, EtaPlus };

struct BoundaryEdge {
  int element = 0;
  EdgeSide side = EdgeSide::XiPlus;
};

struct Layer {
  double inner_radius = 0.0;
  double thickness = 0.0;
};

/// Conforming mesh of dual-parametric quadrilaterals. Immutable once built.
struct Mesh {
  std::vector<Vec2> nodes;
  std::vector<Element> elements;
  double inner_radius = 0.0;
  double outer_radius = 0.0;
  std::vector<Layer> layers;
  int elements_per_layer = 0;
  /// Nominal size: the largest element size h_T, or the table h for table meshes.
  double h = 0.0;
  /// Edges carrying the applied traction.
  std::vector<BoundaryEdge> loaded_edges;
  /// Traction-free boundary edges.
  std::vector<BoundaryEdge> free_edges;
  /// Per-element size h_T: the longest of the four (curved) edges.
  std::vector<double> element_h;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_elements() const { return static_cast<int>(elements.size()); }
  bool is_annulus() const { return elements_per_layer > 0; }
};

/// Builds an annulus B_1 \ B_rho of layers x N ring-sector elements.
///
/// Layers are listed from the cavity outwards; their thicknesses must sum to
/// 1 - rho within 1e-10. Global nodes are keyed by (radial index, angular
/// index) so shared edges reference identical ids without coordinate hashing.
Mesh build_annulus_mesh(double rho, const std::vector<Layer>& layers, int elements_per_layer);

/// Builds a mesh from explicit elements. Node coordinates are checked against
/// F_T at the reference nodes and det(dx/dxhat) > 0 at the 3x3 Gauss points.
Mesh build_mesh(std::vector<Vec2> nodes, std::vector<Element> elements,
                std::vector<BoundaryEdge> loaded_edges = {},
                std::vector<BoundaryEdge> free_edges = {});

/// Layers with thickness growing geometrically (tau_{i+1} = gamma tau_i),
/// normalised to sum to 1 - rho.
std::vector<Layer> geometric_layers(double rho, int count, double gamma);

/// Layers with prescribed minimum and maximum thickness: tau_i = tau_min +
/// (tau_max - tau_min) (i / (count - 1))^k, with k chosen so the thicknesses sum
/// to 1 - rho. Reproduces the (layers, min tau, max tau) rows of the reference
/// mesh tables.
std::vector<Layer> profile_layers(double rho, int count, double tau_min, double tau_max);

/// A row of the reference mesh tables for rho = 0.01 and rho = 0.0001.
struct MeshTableRow {
  double h;
  double tau_min;
  double tau_max;
  int layers;
  int elements_per_layer;
};

/// The four rows (h = 0.05, 0.04, 0.03, 0.02) for the given rho. Only
/// rho = 0.01 and rho = 0.0001 are tabulated; other values throw.
std::vector<MeshTableRow> mesh_table(double rho);
Mesh build_table_mesh(double rho, const MeshTableRow& row);

/// Same nodes and connectivity with every element map replaced by the
/// biquadratic interpolant of its nine nodes. The Q2 space then contains the
/// identity map exactly.
Mesh isoparametric_copy(const Mesh& mesh);

/// Sum of element areas by n x n Gauss quadrature of det(dx/dxhat).
double mesh_area(const Mesh& mesh, int quadrature_order = 3);

/// Locates the element containing x in an annulus mesh. Returns the element
/// index and reference coordinates, or nullopt outside the annulus.
std::optional<std::pair<int, Vec2>> locate(const Mesh& mesh, const Vec2& x);

/// Arc length of one side of an element, by 10-point Gauss quadrature.
double edge_length(const Element& element, EdgeSide side);

struct ElementQuality {
  std::array<double, 4> edge_lengths{};  // a0a1, a1a2, a2a3, a3a0
  double h_T = 0.0;
  Vec2 l1 = Vec2::Zero();
  Vec2 l2 = Vec2::Zero();
  double shape_ratio = 0.0;  // h_T^{-2} |l1 ^ l2|
  double edge_ratio = 0.0;   // max / min edge length
};

struct MeshQualityReport {
  std::vector<ElementQuality> elements;
  double min_edge_ratio = 0.0;
  double max_edge_ratio = 0.0;
  double min_h = 0.0;
  double max_h = 0.0;
  double min_shape_ratio = 0.0;
  double max_shape_ratio = 0.0;
  /// Quasi-uniform edges: per-element edge ratio <= kMaxEdgeRatio and
  /// max h_T / min h_T <= kMaxEdgeRatio.
  bool m1_pass = false;
  /// Minimum-angle condition: shape ratio >= c_min on every element.
  bool m2_pass = false;
  std::vector<int> m1_failures;
  std::vector<int> m2_failures;

  static constexpr double kMaxEdgeRatio = 4.0;
};

MeshQualityReport check_regularity(const Mesh& mesh, double c_min);

/// Mesh dump, `dpq2p1-mesh v1` format.
std::string format_mesh(const Mesh& mesh);

}  // namespace dpq2p1
