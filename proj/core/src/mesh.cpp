#include "dpq2p1/mesh.hpp"

#include "dpq2p1/error.hpp"
#include "dpq2p1/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <tuple>

namespace dpq2p1 {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Reference point and unit tangent parameter direction of an edge.
Vec2 edge_point(EdgeSide side, double t) {
  switch (side) {
    case EdgeSide::XiMinus: return {-1.0, t};
    case EdgeSide::XiPlus: return {1.0, t};
    case EdgeSide::EtaMinus: return {t, -1.0};
    case EdgeSide::EtaPlus: return {t, 1.0};
  }
  return {0.0, 0.0};
}

int edge_axis(EdgeSide side) {
  return (side == EdgeSide::XiMinus || side == EdgeSide::XiPlus) ? 1 : 0;
}

// Local node ids along each side: two ends and the midpoint.
std::array<int, 3> edge_nodes(EdgeSide side) {
  switch (side) {
    case EdgeSide::EtaMinus: return {0, 1, 4};
    case EdgeSide::XiPlus: return {1, 2, 5};
    case EdgeSide::EtaPlus: return {3, 2, 6};
    case EdgeSide::XiMinus: return {0, 3, 7};
  }
  return {0, 0, 0};
}

void check_element(const Element& e, const std::vector<Vec2>& nodes, int index) {
  for (int k = 0; k < 9; ++k) {
    const int id = e.node_ids[k];
    if (id < 0 || id >= static_cast<int>(nodes.size())) {
      throw Error(ErrorCode::InvalidArgument,
                  "element " + std::to_string(index) + " references missing node");
    }
    const Vec2 mapped = e.map.eval(reference_node(k));
    const double scale = std::max(mapped.norm(), std::numeric_limits<double>::min());
    if ((mapped - nodes[id]).norm() > 1e-12 * scale) {
      throw Error(ErrorCode::InvalidArgument, "node " + std::to_string(id) + " of element " +
                                                  std::to_string(index) +
                                                  " does not match F_T at its reference node");
    }
  }
  const QuadratureRule rule = gauss_rule(3);
  for (const Vec2& q : rule.points) {
    if (!(e.map.jacobian(q).det > 0.0)) {
      throw Error(ErrorCode::SingularGeometryJacobian,
                  "element " + std::to_string(index) + " has det(dx/dxhat) <= 0");
    }
  }
}

void check_conformity(const std::vector<Element>& elements) {
  // Keyed by sorted end nodes; the midpoint id must agree between neighbours.
  std::map<std::pair<int, int>, std::pair<int, int>> edges;  // -> (mid, count)
  for (std::size_t ie = 0; ie < elements.size(); ++ie) {
    for (EdgeSide side : {EdgeSide::EtaMinus, EdgeSide::XiPlus, EdgeSide::EtaPlus,
                          EdgeSide::XiMinus}) {
      const auto local = edge_nodes(side);
      const auto& ids = elements[ie].node_ids;
      const int a = std::min(ids[local[0]], ids[local[1]]);
      const int b = std::max(ids[local[0]], ids[local[1]]);
      auto [it, inserted] = edges.try_emplace({a, b}, ids[local[2]], 0);
      if (!inserted && it->second.first != ids[local[2]]) {
        throw Error(ErrorCode::InvalidArgument, "non-conforming edge at element " +
                                                    std::to_string(ie));
      }
      if (++it->second.second > 2) {
        throw Error(ErrorCode::InvalidArgument, "edge shared by more than two elements");
      }
    }
  }
}

}  // namespace

DualParametricMap DualParametricMap::polar(double r_inner, double r_outer, double theta_begin,
                                           double theta_end) {
  if (!(r_inner > 0.0) || !(r_outer > r_inner)) {
    throw Error(ErrorCode::NonPositiveRadius, "polar map requires R1 > R0 > 0");
  }
  if (!(theta_end > theta_begin)) {
    throw Error(ErrorCode::DegenerateSector, "polar map requires theta3 > theta0");
  }
  if (theta_end - theta_begin > 0.5 * std::numbers::pi * (1.0 + 1e-14)) {
    throw Error(ErrorCode::DegenerateSector, "polar sector wider than pi/2");
  }
  return DualParametricMap(PolarSector{r_inner, r_outer, theta_begin, theta_end});
}

DualParametricMap DualParametricMap::bilinear(const std::array<Vec2, 4>& vertices) {
  return DualParametricMap(vertices);
}

DualParametricMap DualParametricMap::biquadratic(const std::array<Vec2, 9>& nodes) {
  return DualParametricMap(nodes);
}

DualParametricMap::Kind DualParametricMap::kind() const {
  switch (storage_.index()) {
    case 0: return Kind::Polar;
    case 1: return Kind::Bilinear;
    default: return Kind::Biquadratic;
  }
}

const PolarSector& DualParametricMap::sector() const {
  if (const auto* s = std::get_if<PolarSector>(&storage_)) return *s;
  throw Error(ErrorCode::InvalidArgument, "map is not polar");
}

Vec2 DualParametricMap::eval(const Vec2& xhat) const {
  return std::visit(
      Overloaded{
          [&](const PolarSector& s) -> Vec2 {
            const double R = s.r_inner + 0.5 * (xhat.x() + 1.0) * (s.r_outer - s.r_inner);
            const double th =
                s.theta_begin + 0.5 * (xhat.y() + 1.0) * (s.theta_end - s.theta_begin);
            return {R * std::cos(th), R * std::sin(th)};
          },
          [&](const std::array<Vec2, 4>& v) -> Vec2 {
            const auto phi = ReferenceBasisQ1::values(xhat);
            Vec2 x = Vec2::Zero();
            for (int k = 0; k < 4; ++k) x += phi[k] * v[k];
            return x;
          },
          [&](const std::array<Vec2, 9>& v) -> Vec2 {
            const auto phi = ReferenceBasisQ2::values(xhat);
            Vec2 x = Vec2::Zero();
            for (int k = 0; k < 9; ++k) x += phi[k] * v[k];
            return x;
          }},
      storage_);
}

MapJacobian DualParametricMap::jacobian(const Vec2& xhat) const {
  Mat2 G = std::visit(
      Overloaded{
          [&](const PolarSector& s) -> Mat2 {
            const double a = 0.5 * (s.r_outer - s.r_inner);
            const double b = 0.5 * (s.theta_end - s.theta_begin);
            const double R = s.r_inner + (xhat.x() + 1.0) * a;
            const double th = s.theta_begin + (xhat.y() + 1.0) * b;
            const double c = std::cos(th);
            const double sn = std::sin(th);
            Mat2 m;
            m << a * c, -R * b * sn, a * sn, R * b * c;
            return m;
          },
          [&](const std::array<Vec2, 4>& v) -> Mat2 {
            const auto dphi = ReferenceBasisQ1::gradients(xhat);
            Mat2 m = Mat2::Zero();
            for (int k = 0; k < 4; ++k) m += v[k] * dphi[k].transpose();
            return m;
          },
          [&](const std::array<Vec2, 9>& v) -> Mat2 {
            const auto dphi = ReferenceBasisQ2::gradients(xhat);
            Mat2 m = Mat2::Zero();
            for (int k = 0; k < 9; ++k) m += v[k] * dphi[k].transpose();
            return m;
          }},
      storage_);
  double det = G.determinant();
  if (const auto* s = std::get_if<PolarSector>(&storage_)) {
    const double R = s->r_inner + 0.5 * (xhat.x() + 1.0) * (s->r_outer - s->r_inner);
    det = R * (s->r_outer - s->r_inner) * (s->theta_end - s->theta_begin) / 4.0;
  }
  return {G, det};
}

std::array<Mat2, 2> DualParametricMap::hessian(const Vec2& xhat) const {
  return std::visit(
      Overloaded{
          [&](const PolarSector& s) -> std::array<Mat2, 2> {
            const double a = 0.5 * (s.r_outer - s.r_inner);
            const double b = 0.5 * (s.theta_end - s.theta_begin);
            const double R = s.r_inner + (xhat.x() + 1.0) * a;
            const double th = s.theta_begin + (xhat.y() + 1.0) * b;
            const double c = std::cos(th);
            const double sn = std::sin(th);
            std::array<Mat2, 2> h;
            h[0] << 0.0, -a * b * sn, -a * b * sn, -R * b * b * c;
            h[1] << 0.0, a * b * c, a * b * c, -R * b * b * sn;
            return h;
          },
          [&](const std::array<Vec2, 4>& v) -> std::array<Mat2, 2> {
            const auto hp = ReferenceBasisQ1::hessians(xhat);
            std::array<Mat2, 2> h{Mat2::Zero(), Mat2::Zero()};
            for (int k = 0; k < 4; ++k) {
              h[0] += v[k].x() * hp[k];
              h[1] += v[k].y() * hp[k];
            }
            return h;
          },
          [&](const std::array<Vec2, 9>& v) -> std::array<Mat2, 2> {
            const auto hp = ReferenceBasisQ2::hessians(xhat);
            std::array<Mat2, 2> h{Mat2::Zero(), Mat2::Zero()};
            for (int k = 0; k < 9; ++k) {
              h[0] += v[k].x() * hp[k];
              h[1] += v[k].y() * hp[k];
            }
            return h;
          }},
      storage_);
}

Mesh build_mesh(std::vector<Vec2> nodes, std::vector<Element> elements,
                std::vector<BoundaryEdge> loaded_edges, std::vector<BoundaryEdge> free_edges) {
  for (std::size_t i = 0; i < elements.size(); ++i) {
    check_element(elements[i], nodes, static_cast<int>(i));
  }
  check_conformity(elements);
  Mesh mesh;
  mesh.nodes = std::move(nodes);
  mesh.elements = std::move(elements);
  mesh.loaded_edges = std::move(loaded_edges);
  mesh.free_edges = std::move(free_edges);
  mesh.element_h.reserve(mesh.elements.size());
  for (const Element& e : mesh.elements) {
    double hT = 0.0;
    for (EdgeSide side : {EdgeSide::EtaMinus, EdgeSide::XiPlus, EdgeSide::EtaPlus,
                          EdgeSide::XiMinus}) {
      hT = std::max(hT, edge_length(e, side));
    }
    mesh.element_h.push_back(hT);
    mesh.h = std::max(mesh.h, hT);
  }
  return mesh;
}

Mesh build_annulus_mesh(double rho, const std::vector<Layer>& layers, int elements_per_layer) {
  if (!(rho > 0.0) || !(rho < 1.0)) {
    throw Error(ErrorCode::NonPositiveRadius, "cavity radius must lie in (0, 1)");
  }
  if (layers.empty()) throw Error(ErrorCode::LayerSumMismatch, "no layers given");
  double sum = 0.0;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    if (!(layers[k].thickness > 0.0)) {
      throw Error(ErrorCode::NonPositiveRadius, "layer " + std::to_string(k) +
                                                    " has non-positive thickness");
    }
    if (std::abs(layers[k].inner_radius - (rho + sum)) > 1e-10) {
      throw Error(ErrorCode::LayerSumMismatch,
                  "layer " + std::to_string(k) + " inner radius does not continue the stack");
    }
    sum += layers[k].thickness;
  }
  if (std::abs(sum - (1.0 - rho)) > 1e-10) {
    throw Error(ErrorCode::LayerSumMismatch, "layer thicknesses sum to " + fmt17(sum) +
                                                 ", expected 1 - rho = " + fmt17(1.0 - rho));
  }
  if (elements_per_layer < 3) {
    throw Error(ErrorCode::InvalidArgument, "at least 3 elements per layer required");
  }
  if (kTwoPi / elements_per_layer > 0.5 * std::numbers::pi * (1.0 + 1e-14)) {
    throw Error(ErrorCode::DegenerateSector,
                "sector angle 2pi/" + std::to_string(elements_per_layer) +
                    " exceeds pi/2; increase N");
  }

  const int L = static_cast<int>(layers.size());
  const int N = elements_per_layer;
  const int radial = 2 * L + 1;
  const int angular = 2 * N;

  std::vector<double> bounds(L + 1);
  bounds[0] = rho;
  for (int k = 0; k < L; ++k) bounds[k + 1] = bounds[k] + layers[k].thickness;
  bounds[L] = 1.0;

  std::vector<double> radii(radial);
  for (int k = 0; k < L; ++k) {
    radii[2 * k] = bounds[k];
    radii[2 * k + 1] = bounds[k] + 0.5 * (bounds[k + 1] - bounds[k]);
  }
  radii[2 * L] = bounds[L];

  const double dtheta = kTwoPi / N;
  auto node_id = [&](int i, int j) { return i * angular + (j % angular); };

  std::vector<Vec2> nodes(static_cast<std::size_t>(radial) * angular);
  for (int i = 0; i < radial; ++i) {
    for (int j = 0; j < angular; ++j) {
      const double th = 0.5 * dtheta * j;
      nodes[node_id(i, j)] = {radii[i] * std::cos(th), radii[i] * std::sin(th)};
    }
  }

  std::vector<Element> elements;
  elements.reserve(static_cast<std::size_t>(L) * N);
  for (int k = 0; k < L; ++k) {
    for (int m = 0; m < N; ++m) {
      Element e{DualParametricMap::polar(bounds[k], bounds[k + 1], m * dtheta, (m + 1) * dtheta),
                {},
                k};
      for (int a = 0; a < 9; ++a) {
        const int i = 2 * k + static_cast<int>(kReferenceNodes[a][0]) + 1;
        const int j = 2 * m + static_cast<int>(kReferenceNodes[a][1]) + 1;
        e.node_ids[a] = node_id(i, j);
      }
      elements.push_back(std::move(e));
    }
  }

  std::vector<BoundaryEdge> outer;
  std::vector<BoundaryEdge> inner;
  for (int m = 0; m < N; ++m) {
    outer.push_back({(L - 1) * N + m, EdgeSide::XiPlus});
    inner.push_back({m, EdgeSide::XiMinus});
  }

  Mesh mesh = build_mesh(std::move(nodes), std::move(elements), std::move(outer),
                         std::move(inner));
  mesh.inner_radius = rho;
  mesh.outer_radius = 1.0;
  mesh.layers = layers;
  mesh.elements_per_layer = N;
  return mesh;
}

std::vector<Layer> geometric_layers(double rho, int count, double gamma) {
  if (count < 1 || !(gamma >= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "geometric grading needs count >= 1, gamma >= 1");
  }
  std::vector<double> tau(count);
  double t = 1.0;
  double total = 0.0;
  for (int i = 0; i < count; ++i) {
    tau[i] = t;
    total += t;
    t *= gamma;
  }
  std::vector<Layer> layers(count);
  double r = rho;
  for (int i = 0; i < count; ++i) {
    layers[i] = {r, tau[i] * (1.0 - rho) / total};
    r += layers[i].thickness;
  }
  return layers;
}

std::vector<Layer> profile_layers(double rho, int count, double tau_min, double tau_max) {
  const double span = 1.0 - rho;
  if (count < 2 || !(tau_min > 0.0) || !(tau_max > tau_min) ||
      !(count * tau_min < span) || !(count * tau_max > span)) {
    throw Error(ErrorCode::LayerSumMismatch,
                "no layer profile with the given count and thickness bounds fills 1 - rho");
  }
  auto thicknesses = [&](double k) {
    std::vector<double> tau(count);
    for (int i = 0; i < count; ++i) {
      const double s = static_cast<double>(i) / (count - 1);
      tau[i] = tau_min + (tau_max - tau_min) * std::pow(s, k);
    }
    return tau;
  };
  auto total = [&](double k) {
    double sum = 0.0;
    for (double t : thicknesses(k)) sum += t;
    return sum;
  };
  // The sum decreases monotonically in k; bisect in log k.
  double lo = std::log(1e-4);
  double hi = std::log(1e4);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (total(std::exp(mid)) > span ? lo : hi) = mid;
  }
  std::vector<double> tau = thicknesses(std::exp(0.5 * (lo + hi)));
  // Absorb the bisection residual into the interior layers.
  double sum = 0.0;
  for (double t : tau) sum += t;
  const double scale = (span - tau.front() - tau.back()) / (sum - tau.front() - tau.back());
  for (int i = 1; i + 1 < count; ++i) tau[i] *= scale;

  std::vector<Layer> layers(count);
  double r = rho;
  for (int i = 0; i < count; ++i) {
    layers[i] = {r, tau[i]};
    r += tau[i];
  }
  return layers;
}

std::vector<MeshTableRow> mesh_table(double rho) {
  if (rho == 0.01) {
    return {{0.05, 0.0300, 0.1900, 8, 20},
            {0.04, 0.0224, 0.1376, 11, 26},
            {0.03, 0.0156, 0.1164, 14, 34},
            {0.02, 0.0096, 0.0736, 22, 50}};
  }
  if (rho == 0.0001) {
    return {{0.05, 0.0120, 0.1720, 9, 24},
            {0.04, 0.0080, 0.1360, 12, 28},
            {0.03, 0.0048, 0.1056, 16, 38},
            {0.02, 0.0024, 0.0728, 22, 56}};
  }
  throw Error(ErrorCode::InvalidArgument, "no mesh table for rho = " + fmt17(rho));
}

Mesh build_table_mesh(double rho, const MeshTableRow& row) {
  Mesh mesh = build_annulus_mesh(
      rho, profile_layers(rho, row.layers, row.tau_min, row.tau_max), row.elements_per_layer);
  mesh.h = row.h;
  return mesh;
}

Mesh isoparametric_copy(const Mesh& mesh) {
  std::vector<Element> elements = mesh.elements;
  for (Element& e : elements) {
    std::array<Vec2, 9> nodes;
    for (int k = 0; k < 9; ++k) nodes[k] = mesh.nodes[e.node_ids[k]];
    e.map = DualParametricMap::biquadratic(nodes);
  }
  Mesh out = build_mesh(mesh.nodes, std::move(elements), mesh.loaded_edges, mesh.free_edges);
  out.inner_radius = mesh.inner_radius;
  out.outer_radius = mesh.outer_radius;
  out.layers = mesh.layers;
  return out;
}

double mesh_area(const Mesh& mesh, int quadrature_order) {
  const QuadratureRule rule = gauss_rule(quadrature_order);
  double area = 0.0;
  for (const Element& e : mesh.elements) {
    for (std::size_t q = 0; q < rule.size(); ++q) {
      area += rule.weights[q] * e.map.jacobian(rule.points[q]).det;
    }
  }
  return area;
}

std::optional<std::pair<int, Vec2>> locate(const Mesh& mesh, const Vec2& x) {
  if (!mesh.is_annulus()) {
    throw Error(ErrorCode::InvalidArgument, "point location needs an annulus mesh");
  }
  const double R = x.norm();
  if (R < mesh.inner_radius * (1.0 - 1e-12) || R > mesh.outer_radius * (1.0 + 1e-12)) {
    return std::nullopt;
  }
  const int L = static_cast<int>(mesh.layers.size());
  const int N = mesh.elements_per_layer;
  int k = 0;
  while (k + 1 < L && R >= mesh.layers[k + 1].inner_radius) ++k;
  double th = std::atan2(x.y(), x.x());
  if (th < 0.0) th += kTwoPi;
  int m = static_cast<int>(std::floor(th / (kTwoPi / N)));
  m = std::clamp(m, 0, N - 1);
  const int index = k * N + m;
  const PolarSector& s = mesh.elements[index].map.sector();
  const Vec2 xhat{2.0 * (R - s.r_inner) / (s.r_outer - s.r_inner) - 1.0,
                  2.0 * (th - s.theta_begin) / (s.theta_end - s.theta_begin) - 1.0};
  return std::make_pair(index, Vec2(std::clamp(xhat.x(), -1.0, 1.0),
                                    std::clamp(xhat.y(), -1.0, 1.0)));
}

double edge_length(const Element& element, EdgeSide side) {
  const GaussRule1D rule = gauss_rule_1d(10);
  const int axis = edge_axis(side);
  double length = 0.0;
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const Mat2 G = element.map.jacobian(edge_point(side, rule.points[q])).matrix;
    length += rule.weights[q] * G.col(axis).norm();
  }
  return length;
}

MeshQualityReport check_regularity(const Mesh& mesh, double c_min) {
  MeshQualityReport report;
  report.elements.reserve(mesh.elements.size());
  const double inf = std::numeric_limits<double>::infinity();
  report.min_edge_ratio = inf;
  report.min_h = inf;
  report.min_shape_ratio = inf;
  report.m1_pass = true;
  report.m2_pass = true;

  for (std::size_t ie = 0; ie < mesh.elements.size(); ++ie) {
    const Element& e = mesh.elements[ie];
    ElementQuality q;
    const std::array<EdgeSide, 4> sides{EdgeSide::EtaMinus, EdgeSide::XiPlus, EdgeSide::EtaPlus,
                                        EdgeSide::XiMinus};
    for (int s = 0; s < 4; ++s) q.edge_lengths[s] = edge_length(e, sides[s]);
    const auto [lo, hi] = std::minmax_element(q.edge_lengths.begin(), q.edge_lengths.end());
    q.h_T = *hi;
    q.edge_ratio = *lo > 0.0 ? *hi / *lo : inf;

    auto a = [&](int k) -> const Vec2& { return mesh.nodes[e.node_ids[k]]; };
    q.l1 = (a(1) - a(0)) + (a(2) - a(3)) + 8.0 * (a(5) - a(7));
    q.l2 = (a(3) - a(0)) + (a(2) - a(1)) + 8.0 * (a(6) - a(4));
    const double wedge = std::abs(q.l1.x() * q.l2.y() - q.l1.y() * q.l2.x());
    q.shape_ratio = q.h_T > 0.0 ? wedge / (q.h_T * q.h_T) : 0.0;

    if (!(q.edge_ratio <= MeshQualityReport::kMaxEdgeRatio)) {
      report.m1_pass = false;
      report.m1_failures.push_back(static_cast<int>(ie));
    }
    if (!(q.shape_ratio >= c_min)) {
      report.m2_pass = false;
      report.m2_failures.push_back(static_cast<int>(ie));
    }
    report.min_edge_ratio = std::min(report.min_edge_ratio, q.edge_ratio);
    report.max_edge_ratio = std::max(report.max_edge_ratio, q.edge_ratio);
    report.min_h = std::min(report.min_h, q.h_T);
    report.max_h = std::max(report.max_h, q.h_T);
    report.min_shape_ratio = std::min(report.min_shape_ratio, q.shape_ratio);
    report.max_shape_ratio = std::max(report.max_shape_ratio, q.shape_ratio);
    report.elements.push_back(q);
  }
  if (!(report.max_h <= MeshQualityReport::kMaxEdgeRatio * report.min_h)) {
    report.m1_pass = false;
  }
  return report;
}

std::string format_mesh(const Mesh& mesh) {
  std::ostringstream out;
  out << "dpq2p1-mesh v1 rho=" << fmt17(mesh.inner_radius) << " layers=" << mesh.layers.size()
      << " N=" << mesh.elements_per_layer << '\n';
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    out << "n " << i << ' ' << fmt17(mesh.nodes[i].x()) << ' ' << fmt17(mesh.nodes[i].y())
        << '\n';
  }
  for (int ie = 0; ie < mesh.num_elements(); ++ie) {
    const Element& e = mesh.elements[ie];
    out << "e " << ie;
    for (int id : e.node_ids) out << ' ' << id;
    if (e.map.kind() == DualParametricMap::Kind::Polar) {
      const PolarSector& s = e.map.sector();
      out << " polar " << fmt17(s.r_inner) << ' ' << fmt17(s.r_outer) << ' '
          << fmt17(s.theta_begin) << ' ' << fmt17(s.theta_end);
    } else {
      out << (e.map.kind() == DualParametricMap::Kind::Bilinear ? " bilinear" : " biquadratic");
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace dpq2p1
