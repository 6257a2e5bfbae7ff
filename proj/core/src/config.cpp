#include "dpq2p1/config.hpp"

#include "dpq2p1/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace dpq2p1 {

namespace {

[[noreturn]] void config_error(const std::string& detail) { throw Error(ErrorCode::Config, detail); }

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string unquote(const std::string& v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
  return v;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    config_error(key + " expects a number, got '" + v + "'");
  }
  return out;
}

template <class Int>
Int to_int(const std::string& key, const std::string& v) {
  Int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    config_error(key + " expects an integer, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  config_error(key + " expects true or false, got '" + v + "'");
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<MeshSize> to_mesh_list(const std::string& key, const std::string& v) {
  std::vector<MeshSize> out;
  std::stringstream in(v);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto x = item.find('x');
    if (x == std::string::npos) config_error(key + " entries look like LxN, got '" + item + "'");
    out.push_back({to_int<int>(key, trim(item.substr(0, x))),
                   to_int<int>(key, trim(item.substr(x + 1)))});
  }
  return out;
}

std::string mesh_list(const std::vector<MeshSize>& meshes) {
  std::string out;
  for (std::size_t i = 0; i < meshes.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(meshes[i].layers) + "x" + std::to_string(meshes[i].elements_per_layer);
  }
  return out;
}

struct Key {
  std::string name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define DPQ_DOUBLE(NAME, FIELD)                                                         \
  Key {                                                                                 \
    NAME, [](RunConfig& c, const std::string& v) { c.FIELD = to_double(NAME, v); },     \
        [](const RunConfig& c) { return fmt(c.FIELD); }                                 \
  }
#define DPQ_INT(NAME, FIELD)                                                            \
  Key {                                                                                 \
    NAME, [](RunConfig& c, const std::string& v) { c.FIELD = to_int<int>(NAME, v); },   \
        [](const RunConfig& c) { return std::to_string(c.FIELD); }                      \
  }
#define DPQ_BOOL(NAME, FIELD)                                                           \
  Key {                                                                                 \
    NAME, [](RunConfig& c, const std::string& v) { c.FIELD = to_bool(NAME, v); },       \
        [](const RunConfig& c) { return std::string(c.FIELD ? "true" : "false"); }      \
  }

const std::vector<Key>& keys() {
  static const std::vector<Key> k = {
      DPQ_DOUBLE("material.mu", material.mu),
      DPQ_DOUBLE("material.s", material.s),
      DPQ_DOUBLE("geometry.rho", geometry.rho),
      DPQ_INT("geometry.layers", geometry.layers),
      DPQ_INT("geometry.elements_per_layer", geometry.elements_per_layer),
      DPQ_DOUBLE("geometry.grading", geometry.grading),
      DPQ_INT("geometry.table_row", geometry.table_row),
      Key{"traction.kind",
          [](RunConfig& c, const std::string& v) {
            if (v == "radial") {
              c.traction.kind = TractionSpec::Kind::RadialConstant;
            } else if (v == "modulated") {
              c.traction.kind = TractionSpec::Kind::Modulated;
            } else {
              config_error("traction.kind must be radial or modulated");
            }
          },
          [](const RunConfig& c) {
            return std::string(c.traction.kind == TractionSpec::Kind::RadialConstant ? "radial"
                                                                                     : "modulated");
          }},
      Key{"traction.t",
          [](RunConfig& c, const std::string& v) {
            c.traction.auto_magnitude = v == "auto";
            if (!c.traction.auto_magnitude) c.traction.magnitude = to_double("traction.t", v);
          },
          [](const RunConfig& c) {
            return c.traction.auto_magnitude ? std::string("auto") : fmt(c.traction.magnitude);
          }},
      DPQ_DOUBLE("traction.lambda", traction.lambda),
      DPQ_DOUBLE("traction.eta", traction.eta),
      DPQ_DOUBLE("newton.alpha0", newton.alpha0),
      DPQ_DOUBLE("newton.tol_u", newton.tol_u),
      DPQ_DOUBLE("newton.tol_p", newton.tol_p),
      Key{"newton.sigma",
          [](RunConfig& c, const std::string& v) {
            c.sigma_auto = v == "auto";
            if (!c.sigma_auto) c.newton.sigma = to_double("newton.sigma", v);
          },
          [](const RunConfig& c) { return c.sigma_auto ? std::string("auto") : fmt(c.newton.sigma); }},
      DPQ_DOUBLE("newton.det_min", newton.det_min),
      DPQ_DOUBLE("newton.det_max", newton.det_max),
      DPQ_DOUBLE("newton.c2_bound", newton.c2_bound),
      DPQ_DOUBLE("newton.alpha_min", newton.alpha_min),
      DPQ_INT("newton.max_iter", newton.max_iter),
      DPQ_INT("newton.quadrature", newton.quadrature_order),
      DPQ_INT("newton.continuation_steps", continuation.steps),
      DPQ_DOUBLE("newton.lambda0", continuation.lambda0),
      DPQ_BOOL("newton.pin_rotation", pin_rotation),
      Key{"study.meshes",
          [](RunConfig& c, const std::string& v) {
            c.study.meshes = v == "table" ? std::vector<MeshSize>{} : to_mesh_list("study.meshes", v);
          },
          [](const RunConfig& c) {
            return c.study.meshes.empty() ? std::string("table") : mesh_list(c.study.meshes);
          }},
      Key{"study.table_rows",
          [](RunConfig& c, const std::string& v) {
            c.study.table_rows.clear();
            if (v == "all") return;
            std::stringstream in(v);
            std::string item;
            while (std::getline(in, item, ',')) {
              item = trim(item);
              if (!item.empty()) c.study.table_rows.push_back(to_int<int>("study.table_rows", item));
            }
          },
          [](const RunConfig& c) {
            if (c.study.table_rows.empty()) return std::string("all");
            std::string out;
            for (std::size_t i = 0; i < c.study.table_rows.size(); ++i) {
              out += (i ? ", " : "") + std::to_string(c.study.table_rows[i]);
            }
            return out;
          }},
      Key{"study.reference",
          [](RunConfig& c, const std::string& v) {
            c.study.reference = {};
            c.study.reference_row = -1;
            if (v == "auto") return;
            if (v.rfind("refine ", 0) == 0) {
              c.study.reference_row = to_int<int>("study.reference", trim(v.substr(7)));
              return;
            }
            const auto list = to_mesh_list("study.reference", v);
            if (list.size() != 1) config_error("study.reference takes one LxN entry");
            c.study.reference = list.front();
          },
          [](const RunConfig& c) {
            if (c.study.reference_row >= 0) return "refine " + std::to_string(c.study.reference_row);
            return c.study.reference.layers == 0 ? std::string("auto")
                                                 : mesh_list({c.study.reference});
          }},
      DPQ_INT("study.error_order_increment", study.error_order_increment),
      Key{"infsup.meshes",
          [](RunConfig& c, const std::string& v) {
            c.infsup.meshes = to_mesh_list("infsup.meshes", v);
          },
          [](const RunConfig& c) { return mesh_list(c.infsup.meshes); }},
      Key{"infsup.state", [](RunConfig& c, const std::string& v) { c.infsup.state = v; },
          [](const RunConfig& c) { return c.infsup.state; }},
      Key{"output.dir", [](RunConfig& c, const std::string& v) { c.output_dir = v; },
          [](const RunConfig& c) { return c.output_dir; }},
      Key{"run.seed",
          [](RunConfig& c, const std::string& v) { c.seed = to_int<std::uint64_t>("run.seed", v); },
          [](const RunConfig& c) { return std::to_string(c.seed); }},
      DPQ_INT("run.jobs", jobs),
  };
  return k;
}

#undef DPQ_DOUBLE
#undef DPQ_INT
#undef DPQ_BOOL

}  // namespace

void RunConfig::validate() const {
  if (!(material.mu > 0.0)) config_error("mu must be positive");
  if (!(material.s > 1.0 && material.s < 2.0)) config_error("s out of (1,2)");
  if (!(geometry.rho > 0.0 && geometry.rho < 1.0)) config_error("rho out of (0,1)");
  if (geometry.layers < 1) config_error("geometry.layers must be >= 1");
  if (geometry.elements_per_layer < 3) config_error("geometry.elements_per_layer must be >= 3");
  if (!(geometry.grading >= 1.0)) config_error("geometry.grading must be >= 1");
  if (geometry.table_row < -1 || geometry.table_row > 3) config_error("geometry.table_row out of [-1,3]");
  if (!(traction.lambda > 1.0)) config_error("traction.lambda must exceed 1");
  if (!(traction.eta >= 0.0)) config_error("traction.eta must be >= 0");
  if (continuation.steps < 1) config_error("newton.continuation_steps must be >= 1");
  if (!(continuation.lambda0 > 1.0)) config_error("newton.lambda0 must exceed 1");
  if (study.error_order_increment < 0) config_error("study.error_order_increment must be >= 0");
  if (infsup.state != "identity" && infsup.state != "analytic") {
    config_error("infsup.state must be identity or analytic");
  }
  for (int row : study.table_rows) {
    if (row < 0 || row > 3) config_error("study.table_rows entries must be in [0,3]");
  }
  if (study.reference_row > 3) config_error("study.reference row out of [0,3]");
  for (const MeshSize& m : study.meshes) {
    if (m.layers < 1 || m.elements_per_layer < 3) config_error("study.meshes entry too small");
  }
  for (const MeshSize& m : infsup.meshes) {
    if (m.layers < 1 || m.elements_per_layer < 3) config_error("infsup.meshes entry too small");
  }
  if (jobs < 1) config_error("run.jobs must be >= 1");
  try {
    newton_config().validate();
  } catch (const Error& e) {
    config_error(e.what());
  }
}

NewtonConfig RunConfig::newton_config() const {
  NewtonConfig c = newton;
  if (sigma_auto) c.sigma = 0.5 * geometry.rho;
  return c;
}

TractionSpec RunConfig::traction_spec() const {
  const double t = traction.auto_magnitude
                       ? traction_for(geometry.rho, traction.lambda, material)
                       : traction.magnitude;
  return traction.kind == TractionSpec::Kind::RadialConstant ? TractionSpec::radial(t)
                                                             : TractionSpec::modulated(t, traction.eta);
}

std::string RunConfig::resolved() const {
  std::string out;
  for (const Key& k : keys()) out += k.name + " = " + k.get(*this) + "\n";
  return out;
}

RunConfig parse_config(const std::string& text) {
  static const std::map<std::string, const Key*> index = [] {
    std::map<std::string, const Key*> m;
    for (const Key& k : keys()) m[k.name] = &k;
    return m;
  }();

  RunConfig config;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') config_error("line " + std::to_string(line_no) + ": bad section");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      config_error("line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = unquote(trim(std::string_view(line).substr(eq + 1)));
    const std::string full = section.empty() ? key : section + "." + key;
    const auto it = index.find(full);
    if (it == index.end()) config_error("unknown key " + full);
    it->second->set(config, value);
  }
  config.validate();
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::vector<Layer> config_layers(const GeometryConfig& geometry, int layers) {
  const double gamma = layers > 1 ? std::pow(geometry.grading, 1.0 / (layers - 1)) : 1.0;
  return geometric_layers(geometry.rho, layers, gamma);
}

std::vector<MeshTableRow> table_rows(double rho) {
  return rho == 0.01 || rho == 0.0001 ? mesh_table(rho) : mesh_table(0.01);
}

namespace {

MeshSpec table_spec(double rho, const MeshTableRow& row) {
  return {profile_layers(rho, row.layers, row.tau_min, row.tau_max), row.elements_per_layer, row.h};
}

}  // namespace

std::vector<MeshSpec> study_meshes(const RunConfig& config) {
  std::vector<MeshSpec> out;
  const double rho = config.geometry.rho;
  if (config.study.meshes.empty()) {
    const std::vector<MeshTableRow> rows = table_rows(rho);
    if (config.study.table_rows.empty()) {
      for (const MeshTableRow& row : rows) out.push_back(table_spec(rho, row));
    }
    for (int k : config.study.table_rows) out.push_back(table_spec(rho, rows.at(k)));
    return out;
  }
  for (const MeshSize& m : config.study.meshes) {
    out.push_back({config_layers(config.geometry, m.layers), m.elements_per_layer, 0.0});
  }
  return out;
}

std::optional<MeshSpec> study_reference(const RunConfig& config) {
  if (config.study.reference_row >= 0) {
    return refine(table_spec(config.geometry.rho,
                             table_rows(config.geometry.rho).at(config.study.reference_row)));
  }
  if (config.study.reference.layers > 0) {
    return MeshSpec{config_layers(config.geometry, config.study.reference.layers),
                    config.study.reference.elements_per_layer, 0.0};
  }
  return std::nullopt;
}

Mesh build_config_mesh(const GeometryConfig& geometry) {
  if (geometry.table_row >= 0) {
    return build_table_mesh(geometry.rho, table_rows(geometry.rho).at(geometry.table_row));
  }
  return build_annulus_mesh(geometry.rho, config_layers(geometry, geometry.layers),
                            geometry.elements_per_layer);
}

std::string comment_block(const std::string& text) {
  std::string out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out += "# " + line + "\n";
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create " + path.parent_path().string());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

}  // namespace dpq2p1
