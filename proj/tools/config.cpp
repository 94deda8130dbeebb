#include "config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "calorix/error.hpp"

namespace calorix::cli {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::ConfigInvalid, what); }

ParamSpec param(std::string name, std::string type, json def, std::string doc, bool required = false) {
  return {std::move(name), std::move(type), std::move(def), required, std::move(doc)};
}

// Walks one JSON object, remembering which keys were read so the rest can be rejected.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) invalid(path_ + " must be a JSON object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }
  const json& raw(const std::string& key) {
    if (!has(key)) invalid(where(key) + " is required");
    return j_.at(key);
  }
  double number(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number()) invalid(where(key) + " must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) invalid(where(key) + " must be finite");
    return d;
  }
  double number(const std::string& key, double def) { return has(key) ? number(key) : def; }
  long long integer(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number_integer()) invalid(where(key) + " must be an integer");
    return v.get<long long>();
  }
  long long integer(const std::string& key, long long def) { return has(key) ? integer(key) : def; }
  std::string string(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_string()) invalid(where(key) + " must be a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& key, const std::string& def) { return has(key) ? string(key) : def; }
  std::vector<double> numbers(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_array()) invalid(where(key) + " must be an array of numbers");
    std::vector<double> out;
    for (const json& e : v) {
      if (!e.is_number()) invalid(where(key) + " must be an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }
  std::vector<long long> integers(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_array()) invalid(where(key) + " must be an array of integers");
    std::vector<long long> out;
    for (const json& e : v) {
      if (!e.is_number_integer()) invalid(where(key) + " must be an array of integers");
      out.push_back(e.get<long long>());
    }
    return out;
  }
  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) invalid("unknown key " + where(key));
    }
  }
  std::string where(const std::string& key) const { return path_.empty() ? "'" + key + "'" : "'" + path_ + "." + key + "'"; }

 private:
  json j_;
  std::string path_;
  std::set<std::string> seen_;
};

json normalize_data(const json& j, int n, const std::filesystem::path& base_dir) {
  ObjectReader r(j, "params.data");
  const std::string type = r.string("type");
  json out{{"type", type}};
  if (type == "exponential") {
    const auto xi = r.numbers("xi");
    if (static_cast<int>(xi.size()) != n) invalid("'params.data.xi' must have n entries");
    out["xi"] = xi;
  } else if (type == "polynomial") {
    const auto alpha = r.integers("alpha");
    if (static_cast<int>(alpha.size()) != n) invalid("'params.data.alpha' must have n entries");
    for (long long a : alpha) {
      if (a < 0 || a > 16) invalid("'params.data.alpha' entries must lie in [0, 16]");
    }
    out["alpha"] = alpha;
    out["scale"] = r.number("scale", 1.0);
  } else if (type == "abs") {
    const long long c = r.integer("component", 1);
    if (c < 1 || c > n) invalid("'params.data.component' must lie in [1, n]");
    out["component"] = c;
  } else if (type == "constant") {
    out["value"] = r.number("value", 1.0);
  } else if (type == "file") {
    const std::string path = r.string("path");
    if (!std::filesystem::exists(base_dir / path)) invalid("data file '" + path + "' does not exist");
    out["path"] = path;
  } else {
    invalid("'params.data.type' must be one of exponential, polynomial, abs, constant, file");
  }
  r.finish();
  return out;
}

json normalize_params(const TaskInfo& info, const json& j, int n, const std::filesystem::path& base_dir) {
  ObjectReader r(j.is_null() ? json::object() : j, "params");
  json out = json::object();
  for (const ParamSpec& p : info.params) {
    if (!r.has(p.name)) {
      if (p.required) invalid(r.where(p.name) + " is required for task " + info.name);
      if (!p.default_value.is_null()) out[p.name] = p.default_value;
      continue;
    }
    const std::string key = p.name;
    if (p.type == "int") {
      const long long v = r.integer(key);
      if (v < 0) invalid(r.where(key) + " must be non-negative");
      out[key] = v;
    } else if (p.type == "number") {
      const double v = r.number(key);
      if (v <= 0) invalid(r.where(key) + " must be positive");
      out[key] = v;
    } else if (p.type == "bool") {
      if (!r.raw(key).is_boolean()) invalid(r.where(key) + " must be true or false");
      out[key] = r.raw(key).get<bool>();
    } else if (p.type == "int-list") {
      const auto v = r.integers(key);
      if (v.empty()) invalid(r.where(key) + " must not be empty");
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] < 0 || (i > 0 && v[i] <= v[i - 1])) invalid(r.where(key) + " must be non-negative and strictly increasing");
      }
      out[key] = v;
    } else if (p.type == "number-list") {
      const auto v = r.numbers(key);
      if (static_cast<int>(v.size()) != n) invalid(r.where(key) + " must have n entries");
      out[key] = v;
    } else if (p.type == "data") {
      out[key] = normalize_data(r.raw(key), n, base_dir);
    }
  }
  r.finish();
  for (const char* key : {"degree", "max_degree"}) {
    if (out.contains(key) && out[key].get<long long>() > 24) invalid(std::string("'params.") + key + "' must be at most 24");
  }
  if (out.contains("degrees") && out["degrees"].back().get<long long>() > 24) invalid("'params.degrees' must stay at or below 24");
  if (out.contains("rcond") && out["rcond"].get<double>() >= 1.0) invalid("'params.rcond' must lie in (0, 1)");
  return out;
}

}  // namespace

const std::vector<TaskInfo>& task_catalog() {
  static const std::vector<TaskInfo> catalog = {
      {"verify-kernels",
       "Causality, positivity, unit mass and caloric equation of the heat kernel; moment identity of v_alpha (n <= 2).",
       "fundamental solution and heat-kernel moments",
       false,
       {param("samples", "int", 20, "random (z, tau) samples per check"),
        param("tolerance", "number", 1e-6, "relative tolerance of the finite-difference checks"),
        param("moment_tolerance", "number", 1e-8, "absolute tolerance of the moment identity")}},
      {"verify-jumps",
       "Two-sided normal probes of the double layer and of the conormal derivative of the single layer.",
       "jump relations of parabolic layer potentials",
       true,
       {param("densities", "int", 10, "random smooth densities"),
        param("nodes", "int", 10, "lateral nodes per density, corners excluded"),
        param("tolerance", "number", 1e-2, "relative jump error"),
        param("refine", "bool", true, "repeat on a mesh with doubled angular and time resolution"),
        param("reversal_tolerance", "number", 1e-10, "adjoint potentials against time-reflected ones")}},
      {"verify-identities",
       "Partition identity, Stokes reconstruction, initial limit of the cap potential, elliptic Gauss identity (n = 3).",
       "Gauss and representation identities",
       true,
       {param("probes", "int", 20, "interior and exterior probes per identity"),
        param("tolerance", "number", 1e-6, "interior/exterior tolerance"),
        param("surface_tolerance", "number", 1e-3, "on-surface tolerance of the elliptic identity"),
        param("xi", "number-list", nullptr, "frequency of the caloric exponential, default 0.3, 0.4, 0.5, ..."),
        param("initial_time", "number", 1e-4, "time of the initial-limit check"),
        param("initial_tolerance", "number", 1e-3, "initial-limit tolerance")}},
      {"poly-table",
       "Exact caloric polynomials up to a degree with their operator certificates.",
       "caloric polynomials and their generating function",
       false,
       {param("max_degree", "int", 2, "largest |alpha|")}},
      {"solve",
       "Least-squares Dirichlet fit by caloric polynomials of one degree.",
       "Trefftz approximation of the Dirichlet problem",
       true,
       {param("degree", "int", 8, "basis degree N"), param("rcond", "number", 1e-12, "relative SVD truncation"),
        param("data", "data", nullptr, "boundary data", true),
        param("max_residual", "number", nullptr, "fail when the relative residual exceeds this")}},
      {"completeness",
       "Residual decay of nested caloric-polynomial fits on one mesh.",
       "completeness of caloric polynomials on the parabolic boundary",
       true,
       {param("degrees", "int-list", json::array({0, 2, 4, 6, 8, 10, 12}), "strictly increasing degrees"),
        param("rcond", "number", 1e-12, "relative SVD truncation"),
        param("data", "data", nullptr, "boundary data", true),
        param("max_final_residual", "number", nullptr, "fail when the last residual exceeds this"),
        param("max_decay_ratio", "number", nullptr, "fail unless last / first residual is below this")}},
  };
  return catalog;
}

const TaskInfo* find_task(const std::string& name) {
  for (const TaskInfo& t : task_catalog()) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

CoefficientMatrix ExperimentConfig::matrix() const { return make_coefficients(op.n, op.matrix); }

CrossSection ExperimentConfig::section() const {
  const GeometryBlock& g = *geometry;
  switch (g.kind) {
    case SectionKind::Disk:
      return CrossSection::disk(g.params[0]);
    case SectionKind::Ellipse:
      return CrossSection::ellipse(g.params[0], g.params[1]);
    case SectionKind::Star:
      return CrossSection::star(g.params[0], g.cos_coeffs, g.sin_coeffs);
    case SectionKind::Ball:
      return CrossSection::ball(g.params[0]);
    case SectionKind::Ellipsoid:
      return CrossSection::ellipsoid(g.params[0], g.params[1], g.params[2]);
  }
  invalid("unknown cross-section");
}

CylinderMesh ExperimentConfig::build_mesh() const {
  return calorix::build_mesh(section(), matrix(), geometry->final_time, mesh->m_angular, mesh->m_time, mesh->m_radial);
}

std::filesystem::path ExperimentConfig::resolve(const std::string& path) const { return base_dir / path; }

ExperimentConfig parse_config(const json& j, const std::string& task, const std::filesystem::path& base_dir) {
  const TaskInfo* info = find_task(task);
  if (!info) invalid("unknown task '" + task + "'");
  if (!j.is_object() || j.empty()) invalid("config must be a non-empty JSON object");
  ObjectReader top(j, "");
  ExperimentConfig cfg;
  cfg.task = task;
  cfg.base_dir = base_dir;
  json echo = json::object();

  if (top.has("task") && top.string("task") != task) invalid("config is for task '" + top.string("task") + "', not '" + task + "'");
  echo["task"] = task;
  const long long seed = top.integer("seed", 1);
  if (seed < 0) invalid("'seed' must be non-negative");
  cfg.seed = static_cast<std::uint64_t>(seed);
  echo["seed"] = seed;

  {
    ObjectReader r(top.raw("operator"), "operator");
    const long long n = r.integer("n");
    if (n < 1 || n > 8) invalid("'operator.n' must lie in [1, 8]");
    cfg.op.n = static_cast<int>(n);
    if (r.has("matrix")) {
      const json& m = r.raw("matrix");
      if (!m.is_array() || m.size() != static_cast<std::size_t>(n)) invalid("'operator.matrix' must have n rows");
      for (const json& row : m) {
        if (!row.is_array() || row.size() != static_cast<std::size_t>(n)) invalid("'operator.matrix' must have n columns");
        std::vector<double> values;
        for (const json& e : row) {
          if (!e.is_number()) invalid("'operator.matrix' entries must be numbers");
          values.push_back(e.get<double>());
        }
        cfg.op.matrix.push_back(values);
      }
    } else {
      cfg.op.matrix.assign(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n), 0.0));
      for (int i = 0; i < n; ++i) cfg.op.matrix[i][i] = 1.0;
    }
    const std::string parity = r.string("parity", "v");
    if (parity != "v" && parity != "w") invalid("'operator.parity' must be \"v\" or \"w\"");
    cfg.op.parity = parity_from_string(parity);
    r.finish();
    try {
      (void)cfg.matrix();
    } catch (const Error& e) {
      invalid(std::string("'operator.matrix': ") + e.what());
    }
    echo["operator"] = {{"n", n}, {"matrix", cfg.op.matrix}, {"parity", parity}};
  }

  if (info->needs_mesh) {
    ObjectReader r(top.raw("geometry"), "geometry");
    GeometryBlock g;
    const std::string kind = r.string("kind");
    json ge{{"kind", kind}};
    auto positive = [&](const char* key) {
      const double v = r.number(key);
      if (v <= 0) invalid(r.where(key) + " must be positive");
      g.params.push_back(v);
      ge[key] = v;
    };
    int dim = 2;
    if (kind == "disk") {
      g.kind = SectionKind::Disk;
      positive("radius");
    } else if (kind == "ellipse") {
      g.kind = SectionKind::Ellipse;
      positive("a");
      positive("b");
    } else if (kind == "star") {
      g.kind = SectionKind::Star;
      positive("r0");
      g.cos_coeffs = r.has("cos") ? r.numbers("cos") : std::vector<double>{};
      g.sin_coeffs = r.has("sin") ? r.numbers("sin") : std::vector<double>{};
      ge["cos"] = g.cos_coeffs;
      ge["sin"] = g.sin_coeffs;
    } else if (kind == "ball3d") {
      g.kind = SectionKind::Ball;
      positive("radius");
      dim = 3;
    } else if (kind == "ellipsoid3d") {
      g.kind = SectionKind::Ellipsoid;
      positive("a");
      positive("b");
      positive("c");
      dim = 3;
    } else {
      invalid("'geometry.kind' must be one of disk, ellipse, star, ball3d, ellipsoid3d");
    }
    g.final_time = r.number("T");
    if (g.final_time <= 0) invalid("'geometry.T' must be positive");
    ge["T"] = g.final_time;
    r.finish();
    if (dim != cfg.op.n) invalid("geometry '" + kind + "' needs operator.n = " + std::to_string(dim));
    cfg.geometry = g;
    try {
      (void)cfg.section();
    } catch (const Error& e) {
      invalid(std::string("'geometry': ") + e.what());
    }
    echo["geometry"] = ge;

    ObjectReader m(top.raw("mesh"), "mesh");
    MeshBlock mb;
    auto resolution = [&](const char* key, long long def) {
      const long long v = m.integer(key, def);
      if (v < 2 || v > 4096) invalid(m.where(key) + " must lie in [2, 4096]");
      return static_cast<int>(v);
    };
    mb.m_angular = resolution("m_angular", 32);
    mb.m_time = resolution("m_time", 8);
    mb.m_radial = resolution("m_radial", 8);
    m.finish();
    cfg.mesh = mb;
    echo["mesh"] = {{"m_angular", mb.m_angular}, {"m_time", mb.m_time}, {"m_radial", mb.m_radial}};
  } else {
    for (const char* key : {"geometry", "mesh"}) {
      if (top.has(key)) invalid(std::string("task ") + task + " takes no '" + key + "' block");
    }
  }

  cfg.params = normalize_params(*info, top.has("params") ? top.raw("params") : json(), cfg.op.n, base_dir);
  echo["params"] = cfg.params;

  {
    ObjectReader r(top.has("output") ? top.raw("output") : json::object(), "output");
    const std::string dir = r.string("directory", "calorix-out");
    cfg.output.directory = base_dir / dir;
    json formats = json::array({"csv", "json"});
    if (r.has("formats")) {
      const json& f = r.raw("formats");
      if (!f.is_array() || f.empty()) invalid("'output.formats' must be a non-empty array");
      cfg.output.csv = cfg.output.json = false;
      for (const json& e : f) {
        if (e == "csv") {
          cfg.output.csv = true;
        } else if (e == "json") {
          cfg.output.json = true;
        } else {
          invalid("'output.formats' entries must be \"csv\" or \"json\"");
        }
      }
      formats = f;
    }
    r.finish();
    echo["output"] = {{"directory", dir}, {"formats", formats}};
  }
  top.finish();
  cfg.echo = echo;
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::string& task) {
  std::ifstream in(path);
  if (!in) invalid("cannot read config '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  json j;
  try {
    j = json::parse(buffer.str());
  } catch (const json::parse_error& e) {
    invalid(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j, task, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

}  // namespace calorix::cli
