#include "tasks.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "calorix/error.hpp"
#include "calorix/kernels.hpp"
#include "calorix/parallel.hpp"
#include "calorix/potentials.hpp"
#include "calorix/quadrature.hpp"
#include "calorix/trefftz.hpp"
#include "calorix/version.hpp"

namespace calorix::cli {

using nlohmann::json;

void Assertion::record(bool ok, const std::string& what) {
  ++total;
  if (ok) {
    ++passed;
  } else if (first_failure.empty()) {
    first_failure = what;
  }
}

Assertion& TaskResult::check(const std::string& name) {
  for (Assertion& a : assertions) {
    if (a.name == name) return a;
  }
  assertions.push_back({name, 0, 0, {}});
  return assertions.back();
}

bool TaskResult::passed() const { return first_failure() == nullptr; }

const Assertion* TaskResult::first_failure() const {
  for (const Assertion& a : assertions) {
    if (!a.pass()) return &a;
  }
  return nullptr;
}

namespace {

constexpr double kPi = std::numbers::pi;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const Vec& x) {
  std::string s;
  for (Eigen::Index i = 0; i < x.size(); ++i) s += (i ? ";" : "") + num(x[i]);
  return s;
}

std::string join(const std::vector<int>& a) {
  std::string s;
  for (std::size_t i = 0; i < a.size(); ++i) s += (i ? ";" : "") + std::to_string(a[i]);
  return s;
}

class Csv {
 public:
  explicit Csv(const std::vector<std::string>& header) { row(header); }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

Vec random_vec(std::mt19937_64& g, int n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = u(g);
  return v;
}

double uniform(std::mt19937_64& g, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(g); }

Vec unit_vector(std::mt19937_64& g, int n) {
  std::normal_distribution<double> nd;
  Vec v(n);
  do {
    for (int i = 0; i < n; ++i) v[i] = nd(g);
  } while (v.norm() < 1e-3);
  return v.normalized();
}

// Point at radial fraction r of the star-shaped section.
Vec radial_point(const CrossSection& cs, int n, std::mt19937_64& g, double r) {
  if (n == 2) return r * cs.curve(uniform(g, 0.0, 2 * kPi));
  return r * cs.surface_point(unit_vector(g, n));
}

// Central differences with one Richardson step.
double d2(const std::function<double(const Vec&)>& f, const Vec& x, int i, int j, double h) {
  auto once = [&](double s) {
    Vec ei = Vec::Zero(x.size());
    Vec ej = Vec::Zero(x.size());
    ei[i] = s;
    ej[j] = s;
    if (i == j) return (f(x + ei) - 2 * f(x) + f(x - ei)) / (s * s);
    return (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)) / (4 * s * s);
  };
  return (4 * once(h / 2) - once(h)) / 3;
}

double d1(const std::function<double(double)>& f, double x, double h) {
  auto once = [&](double s) { return (f(x + s) - f(x - s)) / (2 * s); };
  return (4 * once(h / 2) - once(h)) / 3;
}

// ---------------------------------------------------------------- verify-kernels

TaskResult verify_kernels(const ExperimentConfig& cfg) {
  TaskResult res;
  const CoefficientMatrix a = cfg.matrix();
  const int n = a.dim();
  const int samples = cfg.params["samples"].get<int>();
  const double tol = cfg.params["tolerance"].get<double>();
  const double mtol = cfg.params["moment_tolerance"].get<double>();
  std::mt19937_64 g(cfg.seed);
  Csv csv({"check", "case", "value", "expected", "error", "pass"});
  auto emit = [&](const std::string& check, int k, double value, double expected, double error, bool ok) {
    csv.row({check, std::to_string(k), num(value), num(expected), num(error), ok ? "1" : "0"});
    res.check(check).record(ok, check + " case " + std::to_string(k) + ": error " + num(error));
  };

  for (int k = 0; k < samples; ++k) {
    const Vec z = random_vec(g, n, -2, 2);
    const double tau = k % 2 == 0 ? 0.0 : -uniform(g, 0.0, 2.0);
    const double v = fundamental_solution(a, z, tau);
    emit("causality", k, v, 0.0, std::abs(v), v == 0.0);
  }
  for (int k = 0; k < samples; ++k) {
    const Vec z = k == 0 ? Vec(Vec::Constant(n, 1e3)) : random_vec(g, n, -3, 3);
    const double tau = k == 0 ? 1e-6 : uniform(g, 1e-3, 2.0);
    const double v = fundamental_solution(a, z, tau);
    emit("positivity", k, v, 0.0, 0.0, std::isfinite(v) && v >= 0.0);
  }
  for (int k = 0; k < samples; ++k) {
    const Vec z = random_vec(g, n, -1.5, 1.5);
    const double tau = uniform(g, 0.05, 2.0);
    const double h = 1e-3;
    auto gz = [&](const Vec& w) { return fundamental_solution(a, w, tau); };
    double elliptic = 0.0;
    double scale = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double term = a(i, j) * d2(gz, z, i, j, h);
        elliptic += term;
        scale += std::abs(term);
      }
    }
    const double dt = d1([&](double s) { return fundamental_solution(a, z, s); }, tau, h * std::min(1.0, tau));
    const double rel = std::abs(elliptic - dt) / (scale + std::abs(dt));
    emit("caloric_equation", k, elliptic - dt, 0.0, rel, rel < tol);

    // adjoint equation in the source variables (y, s) of G(x - y, t - s)
    const Vec x = random_vec(g, n, -1, 1);
    const Vec y = x - z;
    const double t = tau + 0.5;
    const double s = 0.5;
    auto gy = [&](const Vec& w) { return fundamental_solution(a, x - w, t - s); };
    double ey = 0.0;
    double sy = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double term = a(i, j) * d2(gy, y, i, j, h);
        ey += term;
        sy += std::abs(term);
      }
    }
    const double ds = d1([&](double q) { return fundamental_solution(a, x - y, t - q); }, s, h * std::min(1.0, tau));
    const double rel_adj = std::abs(ey + ds) / (sy + std::abs(ds));
    emit("adjoint_equation", k, ey + ds, 0.0, rel_adj, rel_adj < tol);

    // conormal kernel against the directional derivative along A nu
    const Vec nu = unit_vector(g, n);
    const Vec dir = a.apply(nu);
    const double fd = d1([&](double q) { return fundamental_solution(a, x - (y + q * dir), tau); }, 0.0, h);
    const double kern = conormal_kernel_source(a, x, y, nu, tau);
    const double rel_con = std::abs(kern - fd) / (std::abs(fd) + dir.norm() * fundamental_solution(a, z, tau) / std::sqrt(tau));
    emit("conormal_kernel", k, kern, fd, rel_con, rel_con < tol);
  }
  if (n <= 3) {
    int k = 0;
    for (double tau : {0.1, 1.0}) {
      const double half = 12.0 * std::sqrt(tau * a.max_eigenvalue());
      std::vector<double> bp;
      for (int i = 0; i <= 8; ++i) bp.push_back(-half + 2 * half * i / 8);
      const Rule1d r = composite_gauss(bp, n == 3 ? 8 : 12);
      double mass = 0.0;
      std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
      const std::size_t m = r.nodes.size();
      std::size_t total = 1;
      for (int i = 0; i < n; ++i) total *= m;
      for (std::size_t lin = 0; lin < total; ++lin) {
        std::size_t rest = lin;
        Vec z(n);
        double w = 1.0;
        for (int i = 0; i < n; ++i) {
          z[i] = r.nodes[rest % m];
          w *= r.weights[rest % m];
          rest /= m;
        }
        mass += w * fundamental_solution(a, z, tau);
      }
      emit("unit_mass", k++, mass, 1.0, std::abs(mass - 1.0), std::abs(mass - 1.0) < mtol);
    }
  }
  if (n <= 2) {
    int k = 0;
    for (const MultiIndex& alpha : enumerate_basis(n, 4)) {
      for (double t : {0.1, 1.0}) {
        const SpaceTimePoint p{random_vec(g, n, -1, 1), t};
        const double err = moment_identity_check(a, alpha, p);
        emit("moment_identity", k++, err, 0.0, err, err < mtol);
      }
    }
  }
  res.csv.push_back({cfg.task, csv.str()});
  json summary = json::array();
  for (const Assertion& as : res.assertions) summary.push_back({{"check", as.name}, {"passed", as.passed}, {"total", as.total}});
  res.json["checks"] = summary;
  return res;
}

// ---------------------------------------------------------------- verify-jumps

struct RandomDensity {
  std::vector<Vec> omega;
  std::vector<double> nu;
  std::vector<double> psi;

  double operator()(const Vec& y, double s) const {
    double v = 1.5;
    for (std::size_t k = 0; k < omega.size(); ++k) v += 0.3 / (k + 1.0) * std::sin(omega[k].dot(y) + nu[k] * s + psi[k]);
    return v;
  }
};

RandomDensity random_density(std::mt19937_64& g, int n) {
  RandomDensity d;
  for (int k = 0; k < 3; ++k) {
    d.omega.push_back(random_vec(g, n, -1.5, 1.5));
    d.nu.push_back(uniform(g, -3.0, 3.0));
    d.psi.push_back(uniform(g, 0.0, 2 * kPi));
  }
  return d;
}

std::vector<std::size_t> eligible_nodes(const CylinderMesh& mesh) {
  std::vector<std::size_t> out;
  const double T = mesh.final_time();
  for (std::size_t i = 0; i < mesh.lateral().size(); ++i) {
    const double s = mesh.lateral()[i].s;
    if (s > 0.1 * T && s < 0.9 * T) out.push_back(i);
  }
  return out;
}

std::size_t nearest_node(const CylinderMesh& mesh, const std::vector<std::size_t>& eligible, const LateralNode& target) {
  std::size_t best = eligible.front();
  double bd = 1e300;
  for (std::size_t i : eligible) {
    const LateralNode& l = mesh.lateral()[i];
    const double d = (l.y - target.y).norm() + std::abs(l.s - target.s);
    if (d < bd) {
      bd = d;
      best = i;
    }
  }
  return best;
}

TaskResult verify_jumps(const ExperimentConfig& cfg) {
  TaskResult res;
  const CoefficientMatrix a = cfg.matrix();
  const int n = a.dim();
  const CylinderMesh mesh = cfg.build_mesh();
  const double T = mesh.final_time();
  const int densities = cfg.params["densities"].get<int>();
  const int nodes = cfg.params["nodes"].get<int>();
  const double tol = cfg.params["tolerance"].get<double>();
  const bool refine = cfg.params["refine"].get<bool>();
  const double rtol = cfg.params["reversal_tolerance"].get<double>();
  std::optional<CylinderMesh> fine;
  if (refine) {
    fine = build_mesh(mesh.section(), a, T, 2 * cfg.mesh->m_angular, 2 * cfg.mesh->m_time, cfg.mesh->m_radial);
  }
  const std::vector<std::size_t> eligible = eligible_nodes(mesh);
  if (eligible.empty()) throw Error(ErrorCode::TaskFailed, "no lateral node lies away from the corners");
  const std::vector<std::size_t> eligible_fine = refine ? eligible_nodes(*fine) : std::vector<std::size_t>{};

  std::mt19937_64 g(cfg.seed);
  Csv csv({"check", "mesh", "density", "node", "value", "expected", "error", "pass"});
  std::ostringstream probes;
  bool probe_header = true;
  double sq[2][2] = {{0, 0}, {0, 0}};
  double mx[2][2] = {{0, 0}, {0, 0}};
  int count = 0;
  const char* names[2] = {"double_layer_jump", "conormal_single_layer_jump"};

  for (int d = 0; d < densities; ++d) {
    const RandomDensity rho = random_density(g, n);
    auto sample = [&](const CylinderMesh& m) {
      std::vector<double> v;
      for (const LateralNode& l : m.lateral()) v.push_back(rho(l.y, l.s));
      return DensityField::sampled(m, Region::Lateral, v);
    };
    const DensityField phi = sample(mesh);
    const std::optional<DensityField> phi_fine = refine ? std::optional<DensityField>(sample(*fine)) : std::nullopt;
    for (int k = 0; k < nodes; ++k) {
      const std::size_t node = eligible[std::uniform_int_distribution<std::size_t>(0, eligible.size() - 1)(g)];
      for (int kind = 0; kind < 2; ++kind) {
        for (int level = 0; level < (refine ? 2 : 1); ++level) {
          const CylinderMesh& m = level == 0 ? mesh : *fine;
          const std::size_t nd = level == 0 ? node : nearest_node(*fine, eligible_fine, mesh.lateral()[node]);
          const JumpProbeReport r = jump_probe(m, a, level == 0 ? phi : *phi_fine, nd, static_cast<JumpKind>(kind));
          const bool ok = r.relative_error <= tol;
          const std::string label = level == 0 ? "baseline" : "refined";
          csv.row({names[kind], label, std::to_string(d), std::to_string(nd), num(r.jump), num(r.predicted),
                   num(r.relative_error), ok ? "1" : "0"});
          res.check(std::string(names[kind]) + "_" + label)
              .record(ok, "density " + std::to_string(d) + " node " + std::to_string(nd) + ": relative error " +
                              num(r.relative_error));
          sq[level][kind] += r.relative_error * r.relative_error;
          mx[level][kind] = std::max(mx[level][kind], r.relative_error);
          std::ostringstream one;
          r.write_csv(one, probe_header);
          probe_header = false;
          std::string body = one.str();
          // prefix each probe row with its provenance
          std::istringstream lines(body);
          std::string line;
          while (std::getline(lines, line)) {
            if (line.rfind("node,", 0) == 0) {
              probes << "kind,mesh,density," << line << '\n';
            } else {
              probes << names[kind] << ',' << label << ',' << d << ',' << line << '\n';
            }
          }
        }
      }
      ++count;
    }
    // adjoint potentials equal the direct ones on the time-reflected density
    const std::size_t node = eligible[static_cast<std::size_t>(d) % eligible.size()];
    const SpaceTimePoint inside = offset_point(mesh, node, 0.02 * mesh.section().diameter());
    const SpaceTimePoint mirrored{inside.x, T - inside.t};
    const DensityField reflected = reflect_time(mesh, phi);
    const double ds = double_layer_star(mesh, a, phi, inside);
    const double dd = double_layer(mesh, a, reflected, mirrored);
    const double ss = single_layer_star(mesh, a, phi, inside);
    const double sd = single_layer(mesh, a, reflected, mirrored);
    for (auto [name, lhs, rhs] : {std::tuple{"reversal_double_layer", ds, dd}, std::tuple{"reversal_single_layer", ss, sd}}) {
      const double err = std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs));
      const bool ok = err < rtol;
      csv.row({name, "baseline", std::to_string(d), std::to_string(node), num(lhs), num(rhs), num(err), ok ? "1" : "0"});
      res.check(name).record(ok, "density " + std::to_string(d) + ": error " + num(err));
    }
  }

  json agg = json::object();
  for (int kind = 0; kind < 2; ++kind) {
    const double base = std::sqrt(sq[0][kind] / count);
    agg[names[kind]] = {{"baseline_rms", base}, {"baseline_max", mx[0][kind]}};
    if (refine) {
      const double ref = std::sqrt(sq[1][kind] / count);
      agg[names[kind]]["refined_rms"] = ref;
      agg[names[kind]]["refined_max"] = mx[1][kind];
      csv.row({std::string(names[kind]) + "_rms", "refined", "-", "-", num(ref), num(base), num(ref / base),
               ref < base ? "1" : "0"});
      res.check(std::string(names[kind]) + "_refinement")
          .record(ref < base, "RMS error " + num(ref) + " after refinement, " + num(base) + " before");
    }
  }
  res.csv.push_back({cfg.task, csv.str()});
  res.csv.push_back({cfg.task + "-probes", probes.str()});
  res.json["aggregate"] = agg;
  return res;
}

// ---------------------------------------------------------------- verify-identities

TaskResult verify_identities(const ExperimentConfig& cfg) {
  TaskResult res;
  const CoefficientMatrix a = cfg.matrix();
  const int n = a.dim();
  const CylinderMesh mesh = cfg.build_mesh();
  const CrossSection& cs = mesh.section();
  const double T = mesh.final_time();
  const int probes = cfg.params["probes"].get<int>();
  const double tol = cfg.params["tolerance"].get<double>();
  const double stol = cfg.params["surface_tolerance"].get<double>();
  const double t0 = cfg.params["initial_time"].get<double>();
  const double itol = cfg.params["initial_tolerance"].get<double>();
  std::vector<double> xi_values;
  if (cfg.params.contains("xi")) {
    xi_values = cfg.params["xi"].get<std::vector<double>>();
  } else {
    for (int i = 0; i < n; ++i) xi_values.push_back(0.3 + 0.1 * i);
  }
  Vec xi(n);
  for (int i = 0; i < n; ++i) xi[i] = xi_values[static_cast<std::size_t>(i)];

  std::mt19937_64 g(cfg.seed);
  std::vector<SpaceTimePoint> inside;
  std::vector<SpaceTimePoint> outside;
  for (int k = 0; k < probes; ++k) inside.push_back({radial_point(cs, n, g, uniform(g, 0.05, 0.85)), uniform(g, 0.05, 0.95) * T});
  for (int k = 0; k < probes; ++k) {
    switch (k % 3) {
      case 0:
        outside.push_back({radial_point(cs, n, g, uniform(g, 1.15, 2.0)), uniform(g, 0.05, 0.95) * T});
        break;
      case 1:
        outside.push_back({radial_point(cs, n, g, uniform(g, 0.05, 0.85)), -uniform(g, 0.05, 1.0) * T});
        break;
      default:
        outside.push_back({radial_point(cs, n, g, uniform(g, 0.05, 0.85)), (1.05 + uniform(g, 0.0, 1.0)) * T});
        break;
    }
  }

  struct Row {
    std::string identity;
    int index;
    SpaceTimePoint p;
    double value;
    double expected;
    double tol;
  };
  std::vector<Row> rows;
  auto run = [&](const std::string& identity, const std::vector<SpaceTimePoint>& pts, double expected, double tolerance,
                 const std::function<double(const SpaceTimePoint&)>& f, const std::function<double(const SpaceTimePoint&)>& exact = {}) {
    std::vector<double> values(pts.size());
    parallel_for(pts.size(), [&](std::size_t i) { values[i] = f(pts[i]); });
    for (std::size_t i = 0; i < pts.size(); ++i) {
      rows.push_back({identity, static_cast<int>(i), pts[i], values[i], exact ? exact(pts[i]) : expected, tolerance});
    }
  };

  run("partition_interior", inside, 1.0, tol, [&](const SpaceTimePoint& p) { return partition_identity(mesh, a, p); });
  run("partition_exterior", outside, 0.0, tol, [&](const SpaceTimePoint& p) { return partition_identity(mesh, a, p); });
  // the adjoint identity is 1 on the same interior and 0 outside the closed cylinder
  run("partition_star_interior", inside, 1.0, tol, [&](const SpaceTimePoint& p) { return partition_identity_star(mesh, a, p); });
  run("partition_star_exterior", outside, 0.0, tol, [&](const SpaceTimePoint& p) { return partition_identity_star(mesh, a, p); });

  for (Operator op : {Operator::H, Operator::HStar}) {
    const Sign sign = op == Operator::H ? Sign::Plus : Sign::Minus;
    const CaloricFunction u{[=](const SpaceTimePoint& p) { return caloric_exponential(a, p, {xi}, sign); },
                            [=](const SpaceTimePoint& p) { return Vec(xi * caloric_exponential(a, p, {xi}, sign)); }};
    const std::string tag = op == Operator::H ? "stokes_h" : "stokes_h_star";
    run(tag + "_interior", inside, 0.0, tol, [&](const SpaceTimePoint& p) { return stokes_check(mesh, a, u, p, op).reconstruction; },
        u.value);
    run(tag + "_exterior", outside, 0.0, tol, [&](const SpaceTimePoint& p) { return stokes_check(mesh, a, u, p, op).reconstruction; });
  }

  auto smooth = [n](const Vec& y, const Vec&, double) { return std::cos(y[0]) * std::exp(0.3 * y[n - 1]); };
  const DensityField bottom = DensityField::from_function(mesh, Region::Bottom, smooth);
  const DensityField top = DensityField::from_function(mesh, Region::Top, smooth);
  std::vector<SpaceTimePoint> early;
  std::vector<SpaceTimePoint> late;
  for (const SpaceTimePoint& p : inside) {
    early.push_back({p.x, t0});
    late.push_back({p.x, T - t0});
  }
  auto trace = [&](const SpaceTimePoint& p) { return smooth(p.x, Vec(), 0.0); };
  run("initial_limit", early, 0.0, itol, [&](const SpaceTimePoint& p) { return cap_potential(mesh, a, bottom, p); }, trace);
  run("final_limit_star", late, 0.0, itol, [&](const SpaceTimePoint& p) { return cap_potential_star(mesh, a, top, p); }, trace);

  if (n >= 3) {
    std::vector<SpaceTimePoint> surface;
    for (int k = 0; k < probes; ++k) surface.push_back({cs.surface_point(unit_vector(g, n)), 0.0});
    auto gauss = [&](const SpaceTimePoint& p) { return elliptic_gauss_identity(cs, a, p.x); };
    run("elliptic_gauss_interior", inside, 1.0, tol, gauss);
    std::vector<SpaceTimePoint> out_space;
    for (int k = 0; k < probes; ++k) out_space.push_back({radial_point(cs, n, g, uniform(g, 1.15, 2.0)), 0.0});
    run("elliptic_gauss_exterior", out_space, 0.0, tol, gauss);
    run("elliptic_gauss_surface", surface, 0.5, stol, gauss);
  }

  Csv csv({"identity", "index", "x", "t", "value", "expected", "error", "pass"});
  for (const Row& r : rows) {
    const double err = std::abs(r.value - r.expected);
    const bool ok = err < r.tol;
    csv.row({r.identity, std::to_string(r.index), join(r.p.x), num(r.p.t), num(r.value), num(r.expected), num(err), ok ? "1" : "0"});
    res.check(r.identity).record(ok, r.identity + " probe " + std::to_string(r.index) + ": error " + num(err));
  }
  res.csv.push_back({cfg.task, csv.str()});
  json summary = json::array();
  for (const Assertion& as : res.assertions) summary.push_back({{"identity", as.name}, {"passed", as.passed}, {"total", as.total}});
  res.json["identities"] = summary;
  return res;
}

// ---------------------------------------------------------------- poly-table

TaskResult poly_table(const ExperimentConfig& cfg) {
  TaskResult res;
  const RationalMatrix a = RationalMatrix::from_doubles(cfg.op.matrix);
  const int n = cfg.op.n;
  const Parity parity = cfg.op.parity;
  const Operator which = parity == Parity::V ? Operator::H : Operator::HStar;
  const int max_degree = cfg.params["max_degree"].get<int>();
  Csv csv({"index", "alpha", "parity", "t_degree", "annihilated", "initial_trace", "polynomial"});
  json list = json::array();
  int index = 0;
  for (const CaloricPolynomial& p : caloric_basis(a, max_degree, parity)) {
    const bool annihilated = apply_parabolic_operator(p.poly, a, which).is_zero();
    Monomial mono{p.alpha.alpha, 0};
    const bool trace = p.poly.at_time_zero() == Polynomial::monomial(n, mono);
    const std::string text = p.poly.to_string();
    csv.row({std::to_string(index), join(p.alpha.alpha), to_string(parity), std::to_string(p.poly.degree_in_t()),
             annihilated ? "1" : "0", trace ? "1" : "0", text});
    json entry = to_json(p);
    entry["annihilated"] = annihilated;
    list.push_back(entry);
    res.check("exact_annihilation").record(annihilated, "alpha " + join(p.alpha.alpha));
    res.check("initial_trace").record(trace, "alpha " + join(p.alpha.alpha));
    ++index;
  }
  res.csv.push_back({cfg.task, csv.str()});
  res.json["count"] = index;
  res.json["polynomials"] = list;
  return res;
}

// ---------------------------------------------------------------- solve / completeness

struct Data {
  BoundaryData values;
  std::function<double(const SpaceTimePoint&)> exact;
};

Data make_data(const ExperimentConfig& cfg, const CylinderMesh& mesh, const CoefficientMatrix& a) {
  const json& spec = cfg.params["data"];
  const std::string type = spec["type"].get<std::string>();
  const Parity parity = cfg.op.parity;
  const int n = a.dim();
  Data d;
  if (type == "exponential") {
    const std::vector<double> v = spec["xi"].get<std::vector<double>>();
    Vec xi(n);
    for (int i = 0; i < n; ++i) xi[i] = v[static_cast<std::size_t>(i)];
    const Sign sign = parity == Parity::V ? Sign::Plus : Sign::Minus;
    d.exact = [a, xi, sign](const SpaceTimePoint& p) { return caloric_exponential(a, p, {xi}, sign); };
    d.values = BoundaryData::from_function(mesh, parity, d.exact, DataSource::ClosedForm);
  } else if (type == "polynomial") {
    const CaloricPolynomial p = caloric_poly(RationalMatrix::from_doubles(cfg.op.matrix), MultiIndex{spec["alpha"].get<std::vector<int>>()}, parity);
    const double scale = spec["scale"].get<double>();
    d.exact = [p, scale](const SpaceTimePoint& q) { return scale * p.evaluate(q); };
    d.values = BoundaryData::from_function(mesh, parity, d.exact, DataSource::PolynomialRestriction);
  } else if (type == "abs") {
    const int c = spec["component"].get<int>() - 1;
    d.values = BoundaryData::from_function(mesh, parity, [c](const SpaceTimePoint& p) { return std::abs(p.x[c]); });
  } else if (type == "constant") {
    const double c = spec["value"].get<double>();
    d.exact = [c](const SpaceTimePoint&) { return c; };
    d.values = BoundaryData::from_function(mesh, parity, d.exact);
  } else {
    const std::filesystem::path path = cfg.resolve(spec["path"].get<std::string>());
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot read data file '" + path.string() + "'");
    std::vector<double> values;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#' || line == "value") continue;
      try {
        std::size_t used = 0;
        values.push_back(std::stod(line, &used));
        if (line.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(line);
      } catch (const std::exception&) {
        throw Error(ErrorCode::ConfigInvalid, "data file line '" + line + "' is not a number");
      }
    }
    try {
      d.values = BoundaryData::sampled(mesh, parity, std::move(values), DataSource::File);
    } catch (const Error& e) {
      throw Error(ErrorCode::ConfigInvalid, std::string("data file: ") + e.what());
    }
  }
  return d;
}

TaskResult solve(const ExperimentConfig& cfg) {
  TaskResult res;
  const CoefficientMatrix a = cfg.matrix();
  const CylinderMesh mesh = cfg.build_mesh();
  const Parity parity = cfg.op.parity;
  const Data data = make_data(cfg, mesh, a);
  const int degree = cfg.params["degree"].get<int>();
  const double rcond = cfg.params["rcond"].get<double>();
  const CaloricApproximant fit = solve_dirichlet(mesh, a, parity, degree, data.values, rcond);

  const BoundaryNodes nodes = boundary_nodes(mesh, parity);
  const std::vector<double> values = evaluate_solution(fit, a, nodes.points);
  const std::size_t cap = mesh.region_size(data_cap(parity));
  Csv csv({"region", "index", "t", "x", "weight", "data", "fit"});
  for (std::size_t i = 0; i < nodes.points.size(); ++i) {
    const bool on_cap = i < cap;
    csv.row({to_string(on_cap ? data_cap(parity) : Region::Lateral), std::to_string(on_cap ? i : i - cap),
             num(nodes.points[i].t), join(nodes.points[i].x), num(nodes.weights[i]), num(data.values.values[i]),
             num(values[i])});
  }
  res.csv.push_back({cfg.task, csv.str()});
  res.json["approximant"] = fit.to_json();
  res.json["data_source"] = to_string(data.values.source);
  if (data.exact) {
    const std::vector<SpaceTimePoint> probes = interior_probe_grid(mesh);
    const std::vector<double> approx = evaluate_solution(fit, a, probes);
    double err = 0.0;
    for (std::size_t i = 0; i < probes.size(); ++i) err = std::max(err, std::abs(approx[i] - data.exact(probes[i])));
    res.json["interior_max_error"] = err;
  }
  res.check("finite_residual").record(std::isfinite(fit.residual), "residual is not finite");
  if (cfg.params.contains("max_residual")) {
    const double bound = cfg.params["max_residual"].get<double>();
    res.check("max_residual").record(fit.residual <= bound, "residual " + num(fit.residual) + " exceeds " + num(bound));
  }
  if (mesh.dim() == 2) res.notes.push_back("exploratory: n = 2 cross-section");
  return res;
}

TaskResult completeness(const ExperimentConfig& cfg) {
  TaskResult res;
  const CoefficientMatrix a = cfg.matrix();
  const CylinderMesh mesh = cfg.build_mesh();
  const Parity parity = cfg.op.parity;
  const Data data = make_data(cfg, mesh, a);
  const std::vector<int> degrees = cfg.params["degrees"].get<std::vector<int>>();
  const double rcond = cfg.params["rcond"].get<double>();
  const StudyReport report = completeness_study(mesh, a, parity, data.values, degrees, rcond, data.exact);

  // timings stay in the JSON report so the CSV is reproducible
  Csv csv({"degree", "residual", "rank", "cond", "interior_max_err"});
  for (std::size_t i = 0; i < degrees.size(); ++i) {
    csv.row({std::to_string(degrees[i]), num(report.residuals[i]), std::to_string(report.ranks[i]), num(report.conditions[i]),
             num(report.interior_max_errors[i])});
    if (i > 0) {
      res.check("non_increasing")
          .record(report.residuals[i] <= report.residuals[i - 1] + 1e-12,
                  "residual rises from degree " + std::to_string(degrees[i - 1]) + " to " + std::to_string(degrees[i]));
    }
  }
  if (cfg.params.contains("max_final_residual")) {
    const double bound = cfg.params["max_final_residual"].get<double>();
    res.check("max_final_residual")
        .record(report.residuals.back() <= bound, "final residual " + num(report.residuals.back()) + " exceeds " + num(bound));
  }
  if (cfg.params.contains("max_decay_ratio")) {
    const double bound = cfg.params["max_decay_ratio"].get<double>();
    const double ratio = report.residuals.back() / report.residuals.front();
    res.check("max_decay_ratio").record(ratio < bound, "decay ratio " + num(ratio) + " is not below " + num(bound));
  }
  res.check("finite_residuals").record(std::all_of(report.residuals.begin(), report.residuals.end(),
                                                   [](double r) { return std::isfinite(r); }),
                                       "non-finite residual");
  res.csv.push_back({cfg.task, csv.str()});
  res.json["study"] = report.to_json();
  if (report.exploratory) res.notes.push_back("exploratory: n = 2 cross-section");
  return res;
}

}  // namespace

TaskResult run_task(const ExperimentConfig& cfg) {
  if (cfg.task == "verify-kernels") return verify_kernels(cfg);
  if (cfg.task == "verify-jumps") return verify_jumps(cfg);
  if (cfg.task == "verify-identities") return verify_identities(cfg);
  if (cfg.task == "poly-table") return poly_table(cfg);
  if (cfg.task == "solve") return solve(cfg);
  if (cfg.task == "completeness") return completeness(cfg);
  throw Error(ErrorCode::ConfigInvalid, "unknown task '" + cfg.task + "'");
}

std::vector<std::filesystem::path> write_reports(const ExperimentConfig& cfg, const TaskResult& result,
                                                 const std::filesystem::path& dir, const std::string& timestamp) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  if (cfg.output.csv) {
    for (const auto& [stem, body] : result.csv) {
      const std::filesystem::path path = dir / (stem + ".csv");
      std::ofstream out(path, std::ios::binary);
      out << "# generated " << timestamp << '\n';
      out << "# calorix " << kVersion << '\n';
      out << "# config " << cfg.echo.dump() << '\n';
      for (const std::string& note : result.notes) out << "# " << note << '\n';
      out << body;
      if (!out) throw Error(ErrorCode::TaskFailed, "cannot write '" + path.string() + "'");
      written.push_back(path);
    }
  }
  if (cfg.output.json) {
    json checks = json::array();
    for (const Assertion& a : result.assertions) {
      checks.push_back({{"name", a.name}, {"passed", a.passed}, {"total", a.total}, {"first_failure", a.first_failure}});
    }
    json report{{"generated", timestamp},       {"version", kVersion}, {"config", cfg.echo},
                {"notes", result.notes},        {"result", result.json}, {"assertions", checks},
                {"passed", result.passed()}};
    const std::filesystem::path path = dir / (cfg.task + ".json");
    std::ofstream out(path, std::ios::binary);
    out << report.dump(2) << '\n';
    if (!out) throw Error(ErrorCode::TaskFailed, "cannot write '" + path.string() + "'");
    written.push_back(path);
  }
  return written;
}

std::string list_tasks_text() {
  std::ostringstream out;
  for (const TaskInfo& t : task_catalog()) {
    out << t.name << "\n  " << t.summary << "\n  topic: " << t.topic << "\n  needs geometry and mesh: " << (t.needs_mesh ? "yes" : "no")
        << '\n';
    for (const ParamSpec& p : t.params) {
      out << "  params." << p.name << " (" << p.type;
      if (p.required) {
        out << ", required";
      } else if (!p.default_value.is_null()) {
        out << ", default " << p.default_value.dump();
      }
      out << "): " << p.doc << '\n';
    }
  }
  return out.str();
}

std::string summary_table(const TaskResult& result) {
  std::ostringstream out;
  std::size_t width = 5;
  for (const Assertion& a : result.assertions) width = std::max(width, a.name.size());
  char line[256];
  std::snprintf(line, sizeof line, "%-*s  %9s  %s\n", static_cast<int>(width), "check", "passed", "status");
  out << line;
  for (const Assertion& a : result.assertions) {
    const std::string ratio = std::to_string(a.passed) + "/" + std::to_string(a.total);
    std::snprintf(line, sizeof line, "%-*s  %9s  %s\n", static_cast<int>(width), a.name.c_str(), ratio.c_str(),
                  a.pass() ? "PASS" : "FAIL");
    out << line;
  }
  return out.str();
}

}  // namespace calorix::cli
