#include "calorix/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

#include "calorix/error.hpp"
#include "calorix/kernels.hpp"
#include "calorix/parallel.hpp"
#include "calorix/quadrature.hpp"

namespace calorix {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
// exp(-kCutoff) is negligible against any kernel value that matters
constexpr double kCutoff = 60.0;
constexpr double kOnBoundary = 1e-10;

// ---------------------------------------------------------------- interpolation

std::vector<double> barycentric_weights(const std::vector<double>& nodes) {
  const std::size_t m = nodes.size();
  std::vector<double> w(m, 1.0);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t k = 0; k < m; ++k) {
      if (k != j) w[j] /= nodes[j] - nodes[k];
    }
  }
  const double scale = *std::max_element(w.begin(), w.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
  for (double& v : w) v /= std::abs(scale);
  return w;
}

void lagrange_coeffs(const std::vector<double>& nodes, const std::vector<double>& bw, double x,
                     std::vector<double>& out) {
  const std::size_t m = nodes.size();
  out.assign(m, 0.0);
  double denom = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double d = x - nodes[j];
    if (d == 0.0) {
      out.assign(m, 0.0);
      out[j] = 1.0;
      return;
    }
    out[j] = bw[j] / d;
    denom += out[j];
  }
  for (double& v : out) v /= denom;
}

// Cardinal functions of trigonometric interpolation on m equispaced nodes 2 pi j / m.
void trig_coeffs(int m, double theta, std::vector<double>& out) {
  out.assign(m, 0.0);
  for (int j = 0; j < m; ++j) {
    const double d = theta - kTwoPi * j / m;
    const double half = 0.5 * d;
    const double sh = std::sin(half);
    if (std::abs(sh) < 1e-15) {
      for (int k = 0; k < m; ++k) out[k] = k == j ? 1.0 : 0.0;
      return;
    }
    const double num = std::sin(m * half);
    out[j] = m % 2 == 0 ? num * std::cos(half) / (m * sh) : num / (m * sh);
  }
}

double dot(const std::vector<double>& c, const double* v, std::size_t stride = 1) {
  double s = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) s += c[i] * v[i * stride];
  return s;
}

// ---------------------------------------------------------------- samplers

// Boundary location for density lookup: planar angle, or unit vector on the sphere.
struct SurfaceParam {
  double theta = 0.0;
  Vec u;
};

class LateralSampler {
 public:
  LateralSampler(const CylinderMesh& mesh, const DensityField& phi) : mesh_(mesh), phi_(phi) {
    if (!phi.has_generator()) {
      time_bw_ = barycentric_weights(mesh.time_nodes());
      if (mesh.dim() == 3) polar_bw_ = barycentric_weights(mesh.angle_nodes());
    }
  }

  void bind(const Vec& y, const Vec& nu, const SurfaceParam& p) {
    y_ = y;
    nu_ = nu;
    if (phi_.has_generator()) return;
    const std::size_t spatial = mesh_.spatial_count();
    const std::size_t mt = mesh_.time_nodes().size();
    column_.assign(mt, 0.0);
    const auto& v = phi_.values();
    if (mesh_.dim() == 2) {
      trig_coeffs(mesh_.m_angular(), p.theta, space_);
      for (std::size_t k = 0; k < mt; ++k) column_[k] = dot(space_, v.data() + k * spatial);
    } else {
      const auto ang = spherical_angles(p.u);
      lagrange_coeffs(mesh_.angle_nodes(), polar_bw_, ang[0], polar_);
      trig_coeffs(mesh_.m_angular(), ang[1], space_);
      const std::size_t ma = mesh_.azimuth_nodes().size();
      for (std::size_t k = 0; k < mt; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < polar_.size(); ++i) {
          if (polar_[i] == 0.0) continue;
          s += polar_[i] * dot(space_, v.data() + k * spatial + i * ma);
        }
        column_[k] = s;
      }
    }
  }

  double at(double s) {
    if (phi_.has_generator()) return phi_.generator()(y_, nu_, s);
    lagrange_coeffs(mesh_.time_nodes(), time_bw_, s, time_);
    return dot(time_, column_.data());
  }

 private:
  const CylinderMesh& mesh_;
  const DensityField& phi_;
  std::vector<double> time_bw_, polar_bw_, column_, space_, polar_, time_;
  Vec y_, nu_;
};

class CapSampler {
 public:
  CapSampler(const CylinderMesh& mesh, const DensityField& phi) : mesh_(mesh), phi_(phi) {
    s_cap_ = phi.region() == Region::Top ? mesh.final_time() : 0.0;
    if (!phi.has_generator()) {
      radial_bw_ = barycentric_weights(mesh.radial_nodes());
      if (mesh.dim() == 3) polar_bw_ = barycentric_weights(mesh.angle_nodes());
    }
  }

  // y is the physical point, r the scaled radius, p its angular location
  double at(const Vec& y, double r, const SurfaceParam& p) {
    if (phi_.has_generator()) return phi_.generator()(y, Vec(), s_cap_);
    const auto& v = phi_.values();
    lagrange_coeffs(mesh_.radial_nodes(), radial_bw_, r, radial_);
    const std::size_t cells = v.size() / mesh_.radial_nodes().size();
    if (mesh_.dim() == 2) {
      trig_coeffs(mesh_.m_angular(), p.theta, space_);
    } else {
      const auto ang = spherical_angles(p.u);
      lagrange_coeffs(mesh_.angle_nodes(), polar_bw_, ang[0], polar_);
      trig_coeffs(mesh_.m_angular(), ang[1], azimuth_);
      const std::size_t ma = azimuth_.size();
      space_.assign(cells, 0.0);
      for (std::size_t i = 0; i < polar_.size(); ++i) {
        for (std::size_t j = 0; j < ma; ++j) space_[i * ma + j] = polar_[i] * azimuth_[j];
      }
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < radial_.size(); ++k) {
      if (radial_[k] == 0.0) continue;
      sum += radial_[k] * dot(space_, v.data() + k * cells);
    }
    return sum;
  }

 private:
  const CylinderMesh& mesh_;
  const DensityField& phi_;
  double s_cap_ = 0.0;
  std::vector<double> radial_bw_, polar_bw_, radial_, space_, polar_, azimuth_;
};

// ---------------------------------------------------------------- validation

void check_inputs(const CylinderMesh& mesh, const CoefficientMatrix& a, const DensityField& phi, Region want) {
  if (a.dim() != mesh.dim()) throw Error(ErrorCode::DimensionMismatch, "matrix and mesh dimensions differ");
  if (phi.region() != want) {
    throw Error(ErrorCode::RegionMismatch, "density lives on " + to_string(phi.region()) + ", expected " +
                                               to_string(want));
  }
  if (phi.mesh_fingerprint() != mesh.fingerprint()) {
    throw Error(ErrorCode::RegionMismatch, "density was sampled on a different mesh");
  }
}

double normaliser(const CoefficientMatrix& a) {
  return std::pow(4.0 * kPi, -0.5 * a.dim()) / a.sqrt_det();
}

// ---------------------------------------------------------------- lateral integration

struct SpatialNode {
  Vec y;
  Vec nu;
  double w;
  SurfaceParam param;
};

// Spatial rule on the lateral boundary, graded toward the point nearest x.
std::vector<SpatialNode> lateral_rule(const CrossSection& cs, const CrossSection::Nearest& nb,
                                      const PotentialOptions& opt) {
  std::vector<SpatialNode> nodes;
  if (cs.dim() == 2) {
    const double speed = cs.curve_d1(nb.theta).norm();
    const double first = std::max(nb.distance, 1e-12) / speed;
    const auto bp = graded_breakpoints(nb.theta - kPi, nb.theta + kPi, nb.theta, first,
                                       kTwoPi / opt.min_space_panels);
    const Rule1d rule = composite_gauss(bp, opt.space_order);
    nodes.reserve(rule.nodes.size());
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double th = rule.nodes[i];
      SpatialNode sn{cs.curve(th), cs.inward_normal_2d(th), rule.weights[i] * cs.curve_d1(th).norm(), {}};
      sn.param.theta = th;
      nodes.push_back(std::move(sn));
    }
    return nodes;
  }
  const PoleChart chart = PoleChart::at(nb.u);
  const double scale = cs.semi_axes().maxCoeff();
  const auto bp = graded_breakpoints(0.0, kPi, 0.0, std::max(nb.distance, 1e-12) / scale, kPi / opt.min_space_panels);
  const Rule1d polar = composite_gauss(bp, opt.space_order);
  const Rule1d az = periodic_trapezoid(opt.azimuth_count, kTwoPi);
  nodes.reserve(polar.nodes.size() * az.nodes.size());
  for (std::size_t i = 0; i < polar.nodes.size(); ++i) {
    for (std::size_t j = 0; j < az.nodes.size(); ++j) {
      const Vec u = chart.direction(polar.nodes[i], az.nodes[j]);
      const double w = polar.weights[i] * az.weights[j] * std::sin(polar.nodes[i]) * cs.area_factor(u);
      SpatialNode sn{cs.surface_point(u), cs.inward_normal_3d(u), w, {}};
      sn.param.u = u;
      nodes.push_back(std::move(sn));
    }
  }
  return nodes;
}

enum class TimeDirection { Forward, Backward };

// Integrates  sum over Sigma3 of  phi * coef(b, nu_b) * tau^{-extra} * G(target - b, tau)
// with tau = t - s (forward, boundary time s < t) or s_b - s (backward, boundary time > target time).
template <class Coef>
double integrate_lateral(const CylinderMesh& mesh, const CoefficientMatrix& a, const DensityField& phi,
                         const SpaceTimePoint& target, TimeDirection dir, int extra, const PotentialOptions& opt,
                         Coef coef) {
  const double T = mesh.final_time();
  const double t = target.t;
  double tau_hi, tau_lo0;
  if (dir == TimeDirection::Forward) {
    tau_hi = t;
    tau_lo0 = std::max(0.0, t - T);
  } else {
    tau_hi = T - t;
    tau_lo0 = std::max(0.0, -t);
  }
  if (!(tau_hi > 0.0)) return 0.0;
  const CrossSection& cs = mesh.section();
  const auto nb = cs.nearest(target.x);
  if (nb.distance <= kOnBoundary && tau_lo0 == 0.0) {
    throw Error(ErrorCode::TargetOnBoundary, "target lies on the lateral boundary");
  }
  const int n = mesh.dim();
  const double power = 1.0 - 0.5 * n - extra;  // includes the d tau = tau d sigma factor
  const Rule1d& ref = gauss_legendre(opt.time_order);
  LateralSampler sampler(mesh, phi);
  const auto nodes = lateral_rule(cs, nb, opt);
  double total = 0.0;
  for (const auto& sn : nodes) {
    const double c = coef(sn.y, sn.nu);
    if (c == 0.0) continue;
    const Vec z = target.x - sn.y;
    const double q = a.inverse_quadratic(z);
    const double tau_lo = std::max(tau_lo0, q / (4.0 * kCutoff));
    if (!(tau_lo < tau_hi)) continue;
    sampler.bind(sn.y, sn.nu, sn.param);
    const double s_lo = std::log(tau_lo);
    const double s_hi = std::log(tau_hi);
    const int panels = std::max(1, static_cast<int>(std::ceil((s_hi - s_lo) / opt.time_panel_width)));
    const double width = (s_hi - s_lo) / panels;
    double acc = 0.0;
    for (int p = 0; p < panels; ++p) {
      const double mid = s_lo + (p + 0.5) * width;
      for (std::size_t i = 0; i < ref.nodes.size(); ++i) {
        const double sigma = mid + 0.5 * width * ref.nodes[i];
        const double tau = std::exp(sigma);
        const double s = dir == TimeDirection::Forward ? t - tau : t + tau;
        acc += ref.weights[i] * sampler.at(s) * std::exp(power * sigma - q / (4.0 * tau));
      }
    }
    total += sn.w * c * 0.5 * width * acc;
  }
  return normaliser(a) * total;
}

// ---------------------------------------------------------------- cap integration

double integrate_cap(const CylinderMesh& mesh, const CoefficientMatrix& a, const DensityField& phi, const Vec& x,
                     double tau, const PotentialOptions& opt) {
  if (!(tau > 0.0)) return 0.0;
  const CrossSection& cs = mesh.section();
  const double pref = normaliser(a) * std::pow(tau, -0.5 * mesh.dim());
  const double width = std::sqrt(4.0 * tau * a.max_eigenvalue());
  double scale = 1.0;
  for (double v : phi.values()) scale = std::max(scale, std::abs(v));
  CapSampler sampler(mesh, phi);
  const double r0 = std::clamp(cs.radial_coordinate(x), 0.0, 1.0);

  if (mesh.dim() == 2) {
    const double theta0 = cs.kind() == SectionKind::Ellipse
                              ? std::atan2(x[1] / cs.parameters()[1], x[0] / cs.parameters()[0])
                              : std::atan2(x[1], x[0]);
    const double reach = cs.curve(theta0).norm();
    const auto br = graded_breakpoints(0.0, 1.0, r0, 0.5 * width / reach, 0.25);
    const double arc = std::max(r0, 0.05) * cs.curve_d1(theta0).norm();
    const auto bt = graded_breakpoints(theta0 - kPi, theta0 + kPi, theta0, 0.5 * width / arc, kPi / 4.0);
    std::vector<Box<2>> boxes;
    for (std::size_t i = 0; i + 1 < br.size(); ++i) {
      for (std::size_t j = 0; j + 1 < bt.size(); ++j) boxes.push_back({{br[i], bt[j]}, {br[i + 1], bt[j + 1]}});
    }
    auto f = [&](const std::array<double, 2>& p) {
      const Vec g = cs.curve(p[1]);
      const Vec g1 = cs.curve_d1(p[1]);
      const Vec y = p[0] * g;
      const double q = a.inverse_quadratic(x - y);
      const double e = -q / (4.0 * tau);
      if (e < kUnderflowExponent) return 0.0;
      SurfaceParam sp;
      sp.theta = p[1];
      return sampler.at(y, p[0], sp) * std::exp(e) * p[0] * (g[0] * g1[1] - g[1] * g1[0]);
    };
    AdaptiveOptions<2> ao;
    ao.order = opt.cap_order;
    ao.abs_tol = opt.cap_tol * scale / pref;
    return pref * adaptive_cubature<2>(f, boxes, ao);
  }

  const Vec d = cs.semi_axes();
  Vec u0 = x.cwiseQuotient(d);
  if (u0.norm() < 1e-300) {
    u0 = Vec::Zero(3);
    u0[2] = 1.0;
  }
  const PoleChart chart = PoleChart::at(u0);
  const double reach = d.cwiseProduct(chart.pole).norm();
  const auto br = graded_breakpoints(0.0, 1.0, r0, 0.5 * width / reach, 0.25);
  const auto bt = graded_breakpoints(0.0, kPi, 0.0, 0.5 * width / (std::max(r0, 0.05) * d.maxCoeff()), kPi / 4.0);
  std::vector<Box<3>> boxes;
  const int nphi = 4;
  for (std::size_t i = 0; i + 1 < br.size(); ++i) {
    for (std::size_t j = 0; j + 1 < bt.size(); ++j) {
      for (int k = 0; k < nphi; ++k) {
        boxes.push_back({{br[i], bt[j], kTwoPi * k / nphi}, {br[i + 1], bt[j + 1], kTwoPi * (k + 1) / nphi}});
      }
    }
  }
  const double abc = d[0] * d[1] * d[2];
  auto f = [&](const std::array<double, 3>& p) {
    const Vec u = chart.direction(p[1], p[2]);
    const Vec y = p[0] * d.cwiseProduct(u);
    const double q = a.inverse_quadratic(x - y);
    const double e = -q / (4.0 * tau);
    if (e < kUnderflowExponent) return 0.0;
    SurfaceParam sp;
    sp.u = u;
    return sampler.at(y, p[0], sp) * std::exp(e) * abc * p[0] * p[0] * std::sin(p[1]);
  };
  AdaptiveOptions<3> ao;
  ao.order = opt.cap_order;
  ao.abs_tol = opt.cap_tol * scale / pref;
  return pref * adaptive_cubature<3>(f, boxes, ao);
}

PotentialOptions resolve(const CylinderMesh& mesh, const std::optional<PotentialOptions>& opts) {
  return opts ? *opts : PotentialOptions::for_mesh(mesh);
}

double neville_at_zero(const std::vector<double>& h, const std::vector<double>& v) {
  std::vector<double> p = v;
  const std::size_t m = h.size();
  for (std::size_t level = 1; level < m; ++level) {
    for (std::size_t i = 0; i + level < m; ++i) {
      p[i] = (h[i + level] * p[i] - h[i] * p[i + 1]) / (h[i + level] - h[i]);
    }
  }
  return p[0];
}

}  // namespace

// ---------------------------------------------------------------- DensityField

DensityField DensityField::sampled(const CylinderMesh& mesh, Region region, std::vector<double> values) {
  if (values.size() != mesh.region_size(region)) {
    throw Error(ErrorCode::DimensionMismatch, "density value count differs from the region's node count");
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "density values must be finite");
  }
  DensityField f;
  f.region_ = region;
  f.values_ = std::move(values);
  f.fingerprint_ = mesh.fingerprint();
  return f;
}

DensityField DensityField::from_function(const CylinderMesh& mesh, Region region, DensityGenerator g) {
  std::vector<double> values;
  values.reserve(mesh.region_size(region));
  if (region == Region::Lateral) {
    for (const auto& n : mesh.lateral()) values.push_back(g(n.y, n.nu, n.s));
  } else {
    const double s = region == Region::Top ? mesh.final_time() : 0.0;
    for (const auto& n : region == Region::Top ? mesh.top() : mesh.bottom()) values.push_back(g(n.y, Vec(), s));
  }
  DensityField f = sampled(mesh, region, std::move(values));
  f.generator_ = std::move(g);
  return f;
}

DensityField DensityField::constant(const CylinderMesh& mesh, Region region, double c) {
  return from_function(mesh, region, [c](const Vec&, const Vec&, double) { return c; });
}

DensityField DensityField::nodal() const {
  DensityField f = *this;
  f.generator_ = nullptr;
  return f;
}

DensityField reflect_time(const CylinderMesh& mesh, const DensityField& phi) {
  const double T = mesh.final_time();
  DensityField out = phi;
  if (phi.region() == Region::Lateral) {
    const std::size_t spatial = mesh.spatial_count();
    const std::size_t mt = mesh.time_nodes().size();
    std::vector<double> v(phi.values().size());
    for (std::size_t k = 0; k < mt; ++k) {
      for (std::size_t i = 0; i < spatial; ++i) v[(mt - 1 - k) * spatial + i] = phi.values()[k * spatial + i];
    }
    out = DensityField::sampled(mesh, Region::Lateral, std::move(v));
    if (phi.has_generator()) {
      auto g = phi.generator();
      out = DensityField::from_function(mesh, Region::Lateral,
                                        [g, T](const Vec& y, const Vec& nu, double s) { return g(y, nu, T - s); });
    }
    return out;
  }
  const Region swapped = phi.region() == Region::Top ? Region::Bottom : Region::Top;
  if (phi.has_generator()) {
    auto g = phi.generator();
    return DensityField::from_function(mesh, swapped,
                                       [g, T](const Vec& y, const Vec& nu, double s) { return g(y, nu, T - s); });
  }
  return DensityField::sampled(mesh, swapped, phi.values());
}

PotentialOptions PotentialOptions::for_mesh(const CylinderMesh& mesh) {
  PotentialOptions o;
  o.space_order = std::clamp(mesh.m_angular() / 4, 8, 32);
  o.time_order = std::clamp(mesh.m_time(), 8, 24);
  o.azimuth_count = std::max(32, mesh.m_angular());
  return o;
}

// ---------------------------------------------------------------- potentials

double double_layer(const CylinderMesh& mesh, const CoefficientMatrix& a, const DensityField& phi,
                    const SpaceTimePoint& target, const std::optional<PotentialOptions>& opts) {
  check_inputs(mesh, a, phi, Region::Lateral);
  const Vec x = target.x;
  return integrate_lateral(mesh, a, phi, target, TimeDirection::Forward, 1, resolve(mesh, opts),
                           [&](const Vec& y, const Vec& nu) { return 0.5 * nu.dot(x - y); });
}

double single_layer(const CylinderMesh& mesh, const CoefficientMatrix& a, const DensityField& phi,
                    const SpaceTimePoint& target, const std::optional<PotentialOptions>& opts) {
  check_inputs(mesh, a, phi, Region::Lateral);
  return integrate_lateral(mesh, a, phi, target, TimeDirection::Forward, 0, resolve(mesh, opts),
                           [](const Vec&, const Vec&) { return 1.0; });
}

double conormal_derivative_single_layer(const CylinderMesh& mesh, const CoefficientMatrix& a,
                                        const DensityField& phi, const SpaceTimePoint& target, const Vec& nu0,
                                        const std::optional<PotentialOptions>& opts) {
  check_inputs(mesh, a, phi, Region::Lateral);
  const Vec x = target.x;
  return integrate_lateral(mesh, a, phi, target, TimeDirection::Forward, 1, resolve(mesh, opts),
                           [&](const Vec& y, const Vec&) { return -0.5 * nu0.dot(x - y); });
}

double conormal_derivative_single_layer(const CylinderMesh& mesh, const CoefficientMatrix& a,
                                        const DensityField& phi, std::size_t node, double h,
                                        const std::optional<PotentialOptions>& opts) {
  const SpaceTimePoint p = offset_point(mesh, node, h);
  return conormal_derivative_single_layer(mesh, a, phi, p, mesh.lateral()[node].nu, opts);
}

double cap_potential(const CylinderMesh& mesh, const CoefficientMatrix& a, const DensityField& phi,
                     const SpaceTimePoint& target, const std::optional<PotentialOptions>& opts) {
  check_inputs(mesh, a, phi, Region::Bottom);
  return integrate_cap(mesh, a, phi, target.x, target.t, resolve(mesh, opts));
}

double top_cap_potential(const CylinderMesh& mesh, const CoefficientMatrix& a, const DensityField& phi,
                         const SpaceTimePoint& target, const std::optional<PotentialOptions>& opts) {
  check_inputs(mesh, a, phi, Region::Top);
  return integrate_cap(mesh, a, phi, target.x, target.t - mesh.final_time(), resolve(mesh, opts));
}

double double_layer_star(const CylinderMesh& mesh, const CoefficientMatrix& a, const DensityField& phi,
                         const SpaceTimePoint& target, const std::optional<PotentialOptions>& opts) {
  check_inputs(mesh, a, phi, Region::Lateral);
  const Vec y = target.x;
  // -<nu_x, x - y> / (2 tau) G with x on the boundary
  return integrate_lateral(mesh, a, phi, target, TimeDirection::Backward, 1, resolve(mesh, opts),
                           [&](const Vec& x, const Vec& nu) { return -0.5 * nu.dot(x - y); });
}

double single_layer_star(const CylinderMesh& mesh, const CoefficientMatrix& a, const DensityField& phi,
                         const SpaceTimePoint& target, const std::optional<PotentialOptions>& opts) {
  check_inputs(mesh, a, phi, Region::Lateral);
  return integrate_lateral(mesh, a, phi, target, TimeDirection::Backward, 0, resolve(mesh, opts),
                           [](const Vec&, const Vec&) { return 1.0; });
}

double cap_potential_star(const CylinderMesh& mesh, const CoefficientMatrix& a, const DensityField& phi,
                          const SpaceTimePoint& target, const std::optional<PotentialOptions>& opts) {
  check_inputs(mesh, a, phi, Region::Top);
  return integrate_cap(mesh, a, phi, target.x, mesh.final_time() - target.t, resolve(mesh, opts));
}

double bottom_cap_potential_star(const CylinderMesh& mesh, const CoefficientMatrix& a, const DensityField& phi,
                                 const SpaceTimePoint& target, const std::optional<PotentialOptions>& opts) {
  check_inputs(mesh, a, phi, Region::Bottom);
  return integrate_cap(mesh, a, phi, target.x, -target.t, resolve(mesh, opts));
}

double partition_identity(const CylinderMesh& mesh, const CoefficientMatrix& a, const SpaceTimePoint& target,
                          const std::optional<PotentialOptions>& opts) {
  const auto one_lateral = DensityField::constant(mesh, Region::Lateral, 1.0);
  const auto one_bottom = DensityField::constant(mesh, Region::Bottom, 1.0);
  const auto one_top = DensityField::constant(mesh, Region::Top, 1.0);
  return double_layer(mesh, a, one_lateral, target, opts) + cap_potential(mesh, a, one_bottom, target, opts) -
         top_cap_potential(mesh, a, one_top, target, opts);
}

double partition_identity_star(const CylinderMesh& mesh, const CoefficientMatrix& a, const SpaceTimePoint& target,
                               const std::optional<PotentialOptions>& opts) {
  const auto one_lateral = DensityField::constant(mesh, Region::Lateral, 1.0);
  const auto one_bottom = DensityField::constant(mesh, Region::Bottom, 1.0);
  const auto one_top = DensityField::constant(mesh, Region::Top, 1.0);
  return double_layer_star(mesh, a, one_lateral, target, opts) + cap_potential_star(mesh, a, one_top, target, opts) -
         bottom_cap_potential_star(mesh, a, one_bottom, target, opts);
}

double elliptic_gauss_identity(const CrossSection& cs, const CoefficientMatrix& a, const Vec& x, int resolution) {
  if (a.dim() < 3 || cs.dim() < 3) throw Error(ErrorCode::DimensionTooSmall, "the elliptic kernel needs n >= 3");
  if (a.dim() != cs.dim()) throw Error(ErrorCode::DimensionMismatch, "matrix and section dimensions differ");
  if (resolution < 4) throw Error(ErrorCode::InvalidResolution, "resolution must be >= 4");
  const Vec d = cs.semi_axes();
  const bool on_surface = std::abs(cs.radial_coordinate(x) - 1.0) <= 1e-12;
  Vec pole;
  double dist = 0.0;
  if (on_surface) {
    pole = x.cwiseQuotient(d);
  } else {
    const auto nb = cs.nearest(x);
    pole = nb.u;
    dist = nb.distance;
  }
  const PoleChart chart = PoleChart::at(pole);
  // on the surface the kernel is O(1/rho) and the polar Jacobian sin(theta) cancels it
  const double first = on_surface ? kPi / 8.0 : std::max(dist, 1e-12) / d.maxCoeff();
  const auto bp = graded_breakpoints(0.0, kPi, 0.0, first, kPi / 8.0);
  const Rule1d polar = composite_gauss(bp, std::max(8, resolution / 2));
  const Rule1d az = periodic_trapezoid(2 * resolution, kTwoPi);
  double sum = 0.0;
  for (std::size_t i = 0; i < polar.nodes.size(); ++i) {
    for (std::size_t j = 0; j < az.nodes.size(); ++j) {
      const Vec u = chart.direction(polar.nodes[i], az.nodes[j]);
      const Vec y = cs.surface_point(u);
      const double w = polar.weights[i] * az.weights[j] * std::sin(polar.nodes[i]) * cs.area_factor(u);
      sum -= w * elliptic_conormal_kernel(a, x, y, cs.inward_normal_3d(u));
    }
  }
  return sum;
}

// ---------------------------------------------------------------- jumps

void JumpProbeReport::write_csv(std::ostream& out, bool header) const {
  if (header) out << "node,h,interior,exterior,extrapolated,predicted,error\n";
  char buf[256];
  for (std::size_t k = 0; k < offsets.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", node, offsets[k], interior[k],
                  exterior[k], jump, predicted, error);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "%zu,0,%.17g,%.17g,%.17g,%.17g,%.17g\n", node, limit_interior, limit_exterior, jump,
                predicted, error);
  out << buf;
}

JumpProbeReport jump_probe(const CylinderMesh& mesh, const CoefficientMatrix& a, const DensityField& phi,
                           std::size_t node, JumpKind kind, const std::optional<PotentialOptions>& opts) {
  check_inputs(mesh, a, phi, Region::Lateral);
  if (node >= mesh.lateral().size()) throw Error(ErrorCode::InvalidArgument, "lateral node index out of range");
  const LateralNode& ln = mesh.lateral()[node];
  const double T = mesh.final_time();
  if (!(ln.s > 0.1 * T && ln.s < 0.9 * T)) {
    throw Error(ErrorCode::CornerTooClose, "probe node time must lie in (0.1 T, 0.9 T)");
  }
  const PotentialOptions opt = resolve(mesh, opts);
  JumpProbeReport r;
  r.kind = kind;
  r.node = node;
  const int levels = 9;
  const double h0 = 0.05 * mesh.section().diameter();
  for (int k = 0; k < levels; ++k) r.offsets.push_back(h0 * std::ldexp(1.0, -k));
  r.interior.assign(levels, 0.0);
  r.exterior.assign(levels, 0.0);
  auto eval = [&](double h) {
    const SpaceTimePoint p = offset_point(mesh, node, h);
    return kind == JumpKind::DoubleLayer ? double_layer(mesh, a, phi, p, opt)
                                         : conormal_derivative_single_layer(mesh, a, phi, p, ln.nu, opt);
  };
  parallel_for(2 * levels, [&](std::size_t i) {
    const int k = static_cast<int>(i / 2);
    if (i % 2 == 0) {
      r.interior[k] = eval(r.offsets[k]);
    } else {
      r.exterior[k] = eval(-r.offsets[k]);
    }
  });
  const std::vector<double> h(r.offsets.end() - 4, r.offsets.end());
  r.limit_interior = neville_at_zero(h, std::vector<double>(r.interior.end() - 4, r.interior.end()));
  r.limit_exterior = neville_at_zero(h, std::vector<double>(r.exterior.end() - 4, r.exterior.end()));
  r.jump = r.limit_interior - r.limit_exterior;
  const double value = phi.has_generator() ? phi.generator()(ln.y, ln.nu, ln.s) : phi.values()[node];
  r.predicted = kind == JumpKind::DoubleLayer ? value : -value;
  r.error = std::abs(r.jump - r.predicted);
  r.relative_error = r.predicted != 0.0 ? r.error / std::abs(r.predicted) : r.error;
  return r;
}

// ---------------------------------------------------------------- representation formula

StokesResult stokes_check(const CylinderMesh& mesh, const CoefficientMatrix& a, const CaloricFunction& u,
                          const SpaceTimePoint& target, Operator which, const std::optional<PotentialOptions>& opts) {
  const LocateResult loc = locate(mesh, target);
  if (loc.where == Location::Boundary) throw Error(ErrorCode::TargetOnBoundary, "target lies on the boundary");
  const PotentialOptions opt = resolve(mesh, opts);
  const double T = mesh.final_time();
  const auto trace = DensityField::from_function(
      mesh, Region::Lateral, [&](const Vec& y, const Vec&, double s) { return u.value({y, s}); });
  const auto flux = DensityField::from_function(mesh, Region::Lateral, [&](const Vec& y, const Vec& nu, double s) {
    return (a.entries() * nu).dot(u.gradient({y, s}));
  });
  const auto bottom =
      DensityField::from_function(mesh, Region::Bottom, [&](const Vec& y, const Vec&, double) { return u.value({y, 0.0}); });
  const auto top =
      DensityField::from_function(mesh, Region::Top, [&](const Vec& y, const Vec&, double) { return u.value({y, T}); });
  StokesResult r;
  r.where = loc.where;
  if (which == Operator::H) {
    r.reconstruction = double_layer(mesh, a, trace, target, opt) - single_layer(mesh, a, flux, target, opt) +
                       cap_potential(mesh, a, bottom, target, opt) - top_cap_potential(mesh, a, top, target, opt);
  } else {
    r.reconstruction = double_layer_star(mesh, a, trace, target, opt) -
                       single_layer_star(mesh, a, flux, target, opt) + cap_potential_star(mesh, a, top, target, opt) -
                       bottom_cap_potential_star(mesh, a, bottom, target, opt);
  }
  r.expected = loc.where == Location::Interior ? u.value(target) : 0.0;
  r.discrepancy = std::abs(r.reconstruction - r.expected);
  return r;
}

}  // namespace calorix
