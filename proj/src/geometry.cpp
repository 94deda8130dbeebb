#include "calorix/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>

#include "calorix/error.hpp"
#include "calorix/quadrature.hpp"

namespace calorix {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Vec vec3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

Vec unit_from_angles(double theta, double phi) {
  return vec3(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta));
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be positive");
}

}  // namespace

std::string to_string(SectionKind k) {
  switch (k) {
    case SectionKind::Disk: return "disk";
    case SectionKind::Ellipse: return "ellipse";
    case SectionKind::Star: return "star";
    case SectionKind::Ball: return "ball3d";
    case SectionKind::Ellipsoid: return "ellipsoid3d";
  }
  return "?";
}

std::string to_string(Region r) {
  switch (r) {
    case Region::Top: return "top";
    case Region::Bottom: return "bottom";
    case Region::Lateral: return "lateral";
  }
  return "?";
}

CrossSection CrossSection::disk(double r) {
  require_positive(r, "disk radius");
  CrossSection cs;
  cs.kind_ = SectionKind::Disk;
  cs.params_ = {r};
  cs.diameter_ = 2.0 * r;
  return cs;
}

CrossSection CrossSection::ellipse(double a, double b) {
  require_positive(a, "ellipse semi-axis");
  require_positive(b, "ellipse semi-axis");
  CrossSection cs;
  cs.kind_ = SectionKind::Ellipse;
  cs.params_ = {a, b};
  cs.diameter_ = 2.0 * std::max(a, b);
  return cs;
}

CrossSection CrossSection::star(double r0, std::vector<double> cos_coeffs, std::vector<double> sin_coeffs) {
  double bound = 0.0;
  for (double c : cos_coeffs) bound += std::abs(c);
  for (double c : sin_coeffs) bound += std::abs(c);
  if (!(r0 - bound > 0.0)) throw Error(ErrorCode::InvalidArgument, "star radius must stay positive: r0 - sum|c| <= 0");
  CrossSection cs;
  cs.kind_ = SectionKind::Star;
  cs.params_ = {r0};
  cs.cos_ = std::move(cos_coeffs);
  cs.sin_ = std::move(sin_coeffs);
  const int m = 512;
  std::vector<Vec> pts;
  for (int i = 0; i < m; ++i) pts.push_back(cs.curve(kTwoPi * i / m));
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) cs.diameter_ = std::max(cs.diameter_, (pts[i] - pts[j]).norm());
  }
  return cs;
}

CrossSection CrossSection::ball(double r) {
  require_positive(r, "ball radius");
  CrossSection cs;
  cs.kind_ = SectionKind::Ball;
  cs.params_ = {r};
  cs.diameter_ = 2.0 * r;
  return cs;
}

CrossSection CrossSection::ellipsoid(double a, double b, double c) {
  require_positive(a, "ellipsoid semi-axis");
  require_positive(b, "ellipsoid semi-axis");
  require_positive(c, "ellipsoid semi-axis");
  CrossSection cs;
  cs.kind_ = SectionKind::Ellipsoid;
  cs.params_ = {a, b, c};
  cs.diameter_ = 2.0 * std::max({a, b, c});
  return cs;
}

double CrossSection::rho(double theta, int derivative) const {
  double r = derivative == 0 ? params_[0] : 0.0;
  const std::size_t kmax = std::max(cos_.size(), sin_.size());
  for (std::size_t i = 0; i < kmax; ++i) {
    const double k = static_cast<double>(i + 1);
    const double c = i < cos_.size() ? cos_[i] : 0.0;
    const double s = i < sin_.size() ? sin_[i] : 0.0;
    const double ck = std::cos(k * theta);
    const double sk = std::sin(k * theta);
    switch (derivative) {
      case 0: r += c * ck + s * sk; break;
      case 1: r += k * (-c * sk + s * ck); break;
      default: r += -k * k * (c * ck + s * sk); break;
    }
  }
  return r;
}

Vec CrossSection::curve(double theta) const {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  if (kind_ == SectionKind::Ellipse) return vec2(params_[0] * c, params_[1] * s);
  const double r = rho(theta, 0);
  return vec2(r * c, r * s);
}

Vec CrossSection::curve_d1(double theta) const {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  if (kind_ == SectionKind::Ellipse) return vec2(-params_[0] * s, params_[1] * c);
  const double r = rho(theta, 0);
  const double r1 = rho(theta, 1);
  return vec2(r1 * c - r * s, r1 * s + r * c);
}

Vec CrossSection::curve_d2(double theta) const {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  if (kind_ == SectionKind::Ellipse) return vec2(-params_[0] * c, -params_[1] * s);
  const double r = rho(theta, 0);
  const double r1 = rho(theta, 1);
  const double r2 = rho(theta, 2);
  return vec2(r2 * c - 2.0 * r1 * s - r * c, r2 * s + 2.0 * r1 * c - r * s);
}

Vec CrossSection::inward_normal_2d(double theta) const {
  const Vec d = curve_d1(theta);
  return vec2(-d[1], d[0]) / d.norm();
}

Vec CrossSection::semi_axes() const {
  if (kind_ == SectionKind::Ball) return vec3(params_[0], params_[0], params_[0]);
  if (kind_ == SectionKind::Ellipsoid) return vec3(params_[0], params_[1], params_[2]);
  throw Error(ErrorCode::DimensionMismatch, "semi-axes exist only for three-dimensional sections");
}

Vec CrossSection::surface_point(const Vec& u) const { return semi_axes().cwiseProduct(u); }

Vec CrossSection::inward_normal_3d(const Vec& u) const {
  const Vec g = u.cwiseQuotient(semi_axes());
  return -g / g.norm();
}

double CrossSection::area_factor(const Vec& u) const {
  const Vec d = semi_axes();
  return d[0] * d[1] * d[2] * u.cwiseQuotient(d).norm();
}

double CrossSection::radial_coordinate(const Vec& x) const {
  switch (kind_) {
    case SectionKind::Disk: return x.norm() / params_[0];
    case SectionKind::Ellipse: return std::hypot(x[0] / params_[0], x[1] / params_[1]);
    case SectionKind::Star: {
      const double r = x.norm();
      if (r == 0.0) return 0.0;
      return r / rho(std::atan2(x[1], x[0]), 0);
    }
    case SectionKind::Ball:
    case SectionKind::Ellipsoid: return x.cwiseQuotient(semi_axes()).norm();
  }
  return 0.0;
}

CrossSection::Nearest CrossSection::nearest(const Vec& x) const {
  Nearest out;
  if (dim() == 2) {
    const int m = 512;
    double best = std::numeric_limits<double>::infinity();
    double theta = 0.0;
    for (int i = 0; i < m; ++i) {
      const double th = kTwoPi * i / m;
      const double d = (curve(th) - x).squaredNorm();
      if (d < best) {
        best = d;
        theta = th;
      }
    }
    const double cap = kTwoPi / m;
    for (int it = 0; it < 60; ++it) {
      const Vec g = curve(theta) - x;
      const Vec g1 = curve_d1(theta);
      const double f = g.dot(g1);
      const double fp = g1.squaredNorm() + g.dot(curve_d2(theta));
      if (!(fp > 0.0)) break;
      const double step = std::clamp(f / fp, -cap, cap);
      theta -= step;
      if (std::abs(step) < 1e-15) break;
    }
    theta = std::fmod(theta, kTwoPi);
    if (theta < 0.0) theta += kTwoPi;
    out.theta = theta;
    out.point = curve(theta);
    out.distance = (out.point - x).norm();
    return out;
  }
  // stationary points satisfy y_i = x_i a_i^2 / (a_i^2 + lambda); the nearest one
  // has the largest admissible lambda, the root of g below
  const Vec d = semi_axes();
  const Vec d2 = d.cwiseProduct(d);
  const double floor = d2.minCoeff();
  auto g = [&](double lambda, bool skip_min) {
    double sum = -1.0;
    for (int i = 0; i < 3; ++i) {
      if (skip_min && d2[i] == floor) continue;
      const double q = x[i] * d[i] / (d2[i] + lambda);
      sum += q * q;
    }
    return sum;
  };
  bool degenerate = true;
  for (int i = 0; i < 3; ++i) {
    if (d2[i] == floor && x[i] != 0.0) degenerate = false;
  }
  Vec y(3);
  if (degenerate && g(-floor, true) < 0.0) {
    double rest = 1.0;
    for (int i = 0; i < 3; ++i) {
      y[i] = d2[i] == floor ? 0.0 : x[i] * d2[i] / (d2[i] - floor);
      rest -= (y[i] / d[i]) * (y[i] / d[i]);
    }
    for (int i = 0; i < 3; ++i) {
      if (d2[i] == floor) {
        y[i] = d[i] * std::sqrt(std::max(0.0, rest));
        break;
      }
    }
  } else {
    double lo = -floor;
    double hi = d.maxCoeff() * x.norm() + 1.0;
    for (int it = 0; it < 400 && hi - lo > 0.0; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      (g(mid, false) > 0.0 ? lo : hi) = mid;
    }
    const double lambda = 0.5 * (lo + hi);
    for (int i = 0; i < 3; ++i) y[i] = x[i] * d2[i] / (d2[i] + lambda);
  }
  Vec u = y.cwiseQuotient(d);
  u /= u.norm();
  out.u = u;
  out.point = d.cwiseProduct(u);
  out.distance = (out.point - x).norm();
  return out;
}

double CrossSection::volume() const {
  const double pi = std::numbers::pi;
  switch (kind_) {
    case SectionKind::Disk: return pi * params_[0] * params_[0];
    case SectionKind::Ellipse: return pi * params_[0] * params_[1];
    case SectionKind::Star: {
      double v = pi * params_[0] * params_[0];
      for (double c : cos_) v += 0.5 * pi * c * c;
      for (double c : sin_) v += 0.5 * pi * c * c;
      return v;
    }
    case SectionKind::Ball: return 4.0 / 3.0 * pi * std::pow(params_[0], 3);
    case SectionKind::Ellipsoid: return 4.0 / 3.0 * pi * params_[0] * params_[1] * params_[2];
  }
  return 0.0;
}

double CrossSection::boundary_measure() const {
  switch (kind_) {
    case SectionKind::Disk: return kTwoPi * params_[0];
    case SectionKind::Ball: return 4.0 * std::numbers::pi * params_[0] * params_[0];
    case SectionKind::Ellipse:
    case SectionKind::Star: {
      const int m = 4096;
      double sum = 0.0;
      for (int i = 0; i < m; ++i) sum += curve_d1(kTwoPi * i / m).norm();
      return sum * kTwoPi / m;
    }
    case SectionKind::Ellipsoid: {
      const Rule1d th = gauss_legendre(256, 0.0, std::numbers::pi);
      const int mp = 512;
      double sum = 0.0;
      for (std::size_t i = 0; i < th.nodes.size(); ++i) {
        for (int j = 0; j < mp; ++j) {
          const Vec u = unit_from_angles(th.nodes[i], kTwoPi * j / mp);
          sum += th.weights[i] * std::sin(th.nodes[i]) * area_factor(u);
        }
      }
      return sum * kTwoPi / mp;
    }
  }
  return 0.0;
}

double CrossSection::diameter() const { return diameter_; }

PoleChart PoleChart::at(const Vec& u) {
  PoleChart c;
  c.pole = u / u.norm();
  Vec helper = vec3(1, 0, 0);
  if (std::abs(c.pole[0]) > 0.6) helper = vec3(0, 1, 0);
  Vec e1 = helper - helper.dot(c.pole) * c.pole;
  c.e1 = e1 / e1.norm();
  const Eigen::Vector3d p(c.pole[0], c.pole[1], c.pole[2]);
  const Eigen::Vector3d q(c.e1[0], c.e1[1], c.e1[2]);
  const Eigen::Vector3d r = p.cross(q);
  c.e2 = vec3(r[0], r[1], r[2]);
  return c;
}

Vec PoleChart::direction(double theta, double phi) const {
  return std::sin(theta) * (std::cos(phi) * e1 + std::sin(phi) * e2) + std::cos(theta) * pole;
}

std::array<double, 2> spherical_angles(const Vec& u) {
  const double theta = std::acos(std::clamp(u[2], -1.0, 1.0));
  double phi = std::atan2(u[1], u[0]);
  if (phi < 0.0) phi += kTwoPi;
  return {theta, phi};
}

std::size_t CylinderMesh::region_size(Region r) const {
  switch (r) {
    case Region::Top: return top_.size();
    case Region::Bottom: return bottom_.size();
    case Region::Lateral: return lateral_.size();
  }
  return 0;
}

std::string CylinderMesh::fingerprint() const {
  std::string s = to_string(cs_.kind());
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, ":%.17g", v);
    s += buf;
  };
  for (double p : cs_.parameters()) put(p);
  for (double p : cs_.cos_coeffs()) put(p);
  s += "|";
  for (double p : cs_.sin_coeffs()) put(p);
  s += "|A";
  for (int i = 0; i < a_.dim(); ++i) {
    for (int j = 0; j < a_.dim(); ++j) put(a_(i, j));
  }
  s += "|T";
  put(T_);
  std::snprintf(buf, sizeof buf, "|m%d,%d,%d", m_angular_, m_time_, m_radial_);
  s += buf;
  return s;
}

void CylinderMesh::write_csv(std::ostream& out) const {
  const int n = dim();
  out << "region,index,t";
  for (int j = 0; j < n; ++j) out << ",x" << j + 1;
  for (int j = 0; j < n; ++j) out << ",nu" << j + 1;
  out << ",w\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, ",%.17g", v);
    out << buf;
  };
  for (std::size_t i = 0; i < lateral_.size(); ++i) {
    out << "lateral," << i;
    num(lateral_[i].s);
    for (int j = 0; j < n; ++j) num(lateral_[i].y[j]);
    for (int j = 0; j < n; ++j) num(lateral_[i].nu[j]);
    num(lateral_[i].w);
    out << '\n';
  }
  for (auto [name, nodes, t] : {std::tuple{"bottom", &bottom_, 0.0}, std::tuple{"top", &top_, T_}}) {
    for (std::size_t i = 0; i < nodes->size(); ++i) {
      out << name << ',' << i;
      num(t);
      for (int j = 0; j < n; ++j) num((*nodes)[i].y[j]);
      for (int j = 0; j < n; ++j) num(0.0);
      num((*nodes)[i].w);
      out << '\n';
    }
  }
}

CylinderMesh build_mesh(const CrossSection& cs, const CoefficientMatrix& a, double T, int m_angular, int m_time,
                        int m_radial) {
  if (cs.dim() != a.dim()) throw Error(ErrorCode::DimensionMismatch, "cross-section and matrix dimensions differ");
  if (!(T > 0.0) || !std::isfinite(T)) throw Error(ErrorCode::InvalidResolution, "final time must be positive");
  if (m_angular < 2 || m_time < 2 || m_radial < 2) {
    throw Error(ErrorCode::InvalidResolution, "mesh resolutions must be >= 2");
  }
  CylinderMesh mesh;
  mesh.cs_ = cs;
  mesh.a_ = a;
  mesh.T_ = T;
  mesh.m_angular_ = m_angular;
  mesh.m_time_ = m_time;
  mesh.m_radial_ = m_radial;

  const Rule1d time = gauss_legendre(m_time, 0.0, T);
  const Rule1d radial = gauss_legendre(m_radial, 0.0, 1.0);
  const Rule1d azimuth = periodic_trapezoid(m_angular, kTwoPi);
  mesh.time_nodes_ = time.nodes;
  mesh.radial_nodes_ = radial.nodes;

  struct Spatial {
    Vec y, nu;
    double w;
  };
  std::vector<Spatial> spatial;
  // unit-radius cap cell: point, area weight per unit radial weight (without the radial factor)
  struct CapCell {
    Vec edge;
    double w;
  };
  std::vector<CapCell> cells;
  if (cs.dim() == 2) {
    mesh.angle_nodes_ = azimuth.nodes;
    for (int i = 0; i < m_angular; ++i) {
      const double th = azimuth.nodes[i];
      const Vec g = cs.curve(th);
      const Vec g1 = cs.curve_d1(th);
      spatial.push_back({g, cs.inward_normal_2d(th), azimuth.weights[i] * g1.norm()});
      cells.push_back({g, azimuth.weights[i] * (g[0] * g1[1] - g[1] * g1[0])});
    }
  } else {
    const Rule1d polar = gauss_legendre(std::max(2, m_angular / 2), 0.0, std::numbers::pi);
    mesh.angle_nodes_ = polar.nodes;
    mesh.azimuth_nodes_ = azimuth.nodes;
    const Vec d = cs.semi_axes();
    const double abc = d[0] * d[1] * d[2];
    for (std::size_t i = 0; i < polar.nodes.size(); ++i) {
      for (int j = 0; j < m_angular; ++j) {
        const Vec u = unit_from_angles(polar.nodes[i], azimuth.nodes[j]);
        const double ws = polar.weights[i] * azimuth.weights[j] * std::sin(polar.nodes[i]);
        spatial.push_back({cs.surface_point(u), cs.inward_normal_3d(u), ws * cs.area_factor(u)});
        cells.push_back({cs.surface_point(u), ws * abc});
      }
    }
  }

  const Mat& am = a.entries();
  for (int k = 0; k < m_time; ++k) {
    for (const auto& sp : spatial) {
      LateralNode node;
      node.y = sp.y;
      node.s = time.nodes[k];
      node.nu = sp.nu;
      node.conu = am * sp.nu;
      node.w = sp.w * time.weights[k];
      mesh.lateral_.push_back(node);
    }
  }
  const int power = cs.dim() - 1;
  for (int r = 0; r < m_radial; ++r) {
    const double rr = radial.nodes[r];
    for (const auto& c : cells) {
      CapNode node{rr * c.edge, radial.weights[r] * std::pow(rr, power) * c.w};
      mesh.bottom_.push_back(node);
      mesh.top_.push_back(node);
    }
  }
  return mesh;
}

SpaceTimePoint offset_point(const CylinderMesh& mesh, std::size_t index, double h) {
  if (index >= mesh.lateral().size()) throw Error(ErrorCode::InvalidArgument, "lateral node index out of range");
  const LateralNode& node = mesh.lateral()[index];
  SpaceTimePoint p{node.y + h * node.nu, node.s};
  if (h == 0.0) return p;
  const double radial = mesh.section().radial_coordinate(p.x);
  const bool right_side = h > 0.0 ? radial < 1.0 : radial > 1.0;
  const double dist = mesh.section().nearest(p.x).distance;
  if (!right_side || dist < (1.0 - 1e-9) * std::abs(h)) {
    throw Error(ErrorCode::OffsetTooLarge, "offset leaves the normal segment that stays nearest to its node");
  }
  return p;
}

LocateResult locate(const CylinderMesh& mesh, const SpaceTimePoint& p) {
  constexpr double tol = 1e-12;
  const double T = mesh.final_time();
  const double radial = mesh.section().radial_coordinate(p.x);
  if (radial > 1.0 + tol || p.t < -tol || p.t > T + tol) return {Location::Exterior, Region::Lateral};
  if (std::abs(radial - 1.0) <= tol) return {Location::Boundary, Region::Lateral};
  if (std::abs(p.t) <= tol) return {Location::Boundary, Region::Bottom};
  if (std::abs(p.t - T) <= tol) return {Location::Boundary, Region::Top};
  return {Location::Interior, Region::Lateral};
}

}  // namespace calorix
