#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "calorix/coefficient_matrix.hpp"
#include "calorix/linalg.hpp"

namespace calorix {

enum class SectionKind { Disk, Ellipse, Star, Ball, Ellipsoid };

std::string to_string(SectionKind k);

/// Star-shaped cross-section centred at the origin. Planar kinds are
/// parametrised counter-clockwise by theta in [0, 2 pi); the quadrics are the
/// image of the unit sphere under diag(a, b, c).
class CrossSection {
 public:
  static CrossSection disk(double r);
  static CrossSection ellipse(double a, double b);
  /// rho(theta) = r0 + sum_k cos_coeffs[k-1] cos(k theta) + sin_coeffs[k-1] sin(k theta)
  static CrossSection star(double r0, std::vector<double> cos_coeffs, std::vector<double> sin_coeffs);
  static CrossSection ball(double r);
  static CrossSection ellipsoid(double a, double b, double c);

  SectionKind kind() const { return kind_; }
  int dim() const { return kind_ == SectionKind::Ball || kind_ == SectionKind::Ellipsoid ? 3 : 2; }
  const std::vector<double>& parameters() const { return params_; }
  const std::vector<double>& cos_coeffs() const { return cos_; }
  const std::vector<double>& sin_coeffs() const { return sin_; }

  // planar boundary curve and its first two derivatives
  Vec curve(double theta) const;
  Vec curve_d1(double theta) const;
  Vec curve_d2(double theta) const;
  /// Inward unit normal at curve(theta).
  Vec inward_normal_2d(double theta) const;

  /// Semi-axes (a, b, c) of the quadric.
  Vec semi_axes() const;
  /// Surface point D u for a unit vector u.
  Vec surface_point(const Vec& u) const;
  /// Inward unit normal at D u.
  Vec inward_normal_3d(const Vec& u) const;
  /// |d(Du)/d theta x d(Du)/d phi| / sin(theta) for any orthonormal spherical chart through u.
  double area_factor(const Vec& u) const;

  /// Equals 1 on the boundary, < 1 inside, > 1 outside, scales linearly along rays from the origin.
  double radial_coordinate(const Vec& x) const;

  /// Nearest boundary point: `theta` is set for planar sections, `u` (with D u nearest) for quadrics.
  struct Nearest {
    double distance = 0.0;
    double theta = 0.0;
    Vec u;
    Vec point;
  };
  Nearest nearest(const Vec& x) const;

  /// |Omega| and the boundary measure (closed form where known, quadrature otherwise).
  double volume() const;
  double boundary_measure() const;
  double diameter() const;

 private:
  SectionKind kind_ = SectionKind::Disk;
  std::vector<double> params_;
  std::vector<double> cos_;
  std::vector<double> sin_;
  double diameter_ = 0.0;

  double rho(double theta, int derivative) const;
};

/// Orthonormal frame (e1, e2, pole) with pole = u; spherical coordinates
/// (theta, phi) about the pole map to sin(theta)(cos(phi) e1 + sin(phi) e2) + cos(theta) u.
struct PoleChart {
  Vec e1, e2, pole;
  static PoleChart at(const Vec& u);
  Vec direction(double theta, double phi) const;
};

/// Standard spherical angles (theta from +z, phi from +x) of a unit vector.
std::array<double, 2> spherical_angles(const Vec& u);

enum class Region { Top, Bottom, Lateral };

std::string to_string(Region r);

struct LateralNode {
  Vec y;
  double s = 0.0;
  Vec nu;    // inward unit normal
  Vec conu;  // A nu
  double w = 0.0;
};

struct CapNode {
  Vec y;
  double w = 0.0;
};

/// Quadrature on the parabolic boundary of Omega x (0, T).
///
/// Lateral nodes are stored time-major: index = i_time * spatial_count() + i_space.
/// Planar spatial nodes are the trapezoid angles; for quadrics they are
/// Gauss-Legendre polar angles (outer) times trapezoid azimuths (inner).
/// Cap nodes are Gauss-Legendre in the scaled radius r in (0, 1) times the
/// angular rule, index = i_radial * angular_count + i_angular.
class CylinderMesh {
 public:
  const CrossSection& section() const { return cs_; }
  const CoefficientMatrix& coefficients() const { return a_; }
  int dim() const { return cs_.dim(); }
  double final_time() const { return T_; }
  int m_angular() const { return m_angular_; }
  int m_time() const { return m_time_; }
  int m_radial() const { return m_radial_; }

  const std::vector<LateralNode>& lateral() const { return lateral_; }
  const std::vector<CapNode>& top() const { return top_; }
  const std::vector<CapNode>& bottom() const { return bottom_; }
  std::size_t region_size(Region r) const;

  // tensor factors
  const std::vector<double>& time_nodes() const { return time_nodes_; }
  /// Planar: trapezoid angles. Quadric: Gauss-Legendre polar angles on (0, pi).
  const std::vector<double>& angle_nodes() const { return angle_nodes_; }
  /// Quadric azimuths (trapezoid on [0, 2 pi)); empty for planar sections.
  const std::vector<double>& azimuth_nodes() const { return azimuth_nodes_; }
  const std::vector<double>& radial_nodes() const { return radial_nodes_; }
  std::size_t spatial_count() const { return lateral_.size() / time_nodes_.size(); }

  /// Short stable description of the discretisation, used to match data to meshes.
  std::string fingerprint() const;

  /// Writes region, coordinates, normal and weight per node.
  void write_csv(std::ostream& out) const;

 private:
  friend CylinderMesh build_mesh(const CrossSection&, const CoefficientMatrix&, double, int, int, int);

  CrossSection cs_;
  CoefficientMatrix a_;
  double T_ = 1.0;
  int m_angular_ = 0;
  int m_time_ = 0;
  int m_radial_ = 0;
  std::vector<double> time_nodes_;
  std::vector<double> angle_nodes_;
  std::vector<double> azimuth_nodes_;
  std::vector<double> radial_nodes_;
  std::vector<LateralNode> lateral_;
  std::vector<CapNode> top_;
  std::vector<CapNode> bottom_;
};

/// Builds the boundary rules. Throws DimensionMismatch when the section and
/// matrix dimensions differ, InvalidResolution for T <= 0 or any m < 2.
CylinderMesh build_mesh(const CrossSection& cs, const CoefficientMatrix& a, double T, int m_angular, int m_time,
                        int m_radial);

/// (y + h nu, s) for lateral node `index`; h > 0 lies inside. Throws
/// OffsetTooLarge when the point is not at distance |h| on the requested side.
SpaceTimePoint offset_point(const CylinderMesh& mesh, std::size_t index, double h);

enum class Location { Interior, Exterior, Boundary };

struct LocateResult {
  Location where = Location::Exterior;
  Region region = Region::Lateral;  // meaningful only on the boundary
};

/// Classifies a point against the closed cylinder, boundary tolerance 1e-12.
LocateResult locate(const CylinderMesh& mesh, const SpaceTimePoint& p);

}  // namespace calorix
