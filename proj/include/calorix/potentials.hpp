#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "calorix/caloric.hpp"
#include "calorix/coefficient_matrix.hpp"
#include "calorix/geometry.hpp"

namespace calorix {

/// phi(y, nu, s); nu is the inward normal on the lateral surface and empty on caps.
using DensityGenerator = std::function<double(const Vec& y, const Vec& nu, double s)>;

/// Boundary density on one region of a mesh. Values are stored per node; when a
/// generator is attached the potentials sample it directly, otherwise they
/// interpolate the nodal values (trigonometric in angle, Lagrange elsewhere).
class DensityField {
 public:
  static DensityField sampled(const CylinderMesh& mesh, Region region, std::vector<double> values);
  static DensityField from_function(const CylinderMesh& mesh, Region region, DensityGenerator f);
  static DensityField constant(const CylinderMesh& mesh, Region region, double c);

  Region region() const { return region_; }
  const std::vector<double>& values() const { return values_; }
  bool has_generator() const { return static_cast<bool>(generator_); }
  const DensityGenerator& generator() const { return generator_; }
  /// Same nodal values, generator dropped.
  DensityField nodal() const;
  const std::string& mesh_fingerprint() const { return fingerprint_; }

 private:
  Region region_ = Region::Lateral;
  std::vector<double> values_;
  DensityGenerator generator_;
  std::string fingerprint_;
};

/// Density for the time-reflected problem, t -> T - t. Caps swap roles.
DensityField reflect_time(const CylinderMesh& mesh, const DensityField& phi);

/// Quadrature controls. Defaults grow with the mesh so refinement tightens the result.
struct PotentialOptions {
  int space_order = 16;          // Gauss-Legendre points per spatial panel
  int time_order = 16;           // Gauss-Legendre points per log-time panel
  int min_space_panels = 8;      // panels on the far part of the boundary
  int azimuth_count = 48;        // trapezoid points around the pole (n = 3)
  double time_panel_width = 1.0; // panel width in log(tau)
  double cap_tol = 1e-11;        // adaptive cap cubature, absolute
  int cap_order = 6;

  static PotentialOptions for_mesh(const CylinderMesh& mesh);
};

// Lateral potentials of H. Target (x, t); the boundary variable is (y, s), tau = t - s.
// All throw TargetOnBoundary when x lies within 1e-10 of the boundary while 0 < t <= T.

/// int_{Sigma3} phi(y,s) dG(x-y, t-s)/d nu_bar_y
double double_layer(const CylinderMesh& mesh, const CoefficientMatrix& a, const DensityField& phi,
                    const SpaceTimePoint& target, const std::optional<PotentialOptions>& opts = std::nullopt);
/// int_{Sigma3} phi(y,s) G(x-y, t-s)
double single_layer(const CylinderMesh& mesh, const CoefficientMatrix& a, const DensityField& phi,
                    const SpaceTimePoint& target, const std::optional<PotentialOptions>& opts = std::nullopt);
/// int_{Sigma3} phi(y,s) dG(x-y, t-s)/d nu_bar_x with the fixed direction nu0 at x.
double conormal_derivative_single_layer(const CylinderMesh& mesh, const CoefficientMatrix& a,
                                        const DensityField& phi, const SpaceTimePoint& target, const Vec& nu0,
                                        const std::optional<PotentialOptions>& opts = std::nullopt);
/// Same, at offset_point(mesh, node, h) with the node's normal.
double conormal_derivative_single_layer(const CylinderMesh& mesh, const CoefficientMatrix& a,
                                        const DensityField& phi, std::size_t node, double h,
                                        const std::optional<PotentialOptions>& opts = std::nullopt);

/// int_{Sigma2} phi(y) G(x-y, t)
double cap_potential(const CylinderMesh& mesh, const CoefficientMatrix& a, const DensityField& phi,
                     const SpaceTimePoint& target, const std::optional<PotentialOptions>& opts = std::nullopt);
/// int_{Sigma1} phi(y) G(x-y, t-T); nonzero only above the top cap.
double top_cap_potential(const CylinderMesh& mesh, const CoefficientMatrix& a, const DensityField& phi,
                         const SpaceTimePoint& target, const std::optional<PotentialOptions>& opts = std::nullopt);

// Adjoint potentials of H*. Target (y, s); the boundary variable is (x, t), tau = t - s.

/// int_{Sigma3} phi(x,t) dG(x-y, t-s)/d nu_bar_x
double double_layer_star(const CylinderMesh& mesh, const CoefficientMatrix& a, const DensityField& phi,
                         const SpaceTimePoint& target, const std::optional<PotentialOptions>& opts = std::nullopt);
/// int_{Sigma3} phi(x,t) G(x-y, t-s)
double single_layer_star(const CylinderMesh& mesh, const CoefficientMatrix& a, const DensityField& phi,
                         const SpaceTimePoint& target, const std::optional<PotentialOptions>& opts = std::nullopt);
/// int_{Sigma1} phi(x) G(x-y, T-s)
double cap_potential_star(const CylinderMesh& mesh, const CoefficientMatrix& a, const DensityField& phi,
                          const SpaceTimePoint& target, const std::optional<PotentialOptions>& opts = std::nullopt);
/// int_{Sigma2} phi(x) G(x-y, -s); nonzero only below the bottom cap.
double bottom_cap_potential_star(const CylinderMesh& mesh, const CoefficientMatrix& a, const DensityField& phi,
                                 const SpaceTimePoint& target,
                                 const std::optional<PotentialOptions>& opts = std::nullopt);

/// Double layer of 1 plus the bottom cap of 1 minus the top cap of 1:
/// 1 inside the cylinder, 0 outside.
double partition_identity(const CylinderMesh& mesh, const CoefficientMatrix& a, const SpaceTimePoint& target,
                          const std::optional<PotentialOptions>& opts = std::nullopt);
/// Adjoint counterpart with the caps exchanged.
double partition_identity_star(const CylinderMesh& mesh, const CoefficientMatrix& a, const SpaceTimePoint& target,
                               const std::optional<PotentialOptions>& opts = std::nullopt);

/// -int_{dOmega} ds(x,y)/d nu_bar_y d sigma_y for a quadric section (n = 3):
/// 1 inside, 1/2 on the surface, 0 outside. Throws DimensionTooSmall for n < 3.
double elliptic_gauss_identity(const CrossSection& cs, const CoefficientMatrix& a, const Vec& x,
                               int resolution = 32);

enum class JumpKind { DoubleLayer, ConormalSingleLayer };

struct JumpProbeReport {
  JumpKind kind = JumpKind::DoubleLayer;
  std::size_t node = 0;
  std::vector<double> offsets;   // h_k, strictly decreasing
  std::vector<double> interior;  // u(x0 + h_k nu, t)
  std::vector<double> exterior;  // u(x0 - h_k nu, t)
  double limit_interior = 0.0;
  double limit_exterior = 0.0;
  double jump = 0.0;             // limit_interior - limit_exterior
  double predicted = 0.0;        // +phi for the double layer, -phi for the conormal derivative
  double error = 0.0;            // |jump - predicted|
  double relative_error = 0.0;   // error / |predicted|, or error when predicted = 0

  /// Columns node,h,interior,exterior,extrapolated,predicted,error; the last
  /// row (h = 0) carries the extrapolated one-sided limits.
  void write_csv(std::ostream& out, bool header = true) const;
};

/// Two-sided normal probe at lateral node `node`: offsets h_k = 0.05 diam 2^-k,
/// k = 0..8, one-sided limits by polynomial extrapolation through the last four
/// levels. Throws CornerTooClose unless the node time lies in (0.1 T, 0.9 T).
JumpProbeReport jump_probe(const CylinderMesh& mesh, const CoefficientMatrix& a, const DensityField& phi,
                           std::size_t node, JumpKind kind, const std::optional<PotentialOptions>& opts = std::nullopt);

/// A solution of H u = 0 (or H* u = 0) known in closed form near the closed cylinder.
struct CaloricFunction {
  std::function<double(const SpaceTimePoint&)> value;
  std::function<Vec(const SpaceTimePoint&)> gradient;
};

struct StokesResult {
  Location where = Location::Interior;
  double reconstruction = 0.0;
  double expected = 0.0;  // u(target) inside, 0 outside
  double discrepancy = 0.0;
};

/// Rebuilds u at `target` from its boundary traces through the representation
/// formula of H (or of H* for Operator::HStar):
///   H : u = D[u] - S[du/dnu_bar] + C_bottom[u(.,0)] - C_top[u(.,T)]
///   H*: u = D*[u] - S*[du/dnu_bar] + C*_top[u(.,T)] - C*_bottom[u(.,0)]
StokesResult stokes_check(const CylinderMesh& mesh, const CoefficientMatrix& a, const CaloricFunction& u,
                          const SpaceTimePoint& target, Operator which,
                          const std::optional<PotentialOptions>& opts = std::nullopt);

}  // namespace calorix
