#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "calorix/caloric.hpp"
#include "calorix/geometry.hpp"

namespace calorix {

/// Where a data set came from; echoed in reports.
enum class DataSource { ClosedForm, PolynomialRestriction, File };
std::string to_string(DataSource s);

/// Cap region carrying the data: Bottom for v (H problem), Top for w (H* problem).
Region data_cap(Parity parity);

/// Dirichlet data on the parabolic boundary of one parity. Rows are the cap
/// nodes followed by the lateral nodes, both in mesh order.
struct BoundaryData {
  Parity parity = Parity::V;
  std::vector<Region> regions;
  std::vector<double> values;
  DataSource source = DataSource::ClosedForm;
  std::string mesh_fingerprint;

  static BoundaryData from_function(const CylinderMesh& mesh, Parity parity,
                                    const std::function<double(const SpaceTimePoint&)>& f,
                                    DataSource source = DataSource::ClosedForm);
  /// Throws DimensionMismatch on a wrong count, InvalidArgument on non-finite values.
  static BoundaryData sampled(const CylinderMesh& mesh, Parity parity, std::vector<double> values,
                              DataSource source = DataSource::File);
};

/// Node positions and weights of the data rows, in BoundaryData order.
struct BoundaryNodes {
  std::vector<SpaceTimePoint> points;
  std::vector<double> weights;
};
BoundaryNodes boundary_nodes(const CylinderMesh& mesh, Parity parity);

/// Double-precision evaluation of every basis polynomial |alpha| <= N at once,
/// from the exact coefficients converted term by term.
class BasisEvaluator {
 public:
  BasisEvaluator(const RationalMatrix& a, int max_degree, Parity parity);

  int dim() const { return n_; }
  int degree() const { return degree_; }
  const std::vector<MultiIndex>& basis() const { return basis_; }
  std::size_t size() const { return basis_.size(); }
  /// out[k] = v_{basis[k]}(p); out must hold size() entries.
  void evaluate(const SpaceTimePoint& p, double* out) const;
  std::vector<double> evaluate(const SpaceTimePoint& p) const;

 private:
  struct Term {
    double c;
    std::vector<int> beta;
    int m;
  };
  int n_;
  int degree_;
  std::vector<MultiIndex> basis_;
  std::vector<std::vector<Term>> terms_;
};

struct DesignSystem {
  Eigen::MatrixXd matrix;          // sqrt(w_i) v_alpha(node_i) / s_alpha
  Eigen::VectorXd sqrt_weights;
  std::vector<double> scales;      // s_alpha = max(1, column 2-norm)
  std::vector<MultiIndex> basis;
  std::vector<Region> regions;
};

DesignSystem assemble_system(const CylinderMesh& mesh, const CoefficientMatrix& a, Parity parity, int degree);

struct CaloricApproximant {
  Parity parity = Parity::V;
  int degree = 0;
  int dim = 0;
  std::vector<MultiIndex> basis;
  std::vector<double> coefficients;  // in the column-normalized basis
  std::vector<double> scales;
  double residual = 0.0;             // weighted relative L2 misfit on the data nodes
  int rank = 0;
  double condition = 0.0;            // sigma_max / sigma_min of the normalized design matrix
  std::string mesh_fingerprint;

  /// c_alpha / s_alpha, the coefficients of the unnormalized v_alpha.
  std::vector<double> physical_coefficients() const;
  nlohmann::json to_json() const;
};

/// SVD least squares with singular values below rcond * sigma_max dropped.
/// Throws RegionMismatch if the data has the wrong parity or mesh, DegenerateData
/// if every weight is zero, InvalidArgument unless 0 < rcond < 1.
CaloricApproximant solve_dirichlet(const CylinderMesh& mesh, const CoefficientMatrix& a, Parity parity, int degree,
                                   const BoundaryData& f, double rcond = 1e-12);

std::vector<double> evaluate_solution(const CaloricApproximant& approx, const CoefficientMatrix& a,
                                      const std::vector<SpaceTimePoint>& points);

/// Weighted relative L2 misfit of a fixed approximant against data on any mesh.
double boundary_residual(const CaloricApproximant& approx, const CoefficientMatrix& a, const CylinderMesh& mesh,
                         const BoundaryData& f);

/// 5 x 5 x 5 interior probes: radial fraction x direction x time, all strictly inside.
std::vector<SpaceTimePoint> interior_probe_grid(const CylinderMesh& mesh);

struct StudyReport {
  Parity parity = Parity::V;
  int dim = 0;
  bool exploratory = false;  // n = 2 runs
  std::vector<int> degrees;
  std::vector<double> residuals;
  std::vector<int> ranks;
  std::vector<double> conditions;
  std::vector<double> interior_max_errors;  // NaN when no exact solution is supplied
  std::vector<double> seconds;

  /// degree,residual,rank,cond,interior_max_err,seconds
  void write_csv(std::ostream& out) const;
  nlohmann::json to_json() const;
};

/// Runs solve_dirichlet for each degree on the same mesh. Throws InvalidArgument
/// unless degrees are strictly increasing and non-negative.
StudyReport completeness_study(const CylinderMesh& mesh, const CoefficientMatrix& a, Parity parity,
                               const BoundaryData& f, const std::vector<int>& degrees, double rcond = 1e-12,
                               const std::function<double(const SpaceTimePoint&)>& exact = {});

struct CrossValidation {
  double coarse_residual = 0.0;
  double fine_residual = 0.0;
  double ratio = 1.0;  // fine / coarse, 1 when both vanish
  bool flagged = false;  // fine > 2 coarse
};

/// Fits on `coarse`, re-measures the misfit of the same coefficients on `fine`.
CrossValidation cross_validate(const CylinderMesh& coarse, const CylinderMesh& fine, const CoefficientMatrix& a,
                               Parity parity, int degree, const std::function<double(const SpaceTimePoint&)>& f,
                               double rcond = 1e-12);

}  // namespace calorix
