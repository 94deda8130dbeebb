#include "calorix/trefftz.hpp"

#include <chrono>
#include <cstdio>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "calorix/error.hpp"
#include "calorix/parallel.hpp"

namespace calorix {

std::string to_string(DataSource s) {
  switch (s) {
    case DataSource::ClosedForm:
      return "closed-form";
    case DataSource::PolynomialRestriction:
      return "polynomial";
    case DataSource::File:
      return "file";
  }
  return "unknown";
}

Region data_cap(Parity parity) { return parity == Parity::V ? Region::Bottom : Region::Top; }

BoundaryNodes boundary_nodes(const CylinderMesh& mesh, Parity parity) {
  BoundaryNodes out;
  const Region cap = data_cap(parity);
  const double t_cap = cap == Region::Bottom ? 0.0 : mesh.final_time();
  for (const CapNode& c : cap == Region::Bottom ? mesh.bottom() : mesh.top()) {
    out.points.push_back({c.y, t_cap});
    out.weights.push_back(c.w);
  }
  for (const LateralNode& l : mesh.lateral()) {
    out.points.push_back({l.y, l.s});
    out.weights.push_back(l.w);
  }
  return out;
}

BoundaryData BoundaryData::from_function(const CylinderMesh& mesh, Parity parity,
                                         const std::function<double(const SpaceTimePoint&)>& f, DataSource source) {
  const BoundaryNodes nodes = boundary_nodes(mesh, parity);
  std::vector<double> values(nodes.points.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = f(nodes.points[i]);
  return sampled(mesh, parity, std::move(values), source);
}

BoundaryData BoundaryData::sampled(const CylinderMesh& mesh, Parity parity, std::vector<double> values,
                                   DataSource source) {
  const std::size_t expected = mesh.region_size(data_cap(parity)) + mesh.lateral().size();
  if (values.size() != expected) {
    throw Error(ErrorCode::DimensionMismatch, "boundary data has " + std::to_string(values.size()) +
                                                  " values, the mesh has " + std::to_string(expected) + " data nodes");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) throw Error(ErrorCode::InvalidArgument, "data value " + std::to_string(i) + " is not finite");
  }
  BoundaryData d;
  d.parity = parity;
  d.regions = {data_cap(parity), Region::Lateral};
  d.values = std::move(values);
  d.source = source;
  d.mesh_fingerprint = mesh.fingerprint();
  return d;
}

BasisEvaluator::BasisEvaluator(const RationalMatrix& a, int max_degree, Parity parity) : n_(a.n), degree_(max_degree) {
  if (max_degree < 0) throw Error(ErrorCode::InvalidArgument, "basis degree must be non-negative");
  for (const CaloricPolynomial& p : caloric_basis(a, max_degree, parity)) {
    basis_.push_back(p.alpha);
    std::vector<Term> terms;
    for (const auto& [mono, c] : p.poly.terms()) terms.push_back({c.get_d(), mono.beta, mono.m});
    terms_.push_back(std::move(terms));
  }
}

void BasisEvaluator::evaluate(const SpaceTimePoint& p, double* out) const {
  const int stride = degree_ + 1;
  std::vector<double> xp(static_cast<std::size_t>(n_ * stride));
  std::vector<double> tp(static_cast<std::size_t>(degree_ / 2 + 1));
  for (int j = 0; j < n_; ++j) {
    xp[j * stride] = 1.0;
    for (int k = 1; k <= degree_; ++k) xp[j * stride + k] = xp[j * stride + k - 1] * p.x[j];
  }
  tp[0] = 1.0;
  for (std::size_t k = 1; k < tp.size(); ++k) tp[k] = tp[k - 1] * p.t;
  for (std::size_t b = 0; b < terms_.size(); ++b) {
    double sum = 0.0;
    for (const Term& term : terms_[b]) {
      double v = term.c * tp[term.m];
      for (int j = 0; j < n_; ++j) v *= xp[j * stride + term.beta[j]];
      sum += v;
    }
    out[b] = sum;
  }
}

std::vector<double> BasisEvaluator::evaluate(const SpaceTimePoint& p) const {
  std::vector<double> out(size());
  evaluate(p, out.data());
  return out;
}

DesignSystem assemble_system(const CylinderMesh& mesh, const CoefficientMatrix& a, Parity parity, int degree) {
  if (a.dim() != mesh.dim()) throw Error(ErrorCode::DimensionMismatch, "coefficient matrix and mesh dimensions differ");
  const BasisEvaluator basis(RationalMatrix::from(a), degree, parity);
  const BoundaryNodes nodes = boundary_nodes(mesh, parity);
  const auto rows = static_cast<Eigen::Index>(nodes.points.size());
  const auto cols = static_cast<Eigen::Index>(basis.size());

  DesignSystem sys;
  sys.basis = basis.basis();
  sys.regions = {data_cap(parity), Region::Lateral};
  sys.sqrt_weights.resize(rows);
  // row-major staging so each worker writes one contiguous row
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> staged(rows, cols);
  parallel_for(nodes.points.size(), [&](std::size_t i) {
    const double sw = std::sqrt(nodes.weights[i]);
    sys.sqrt_weights[static_cast<Eigen::Index>(i)] = sw;
    double* row = staged.row(static_cast<Eigen::Index>(i)).data();
    basis.evaluate(nodes.points[i], row);
    for (Eigen::Index k = 0; k < cols; ++k) row[k] *= sw;
  });
  sys.matrix = staged;
  sys.scales.resize(basis.size());
  for (Eigen::Index k = 0; k < cols; ++k) {
    const double s = std::max(1.0, sys.matrix.col(k).norm());
    sys.scales[static_cast<std::size_t>(k)] = s;
    sys.matrix.col(k) /= s;
  }
  return sys;
}

std::vector<double> CaloricApproximant::physical_coefficients() const {
  std::vector<double> out(coefficients.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = coefficients[k] / scales[k];
  return out;
}

nlohmann::json CaloricApproximant::to_json() const {
  nlohmann::json basis_json = nlohmann::json::array();
  const std::vector<double> phys = physical_coefficients();
  for (std::size_t k = 0; k < basis.size(); ++k) {
    basis_json.push_back({{"alpha", basis[k].alpha}, {"coefficient", phys[k]}, {"scale", scales[k]}});
  }
  return {{"parity", to_string(parity)},
          {"degree", degree},
          {"dim", dim},
          {"residual", residual},
          {"rank", rank},
          {"condition", condition},
          {"mesh", mesh_fingerprint},
          {"basis", basis_json}};
}

namespace {

void check_data(const CylinderMesh& mesh, Parity parity, const BoundaryData& f) {
  if (f.parity != parity) {
    throw Error(ErrorCode::RegionMismatch, to_string(parity) + " problem needs data on the " +
                                               to_string(data_cap(parity)) + " cap and the lateral surface");
  }
  if (f.mesh_fingerprint != mesh.fingerprint()) {
    throw Error(ErrorCode::RegionMismatch, "boundary data was sampled on a different mesh");
  }
}

double relative_misfit(const Eigen::VectorXd& residual, const Eigen::VectorXd& b) {
  const double nb = b.norm();
  return nb > 0.0 ? residual.norm() / nb : residual.norm();
}

}  // namespace

CaloricApproximant solve_dirichlet(const CylinderMesh& mesh, const CoefficientMatrix& a, Parity parity, int degree,
                                   const BoundaryData& f, double rcond) {
  if (!(rcond > 0.0 && rcond < 1.0)) throw Error(ErrorCode::InvalidArgument, "rcond must lie in (0, 1)");
  check_data(mesh, parity, f);
  const DesignSystem sys = assemble_system(mesh, a, parity, degree);
  if (sys.sqrt_weights.squaredNorm() == 0.0) throw Error(ErrorCode::DegenerateData, "all quadrature weights are zero");

  const Eigen::VectorXd b =
      sys.sqrt_weights.cwiseProduct(Eigen::Map<const Eigen::VectorXd>(f.values.data(), static_cast<Eigen::Index>(f.values.size())));
  const Eigen::BDCSVD<Eigen::MatrixXd> svd(sys.matrix, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sigma = svd.singularValues();
  const double smax = sigma.size() > 0 ? sigma[0] : 0.0;
  Eigen::Index rank = 0;
  while (rank < sigma.size() && sigma[rank] > rcond * smax) ++rank;

  Eigen::VectorXd c = Eigen::VectorXd::Zero(sys.matrix.cols());
  if (rank > 0) {
    const Eigen::VectorXd ub = svd.matrixU().leftCols(rank).transpose() * b;
    c = svd.matrixV().leftCols(rank) * ub.cwiseQuotient(sigma.head(rank));
  }

  CaloricApproximant out;
  out.parity = parity;
  out.degree = degree;
  out.dim = mesh.dim();
  out.basis = sys.basis;
  out.coefficients.assign(c.data(), c.data() + c.size());
  out.scales = sys.scales;
  out.residual = relative_misfit(sys.matrix * c - b, b);
  out.rank = static_cast<int>(rank);
  const double smin = sigma.size() > 0 ? sigma[sigma.size() - 1] : 0.0;
  out.condition = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  out.mesh_fingerprint = mesh.fingerprint();
  return out;
}

std::vector<double> evaluate_solution(const CaloricApproximant& approx, const CoefficientMatrix& a,
                                      const std::vector<SpaceTimePoint>& points) {
  if (a.dim() != approx.dim) throw Error(ErrorCode::DimensionMismatch, "coefficient matrix and approximant differ");
  const BasisEvaluator basis(RationalMatrix::from(a), approx.degree, approx.parity);
  const std::vector<double> c = approx.physical_coefficients();
  std::vector<double> out(points.size());
  parallel_for(points.size(), [&](std::size_t i) {
    if (points[i].x.size() != approx.dim) throw Error(ErrorCode::DimensionMismatch, "point dimension");
    const std::vector<double> v = basis.evaluate(points[i]);
    double sum = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) sum += c[k] * v[k];
    out[i] = sum;
  });
  return out;
}

double boundary_residual(const CaloricApproximant& approx, const CoefficientMatrix& a, const CylinderMesh& mesh,
                         const BoundaryData& f) {
  check_data(mesh, approx.parity, f);
  const BoundaryNodes nodes = boundary_nodes(mesh, approx.parity);
  const std::vector<double> fit = evaluate_solution(approx, a, nodes.points);
  Eigen::VectorXd r(static_cast<Eigen::Index>(fit.size()));
  Eigen::VectorXd b(r.size());
  for (std::size_t i = 0; i < fit.size(); ++i) {
    const double sw = std::sqrt(nodes.weights[i]);
    b[static_cast<Eigen::Index>(i)] = sw * f.values[i];
    r[static_cast<Eigen::Index>(i)] = sw * (fit[i] - f.values[i]);
  }
  return relative_misfit(r, b);
}

std::vector<SpaceTimePoint> interior_probe_grid(const CylinderMesh& mesh) {
  const CrossSection& cs = mesh.section();
  const double T = mesh.final_time();
  std::vector<Vec> directions;
  if (mesh.dim() == 2) {
    for (int j = 0; j < 5; ++j) directions.push_back(cs.curve(2.0 * std::numbers::pi * j / 5.0 + 0.3));
  } else {
    const double d[5][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, -1}, {1, 1, 1}, {-1, 2, 0.5}};
    for (const auto& u : d) {
      Vec v(3);
      v << u[0], u[1], u[2];
      directions.push_back(cs.surface_point(v.normalized()));
    }
  }
  std::vector<SpaceTimePoint> out;
  for (int i = 0; i < 5; ++i) {
    for (const Vec& y : directions) {
      for (int k = 0; k < 5; ++k) out.push_back({(0.1 + 0.2 * i) * y, T * (0.1 + 0.2 * k)});
    }
  }
  return out;
}

void StudyReport::write_csv(std::ostream& out) const {
  out << "degree,residual,rank,cond,interior_max_err,seconds\n";
  for (std::size_t i = 0; i < degrees.size(); ++i) {
    char line[256];
    std::snprintf(line, sizeof line, "%d,%.17g,%d,%.17g,%.17g,%.6f\n", degrees[i], residuals[i], ranks[i],
                  conditions[i], interior_max_errors[i], seconds[i]);
    out << line;
  }
}

nlohmann::json StudyReport::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < degrees.size(); ++i) {
    rows.push_back({{"degree", degrees[i]},
                    {"residual", residuals[i]},
                    {"rank", ranks[i]},
                    {"cond", conditions[i]},
                    {"interior_max_err", interior_max_errors[i]},
                    {"seconds", seconds[i]}});
  }
  return {{"parity", to_string(parity)}, {"dim", dim}, {"exploratory", exploratory}, {"rows", rows}};
}

StudyReport completeness_study(const CylinderMesh& mesh, const CoefficientMatrix& a, Parity parity,
                               const BoundaryData& f, const std::vector<int>& degrees, double rcond,
                               const std::function<double(const SpaceTimePoint&)>& exact) {
  for (std::size_t i = 0; i < degrees.size(); ++i) {
    if (degrees[i] < 0 || (i > 0 && degrees[i] <= degrees[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, "degrees must be non-negative and strictly increasing");
    }
  }
  StudyReport report;
  report.parity = parity;
  report.dim = mesh.dim();
  report.exploratory = mesh.dim() == 2;
  const std::vector<SpaceTimePoint> probes = exact ? interior_probe_grid(mesh) : std::vector<SpaceTimePoint>{};
  for (int degree : degrees) {
    const auto start = std::chrono::steady_clock::now();
    const CaloricApproximant approx = solve_dirichlet(mesh, a, parity, degree, f, rcond);
    double err = std::numeric_limits<double>::quiet_NaN();
    if (exact) {
      const std::vector<double> values = evaluate_solution(approx, a, probes);
      err = 0.0;
      for (std::size_t i = 0; i < probes.size(); ++i) err = std::max(err, std::abs(values[i] - exact(probes[i])));
    }
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    report.degrees.push_back(degree);
    report.residuals.push_back(approx.residual);
    report.ranks.push_back(approx.rank);
    report.conditions.push_back(approx.condition);
    report.interior_max_errors.push_back(err);
    report.seconds.push_back(elapsed.count());
  }
  return report;
}

CrossValidation cross_validate(const CylinderMesh& coarse, const CylinderMesh& fine, const CoefficientMatrix& a,
                               Parity parity, int degree, const std::function<double(const SpaceTimePoint&)>& f,
                               double rcond) {
  const CaloricApproximant approx =
      solve_dirichlet(coarse, a, parity, degree, BoundaryData::from_function(coarse, parity, f), rcond);
  CrossValidation out;
  out.coarse_residual = approx.residual;
  out.fine_residual = boundary_residual(approx, a, fine, BoundaryData::from_function(fine, parity, f));
  if (out.coarse_residual > 0.0) {
    out.ratio = out.fine_residual / out.coarse_residual;
  } else {
    out.ratio = out.fine_residual > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
  }
  out.flagged = out.fine_residual > 2.0 * out.coarse_residual;
  return out;
}

}  // namespace calorix
