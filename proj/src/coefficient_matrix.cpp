#include "calorix/coefficient_matrix.hpp"

#include <cmath>
#include <sstream>

#include "calorix/error.hpp"

namespace calorix {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::DimensionTooSmall: return "DimensionTooSmall";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidResolution: return "InvalidResolution";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonRationalCoefficients: return "NonRationalCoefficients";
    case ErrorCode::NotCaloric: return "NotCaloric";
    case ErrorCode::OffsetTooLarge: return "OffsetTooLarge";
    case ErrorCode::TargetOnBoundary: return "TargetOnBoundary";
    case ErrorCode::CornerTooClose: return "CornerTooClose";
    case ErrorCode::RegionMismatch: return "RegionMismatch";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::TaskFailed: return "TaskFailed";
  }
  return "Unknown";
}

double CoefficientMatrix::inverse_quadratic(const Vec& z) const {
  const int n = dim();
  double q = 0.0;
  for (int h = 0; h < n; ++h) {
    double row = 0.0;
    for (int k = 0; k < n; ++k) row += inv_(h, k) * z[k];
    q += row * z[h];
  }
  return q;
}

double CoefficientMatrix::quadratic(const Vec& xi) const {
  const int n = dim();
  double q = 0.0;
  for (int h = 0; h < n; ++h) {
    double row = 0.0;
    for (int k = 0; k < n; ++k) row += a_(h, k) * xi[k];
    q += row * xi[h];
  }
  return q;
}

CoefficientMatrix CoefficientMatrix::identity(int n) {
  std::vector<std::vector<double>> e(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) e[i][i] = 1.0;
  return make_coefficients(n, e);
}

CoefficientMatrix make_coefficients(int n, const std::vector<std::vector<double>>& entries) {
  if (n < 1 || n > kMaxDim) {
    throw Error(ErrorCode::InvalidArgument, "dimension must lie in [1, " + std::to_string(kMaxDim) + "]");
  }
  if (static_cast<int>(entries.size()) != n) {
    throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(n) + " rows");
  }
  Mat a(n, n);
  for (int h = 0; h < n; ++h) {
    if (static_cast<int>(entries[h].size()) != n) {
      throw Error(ErrorCode::DimensionMismatch, "row " + std::to_string(h) + " has wrong length");
    }
    for (int k = 0; k < n; ++k) {
      if (!std::isfinite(entries[h][k])) throw Error(ErrorCode::InvalidArgument, "non-finite entry");
      a(h, k) = entries[h][k];
    }
  }
  for (int h = 0; h < n; ++h) {
    for (int k = h + 1; k < n; ++k) {
      if (std::abs(a(h, k) - a(k, h)) > 1e-14) {
        std::ostringstream msg;
        msg << "a(" << h << "," << k << ")=" << a(h, k) << " vs a(" << k << "," << h << ")=" << a(k, h);
        throw Error(ErrorCode::NotSymmetric, msg.str());
      }
      // stored exactly symmetric
      a(k, h) = a(h, k);
    }
  }

  Mat l = Mat::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    double pivot = a(j, j);
    for (int k = 0; k < j; ++k) pivot -= l(j, k) * l(j, k);
    if (!(pivot > 0.0)) {
      throw Error(ErrorCode::NotPositiveDefinite, "Cholesky pivot " + std::to_string(j) + " is " + std::to_string(pivot));
    }
    l(j, j) = std::sqrt(pivot);
    for (int i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }

  CoefficientMatrix out;
  out.a_ = a;
  out.chol_ = l;
  double sqrt_det = 1.0;
  for (int j = 0; j < n; ++j) sqrt_det *= l(j, j);
  out.sqrt_det_ = sqrt_det;
  out.det_ = sqrt_det * sqrt_det;

  // A^{-1} = L^{-T} L^{-1}
  Mat linv = l.triangularView<Eigen::Lower>().solve(Mat::Identity(n, n));
  Mat inv = linv.transpose() * linv;
  out.inv_ = 0.5 * (inv + inv.transpose());

  Eigen::SelfAdjointEigenSolver<Mat> eig(a, Eigen::EigenvaluesOnly);
  out.lambda_min_ = eig.eigenvalues()(0);
  out.lambda_max_ = eig.eigenvalues()(n - 1);
  return out;
}

}  // namespace calorix
