#pragma once

#include <vector>

#include "calorix/linalg.hpp"

namespace calorix {

/// Symmetric positive definite coefficient matrix of the elliptic part
/// E = a_hk d_h d_k, together with its inverse, determinant and lower
/// Cholesky factor. Immutable once built; construct with make_coefficients.
class CoefficientMatrix {
 public:
  int dim() const { return static_cast<int>(a_.rows()); }
  const Mat& entries() const { return a_; }
  const Mat& inverse() const { return inv_; }
  const Mat& cholesky() const { return chol_; }
  double det() const { return det_; }
  double sqrt_det() const { return sqrt_det_; }

  double operator()(int h, int k) const { return a_(h, k); }

  /// <A^{-1} z, z>
  double inverse_quadratic(const Vec& z) const;
  /// <A xi, xi>
  double quadratic(const Vec& xi) const;
  Vec apply(const Vec& v) const { return a_ * v; }
  /// Largest eigenvalue, used to size Gaussian supports.
  double max_eigenvalue() const { return lambda_max_; }
  double min_eigenvalue() const { return lambda_min_; }

  static CoefficientMatrix identity(int n);

 private:
  friend CoefficientMatrix make_coefficients(int n, const std::vector<std::vector<double>>& entries);

  Mat a_;
  Mat inv_;
  Mat chol_;
  double det_ = 1.0;
  double sqrt_det_ = 1.0;
  double lambda_max_ = 1.0;
  double lambda_min_ = 1.0;
};

/// Validates symmetry (absolute 1e-14) and positive definiteness (Cholesky
/// pivots > 0). Throws Error{NotSymmetric} or Error{NotPositiveDefinite}.
CoefficientMatrix make_coefficients(int n, const std::vector<std::vector<double>>& entries);

}  // namespace calorix
