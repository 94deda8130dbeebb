#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "calorix/coefficient_matrix.hpp"
#include "calorix/polynomial.hpp"

namespace calorix {

/// v-parity polynomials solve H u = 0, w-parity ones solve H* u = 0.
enum class Parity { V, W };
enum class Operator { H, HStar };

std::string to_string(Parity p);
Parity parity_from_string(const std::string& s);

/// Exact copy of a coefficient matrix. Doubles are dyadic rationals, so the
/// conversion is lossless.
struct RationalMatrix {
  int n = 0;
  std::vector<std::vector<Rational>> a;

  static RationalMatrix from(const CoefficientMatrix& m);
  static RationalMatrix from_doubles(const std::vector<std::vector<double>>& entries);
};

struct CaloricPolynomial {
  Parity parity = Parity::V;
  MultiIndex alpha;
  Polynomial poly;

  double evaluate(const SpaceTimePoint& p) const { return poly.evaluate(p.x, p.t); }
};

/// All multi-indices with |alpha| <= max_degree in graded-lex order;
/// there are C(n + max_degree, n) of them.
std::vector<MultiIndex> enumerate_basis(int n, int max_degree);

/// Position of alpha inside enumerate_basis(n, |alpha|).
std::size_t basis_position(const MultiIndex& alpha);

/// v_alpha (or w_alpha) built by
///   v_{alpha+e_j} = x_j v_alpha + 2t sum_k a_jk alpha_k v_{alpha-e_k},   v_0 = 1
/// with 2t replaced by -2t for the w family.
CaloricPolynomial caloric_poly(const RationalMatrix& a, const MultiIndex& alpha, Parity parity);
CaloricPolynomial caloric_poly(const CoefficientMatrix& a, const MultiIndex& alpha, Parity parity);

/// The whole family |alpha| <= max_degree, in enumerate_basis order. Shares
/// the recurrence table, so it is much cheaper than repeated caloric_poly.
std::vector<CaloricPolynomial> caloric_basis(const RationalMatrix& a, int max_degree, Parity parity);

/// sum a_hk d_h d_k p -/+ d_t p (minus for H, plus for H*).
Polynomial apply_parabolic_operator(const Polynomial& p, const RationalMatrix& a, Operator which);

struct Decomposition {
  std::map<MultiIndex, Rational> coefficients;
};

/// Reads c_alpha from p(x, 0) = sum c_alpha x^alpha and certifies that
/// p - sum c_alpha v_alpha vanishes identically. Throws Error{NotCaloric}
/// naming the lowest-grade residual term otherwise.
Decomposition decompose(const Polynomial& p, const RationalMatrix& a, Parity parity);

/// |int G(x - y, t) y^alpha dy - v_alpha(x, t)| with the integral computed
/// by composite Gauss-Legendre on a box outside of which the Gaussian is
/// below 1e-16 of its peak. `resolution` is the number of panels per axis.
double moment_identity_check(const CoefficientMatrix& a, const MultiIndex& alpha, const SpaceTimePoint& point,
                             int resolution = 24);

nlohmann::json to_json(const CaloricPolynomial& p);

}  // namespace calorix
