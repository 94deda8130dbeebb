#pragma once

#include <gmpxx.h>

#include <map>
#include <string>
#include <vector>

#include "calorix/linalg.hpp"

namespace calorix {

using Rational = mpq_class;

/// Multi-index alpha = (alpha_1, ..., alpha_n).
struct MultiIndex {
  std::vector<int> alpha;

  int size() const { return static_cast<int>(alpha.size()); }
  int order() const;  // |alpha|
  int operator[](int j) const { return alpha[j]; }

  /// Graded-lex order: total degree first, then lexicographic with x_1 the
  /// most significant variable, so (2,0) < (1,1) < (0,2) within degree 2.
  bool operator<(const MultiIndex& other) const;
  bool operator==(const MultiIndex& other) const { return alpha == other.alpha; }
};

/// Monomial x^beta t^m.
struct Monomial {
  std::vector<int> beta;
  int m = 0;

  int parabolic_degree() const;  // |beta| + 2m
  bool operator<(const Monomial& other) const;
  bool operator==(const Monomial& other) const { return m == other.m && beta == other.beta; }
};

/// Dense-free polynomial in (x_1, ..., x_n, t) with exact rational
/// coefficients. Zero coefficients are never stored, so the zero
/// polynomial is the empty term map.
class Polynomial {
 public:
  explicit Polynomial(int n = 0) : n_(n) {}

  static Polynomial constant(int n, const Rational& c);
  static Polynomial monomial(int n, const Monomial& mono, const Rational& c = 1);

  int dim() const { return n_; }
  const std::map<Monomial, Rational>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  Rational coefficient(const Monomial& mono) const;
  void add_term(const Monomial& mono, const Rational& c);

  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator-=(const Polynomial& other);
  Polynomial& operator*=(const Rational& c);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, const Rational& c) { return a *= c; }
  bool operator==(const Polynomial& other) const { return n_ == other.n_ && terms_ == other.terms_; }

  Polynomial times_x(int j) const;
  Polynomial times_t() const;
  Polynomial dx(int j) const;
  Polynomial dt() const;

  /// p(x, 0)
  Polynomial at_time_zero() const;

  int degree_in_x(int j) const;
  int degree_in_t() const;

  double evaluate(const Vec& x, double t) const;
  Rational evaluate_exact(const std::vector<Rational>& x, const Rational& t) const;

  /// Human-readable form in graded order, e.g. "x1^2 + 2t".
  std::string to_string() const;

 private:
  int n_;
  std::map<Monomial, Rational> terms_;
};

}  // namespace calorix
