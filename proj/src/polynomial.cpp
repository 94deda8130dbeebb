#include "calorix/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "calorix/error.hpp"

namespace calorix {

int MultiIndex::order() const { return std::accumulate(alpha.begin(), alpha.end(), 0); }

bool MultiIndex::operator<(const MultiIndex& other) const {
  const int a = order();
  const int b = other.order();
  if (a != b) return a < b;
  // higher power of the leading variable first
  return alpha > other.alpha;
}

int Monomial::parabolic_degree() const { return std::accumulate(beta.begin(), beta.end(), 0) + 2 * m; }

bool Monomial::operator<(const Monomial& other) const {
  const int a = parabolic_degree();
  const int b = other.parabolic_degree();
  if (a != b) return a < b;
  if (m != other.m) return m < other.m;
  return MultiIndex{beta} < MultiIndex{other.beta};
}

Polynomial Polynomial::constant(int n, const Rational& c) {
  Polynomial p(n);
  p.add_term(Monomial{std::vector<int>(n, 0), 0}, c);
  return p;
}

Polynomial Polynomial::monomial(int n, const Monomial& mono, const Rational& c) {
  if (static_cast<int>(mono.beta.size()) != n) throw Error(ErrorCode::DimensionMismatch, "monomial arity");
  Polynomial p(n);
  p.add_term(mono, c);
  return p;
}

Rational Polynomial::coefficient(const Monomial& mono) const {
  auto it = terms_.find(mono);
  return it == terms_.end() ? Rational(0) : it->second;
}

void Polynomial::add_term(const Monomial& mono, const Rational& c) {
  if (c == 0) return;
  auto [it, inserted] = terms_.emplace(mono, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  if (n_ != other.n_) throw Error(ErrorCode::DimensionMismatch, "polynomial dimensions differ");
  for (const auto& [mono, c] : other.terms_) add_term(mono, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) {
  if (n_ != other.n_) throw Error(ErrorCode::DimensionMismatch, "polynomial dimensions differ");
  for (const auto& [mono, c] : other.terms_) add_term(mono, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(const Rational& c) {
  if (c == 0) {
    terms_.clear();
    return *this;
  }
  for (auto& [mono, coef] : terms_) coef *= c;
  return *this;
}

Polynomial Polynomial::times_x(int j) const {
  Polynomial out(n_);
  for (const auto& [mono, c] : terms_) {
    Monomial m2 = mono;
    ++m2.beta[j];
    out.terms_.emplace(std::move(m2), c);
  }
  return out;
}

Polynomial Polynomial::times_t() const {
  Polynomial out(n_);
  for (const auto& [mono, c] : terms_) {
    Monomial m2 = mono;
    ++m2.m;
    out.terms_.emplace(std::move(m2), c);
  }
  return out;
}

Polynomial Polynomial::dx(int j) const {
  Polynomial out(n_);
  for (const auto& [mono, c] : terms_) {
    if (mono.beta[j] == 0) continue;
    Monomial m2 = mono;
    const int e = m2.beta[j]--;
    out.add_term(m2, c * e);
  }
  return out;
}

Polynomial Polynomial::dt() const {
  Polynomial out(n_);
  for (const auto& [mono, c] : terms_) {
    if (mono.m == 0) continue;
    Monomial m2 = mono;
    const int e = m2.m--;
    out.add_term(m2, c * e);
  }
  return out;
}

Polynomial Polynomial::at_time_zero() const {
  Polynomial out(n_);
  for (const auto& [mono, c] : terms_) {
    if (mono.m == 0) out.terms_.emplace(mono, c);
  }
  return out;
}

int Polynomial::degree_in_x(int j) const {
  int d = terms_.empty() ? -1 : 0;
  for (const auto& [mono, c] : terms_) d = std::max(d, mono.beta[j]);
  return d;
}

int Polynomial::degree_in_t() const {
  int d = terms_.empty() ? -1 : 0;
  for (const auto& [mono, c] : terms_) d = std::max(d, mono.m);
  return d;
}

double Polynomial::evaluate(const Vec& x, double t) const {
  double sum = 0.0;
  for (const auto& [mono, c] : terms_) {
    double v = c.get_d();
    for (int j = 0; j < n_; ++j) {
      for (int e = 0; e < mono.beta[j]; ++e) v *= x[j];
    }
    for (int e = 0; e < mono.m; ++e) v *= t;
    sum += v;
  }
  return sum;
}

Rational Polynomial::evaluate_exact(const std::vector<Rational>& x, const Rational& t) const {
  if (static_cast<int>(x.size()) != n_) throw Error(ErrorCode::DimensionMismatch, "point arity");
  Rational sum = 0;
  for (const auto& [mono, c] : terms_) {
    Rational v = c;
    for (int j = 0; j < n_; ++j) {
      for (int e = 0; e < mono.beta[j]; ++e) v *= x[j];
    }
    for (int e = 0; e < mono.m; ++e) v *= t;
    sum += v;
  }
  return sum;
}

std::string Polynomial::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  // highest parabolic degree first; within a degree, pure-space terms lead
  std::vector<std::pair<Monomial, Rational>> ordered(terms_.begin(), terms_.end());
  std::stable_sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
    return a.first.parabolic_degree() > b.first.parabolic_degree();
  });
  for (const auto& [mono, c] : ordered) {
    std::vector<std::string> factors;
    for (int j = 0; j < n_; ++j) {
      if (mono.beta[j] == 0) continue;
      std::string f = "x" + std::to_string(j + 1);
      if (mono.beta[j] > 1) f += "^" + std::to_string(mono.beta[j]);
      factors.push_back(f);
    }
    if (mono.m > 0) factors.push_back(mono.m > 1 ? "t^" + std::to_string(mono.m) : "t");
    Rational mag = abs(c);
    const bool negative = c < 0;
    if (first) {
      if (negative) os << "-";
    } else {
      os << (negative ? " - " : " + ");
    }
    first = false;
    std::string coef;
    if (mag != 1 || factors.empty()) {
      coef = mag.get_den() == 1 ? mag.get_str() : "(" + mag.get_str() + ")";
    }
    os << coef;
    for (std::size_t f = 0; f < factors.size(); ++f) {
      if (f > 0) os << "*";
      os << factors[f];
    }
  }
  return os.str();
}

}  // namespace calorix
