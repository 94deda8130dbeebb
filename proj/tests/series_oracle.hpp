#pragma once

// Independent oracle for the caloric polynomials: expands
// exp(<x,xi> +/- t xi^T A xi) as a truncated power series in xi and reads
// v_alpha off as alpha! times the coefficient of xi^alpha. Shares nothing
// with the recurrence in the library except the Polynomial container used
// for the final comparison.

#include <map>
#include <vector>

#include "calorix/caloric.hpp"

namespace calorix::testing {

// exponent layout: [xi_1..xi_n, x_1..x_n, t]
using SeriesKey = std::vector<int>;
using Series = std::map<SeriesKey, Rational>;

inline int xi_degree(const SeriesKey& k, int n) {
  int d = 0;
  for (int j = 0; j < n; ++j) d += k[j];
  return d;
}

inline Series series_multiply(const Series& a, const Series& b, int n, int max_xi) {
  Series out;
  for (const auto& [ka, ca] : a) {
    for (const auto& [kb, cb] : b) {
      SeriesKey k(ka.size());
      for (std::size_t i = 0; i < k.size(); ++i) k[i] = ka[i] + kb[i];
      if (xi_degree(k, n) > max_xi) continue;
      out[k] += ca * cb;
    }
  }
  for (auto it = out.begin(); it != out.end();) {
    it = it->second == 0 ? out.erase(it) : std::next(it);
  }
  return out;
}

inline std::map<MultiIndex, Polynomial> series_oracle(const RationalMatrix& a, int max_degree, Parity parity) {
  const int n = a.n;
  const int width = 2 * n + 1;
  Series exponent;
  for (int j = 0; j < n; ++j) {
    SeriesKey k(width, 0);
    k[j] = 1;
    k[n + j] = 1;
    exponent[k] += 1;
  }
  const Rational sign = parity == Parity::V ? Rational(1) : Rational(-1);
  for (int h = 0; h < n; ++h) {
    for (int kk = 0; kk < n; ++kk) {
      SeriesKey k(width, 0);
      k[h] += 1;
      k[kk] += 1;
      k[2 * n] = 1;
      exponent[k] += sign * a.a[h][kk];
    }
  }
  // exp(P) = sum_m P^m / m!, P has xi-degree >= 1
  Series total;
  total[SeriesKey(width, 0)] = 1;
  Series power;
  power[SeriesKey(width, 0)] = 1;
  Rational factorial = 1;
  for (int m = 1; m <= max_degree; ++m) {
    power = series_multiply(power, exponent, n, max_degree);
    factorial *= m;
    for (const auto& [k, c] : power) total[k] += c / factorial;
  }
  std::map<MultiIndex, Polynomial> out;
  for (const auto& alpha : enumerate_basis(n, max_degree)) out.emplace(alpha, Polynomial(n));
  for (const auto& [k, c] : total) {
    if (c == 0) continue;
    MultiIndex alpha{std::vector<int>(k.begin(), k.begin() + n)};
    Rational alpha_factorial = 1;
    for (int e : alpha.alpha) {
      for (int i = 2; i <= e; ++i) alpha_factorial *= i;
    }
    Monomial mono{std::vector<int>(k.begin() + n, k.begin() + 2 * n), k[2 * n]};
    out.at(alpha).add_term(mono, c * alpha_factorial);
  }
  return out;
}

}  // namespace calorix::testing
