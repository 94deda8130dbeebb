#include "calorix/caloric.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include "calorix/error.hpp"
#include "calorix/kernels.hpp"
#include "calorix/quadrature.hpp"

namespace calorix {

std::string to_string(Parity p) { return p == Parity::V ? "v" : "w"; }

Parity parity_from_string(const std::string& s) {
  if (s == "v") return Parity::V;
  if (s == "w") return Parity::W;
  throw Error(ErrorCode::InvalidArgument, "parity must be \"v\" or \"w\", got \"" + s + "\"");
}

RationalMatrix RationalMatrix::from_doubles(const std::vector<std::vector<double>>& entries) {
  RationalMatrix r;
  r.n = static_cast<int>(entries.size());
  r.a.assign(r.n, std::vector<Rational>(r.n));
  for (int h = 0; h < r.n; ++h) {
    if (static_cast<int>(entries[h].size()) != r.n) throw Error(ErrorCode::DimensionMismatch, "matrix not square");
    for (int k = 0; k < r.n; ++k) {
      if (!std::isfinite(entries[h][k])) {
        throw Error(ErrorCode::NonRationalCoefficients, "entry (" + std::to_string(h) + "," + std::to_string(k) +
                                                            ") is not a finite number");
      }
      r.a[h][k] = Rational(entries[h][k]);
    }
  }
  return r;
}

RationalMatrix RationalMatrix::from(const CoefficientMatrix& m) {
  std::vector<std::vector<double>> e(m.dim(), std::vector<double>(m.dim()));
  for (int h = 0; h < m.dim(); ++h) {
    for (int k = 0; k < m.dim(); ++k) e[h][k] = m(h, k);
  }
  return from_doubles(e);
}

std::vector<MultiIndex> enumerate_basis(int n, int max_degree) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be positive");
  if (max_degree < 0) throw Error(ErrorCode::InvalidArgument, "max_degree must be non-negative");
  std::vector<MultiIndex> out;
  std::vector<int> cur(n, 0);
  // compositions of each degree d, leading variable descending
  std::function<void(int, int)> fill = [&](int j, int remaining) {
    if (j == n - 1) {
      cur[j] = remaining;
      out.push_back(MultiIndex{cur});
      return;
    }
    for (int e = remaining; e >= 0; --e) {
      cur[j] = e;
      fill(j + 1, remaining - e);
    }
  };
  for (int d = 0; d <= max_degree; ++d) fill(0, d);
  return out;
}

std::size_t basis_position(const MultiIndex& alpha) {
  const auto all = enumerate_basis(alpha.size(), alpha.order());
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (all[i] == alpha) return i;
  }
  throw Error(ErrorCode::InvalidArgument, "multi-index not found");
}

namespace {

class RecurrenceTable {
 public:
  RecurrenceTable(const RationalMatrix& a, Parity parity)
      : a_(a), two_t_(parity == Parity::V ? Rational(2) : Rational(-2)) {}

  const Polynomial& get(const MultiIndex& alpha) {
    auto it = memo_.find(alpha);
    if (it != memo_.end()) return it->second;
    const int n = a_.n;
    Polynomial v(n);
    int j = -1;
    for (int k = 0; k < n; ++k) {
      if (alpha[k] > 0) {
        j = k;
        break;
      }
    }
    if (j < 0) {
      v = Polynomial::constant(n, 1);
    } else {
      MultiIndex beta = alpha;
      --beta.alpha[j];
      v = get(beta).times_x(j);
      Polynomial drift(n);
      for (int k = 0; k < n; ++k) {
        if (beta[k] == 0 || a_.a[j][k] == 0) continue;
        MultiIndex gamma = beta;
        --gamma.alpha[k];
        drift += get(gamma) * (a_.a[j][k] * beta[k]);
      }
      v += drift.times_t() * two_t_;
    }
    return memo_.emplace(alpha, std::move(v)).first->second;
  }

 private:
  const RationalMatrix& a_;
  Rational two_t_;
  std::map<MultiIndex, Polynomial> memo_;
};

void check_arity(const RationalMatrix& a, const MultiIndex& alpha) {
  if (alpha.size() != a.n) throw Error(ErrorCode::DimensionMismatch, "multi-index arity differs from matrix size");
  for (int e : alpha.alpha) {
    if (e < 0) throw Error(ErrorCode::InvalidArgument, "multi-index entries must be non-negative");
  }
}

}  // namespace

CaloricPolynomial caloric_poly(const RationalMatrix& a, const MultiIndex& alpha, Parity parity) {
  check_arity(a, alpha);
  RecurrenceTable table(a, parity);
  return CaloricPolynomial{parity, alpha, table.get(alpha)};
}

CaloricPolynomial caloric_poly(const CoefficientMatrix& a, const MultiIndex& alpha, Parity parity) {
  return caloric_poly(RationalMatrix::from(a), alpha, parity);
}

std::vector<CaloricPolynomial> caloric_basis(const RationalMatrix& a, int max_degree, Parity parity) {
  RecurrenceTable table(a, parity);
  std::vector<CaloricPolynomial> out;
  for (const auto& alpha : enumerate_basis(a.n, max_degree)) {
    out.push_back(CaloricPolynomial{parity, alpha, table.get(alpha)});
  }
  return out;
}

Polynomial apply_parabolic_operator(const Polynomial& p, const RationalMatrix& a, Operator which) {
  if (p.dim() != a.n) throw Error(ErrorCode::DimensionMismatch, "polynomial and matrix dimensions differ");
  const int n = a.n;
  Polynomial out(n);
  for (int h = 0; h < n; ++h) {
    const Polynomial ph = p.dx(h);
    if (ph.is_zero()) continue;
    for (int k = 0; k < n; ++k) {
      if (a.a[h][k] == 0) continue;
      out += ph.dx(k) * a.a[h][k];
    }
  }
  if (which == Operator::H) {
    out -= p.dt();
  } else {
    out += p.dt();
  }
  return out;
}

Decomposition decompose(const Polynomial& p, const RationalMatrix& a, Parity parity) {
  if (p.dim() != a.n) throw Error(ErrorCode::DimensionMismatch, "polynomial and matrix dimensions differ");
  Decomposition d;
  Polynomial residual = p;
  RecurrenceTable table(a, parity);
  const Polynomial trace = p.at_time_zero();
  for (const auto& [mono, c] : trace.terms()) {
    MultiIndex alpha{mono.beta};
    d.coefficients.emplace(alpha, c);
    residual -= table.get(alpha) * c;
  }
  if (!residual.is_zero()) {
    // map order is graded, so the first entry has the lowest grade
    const auto& [mono, c] = *residual.terms().begin();
    Polynomial lead = Polynomial::monomial(a.n, mono, c);
    throw Error(ErrorCode::NotCaloric, "residual term of lowest grade: " + lead.to_string());
  }
  return d;
}

double moment_identity_check(const CoefficientMatrix& a, const MultiIndex& alpha, const SpaceTimePoint& point,
                             int resolution) {
  const int n = a.dim();
  if (alpha.size() != n) throw Error(ErrorCode::DimensionMismatch, "multi-index arity");
  if (!(point.t > 0.0)) throw Error(ErrorCode::InvalidArgument, "moment identity needs t > 0");
  if (resolution < 1) throw Error(ErrorCode::InvalidResolution, "resolution must be positive");
  // exp(-c) = 1e-16 at the box boundary
  const double c = 16.0 * std::log(10.0);
  std::vector<Rule1d> axes;
  for (int j = 0; j < n; ++j) {
    const double half = std::sqrt(4.0 * point.t * c * a(j, j));
    std::vector<double> breaks;
    for (int p = 0; p <= resolution; ++p) breaks.push_back(point.x[j] - half + 2.0 * half * p / resolution);
    axes.push_back(composite_gauss(breaks, 8));
  }
  const std::size_t m = axes[0].nodes.size();
  std::size_t total = 1;
  for (int j = 0; j < n; ++j) total *= m;
  double sum = 0.0;
  Vec y(n);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    double w = 1.0;
    double mono = 1.0;
    for (int j = 0; j < n; ++j) {
      const std::size_t i = rem % m;
      rem /= m;
      y[j] = axes[j].nodes[i];
      w *= axes[j].weights[i];
      for (int e = 0; e < alpha[j]; ++e) mono *= y[j];
    }
    sum += w * mono * fundamental_solution(a, point.x - y, point.t);
  }
  const double exact = caloric_poly(a, alpha, Parity::V).evaluate(point);
  return std::abs(sum - exact);
}

nlohmann::json to_json(const CaloricPolynomial& p) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [mono, c] : p.poly.terms()) {
    terms.push_back({{"beta", mono.beta}, {"m", mono.m}, {"num", c.get_num().get_str()}, {"den", c.get_den().get_str()}});
  }
  return {{"parity", to_string(p.parity)}, {"alpha", p.alpha.alpha}, {"text", p.poly.to_string()}, {"terms", terms}};
}

}  // namespace calorix
