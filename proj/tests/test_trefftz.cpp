#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "calorix/error.hpp"
#include "calorix/kernels.hpp"
#include "calorix/trefftz.hpp"
#include "test_support.hpp"

using namespace calorix;
using namespace calorix::testing;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::TaskFailed;
}

MultiIndex mi(std::vector<int> a) { return MultiIndex{std::move(a)}; }

std::size_t index_of(const std::vector<MultiIndex>& basis, const MultiIndex& alpha) {
  for (std::size_t k = 0; k < basis.size(); ++k) {
    if (basis[k] == alpha) return k;
  }
  return basis.size();
}

const Vec kXi = vec({0.3, 0.4});

double exponential_data(const SpaceTimePoint& p) {
  return caloric_exponential(CoefficientMatrix::identity(2), p, {kXi}, Sign::Plus);
}

// weighted discrete norm of f - T_N f over the v data nodes, relative to |f|
double taylor_bound(const CylinderMesh& mesh, int n) {
  const BoundaryNodes nodes = boundary_nodes(mesh, Parity::V);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < nodes.points.size(); ++i) {
    const SpaceTimePoint& p = nodes.points[i];
    const double f = exponential_data(p);
    const double tail = f - truncated_exponential(p.x.dot(kXi), p.t * kXi.squaredNorm(), n);
    num += nodes.weights[i] * tail * tail;
    den += nodes.weights[i] * f * f;
  }
  return std::sqrt(num / den);
}

CylinderMesh exponential_mesh() {
  return build_mesh(CrossSection::disk(1.0), CoefficientMatrix::identity(2), 0.5, 64, 16, 16);
}

}  // namespace

TEST_CASE("basis evaluator agrees with exact polynomial evaluation") {
  const auto a = matrix_2x2_skew();
  const BasisEvaluator eval(RationalMatrix::from(a), 8, Parity::W);
  const auto polys = caloric_basis(RationalMatrix::from(a), 8, Parity::W);
  REQUIRE(eval.size() == polys.size());
  const SpaceTimePoint p{vec({0.7, -1.3}), 0.45};
  const auto values = eval.evaluate(p);
  for (std::size_t k = 0; k < polys.size(); ++k) {
    CHECK(values[k] == doctest::Approx(polys[k].evaluate(p)).epsilon(1e-13));
  }
}

TEST_CASE("assemble_system layout") {
  const auto id = CoefficientMatrix::identity(2);
  const auto mesh = build_mesh(CrossSection::disk(1.0), id, 1.0, 32, 8, 8);
  const auto s0 = assemble_system(mesh, id, Parity::V, 0);
  CHECK(s0.matrix.cols() == 1);
  CHECK(static_cast<std::size_t>(s0.matrix.rows()) == mesh.bottom().size() + mesh.lateral().size());
  CHECK(s0.matrix.col(0).norm() == doctest::Approx(1.0).epsilon(1e-14));
  // bottom area pi plus lateral area 2 pi T
  CHECK(s0.scales[0] == doctest::Approx(std::sqrt(3.0 * M_PI)).epsilon(1e-12));
  CHECK(assemble_system(mesh, id, Parity::V, 2).matrix.cols() == 6);
  CHECK(s0.regions == std::vector<Region>{Region::Bottom, Region::Lateral});
  CHECK(assemble_system(mesh, id, Parity::W, 1).regions == std::vector<Region>{Region::Top, Region::Lateral});
}

TEST_CASE("parity selects the data regions") {
  const auto id = CoefficientMatrix::identity(2);
  const auto mesh = build_mesh(CrossSection::disk(1.0), id, 1.0, 16, 4, 4);
  const auto v = boundary_nodes(mesh, Parity::V);
  const auto w = boundary_nodes(mesh, Parity::W);
  for (std::size_t i = 0; i < mesh.bottom().size(); ++i) {
    CHECK(v.points[i].t == 0.0);
    CHECK(w.points[i].t == 1.0);
  }
  for (std::size_t i = mesh.bottom().size(); i < v.points.size(); ++i) {
    CHECK(v.points[i].t > 0.0);
    CHECK(v.points[i].t < 1.0);
  }
  const auto fw = BoundaryData::from_function(mesh, Parity::W, [](const SpaceTimePoint&) { return 1.0; });
  CHECK(fw.regions == std::vector<Region>{Region::Top, Region::Lateral});
  CHECK(code_of([&] { solve_dirichlet(mesh, id, Parity::V, 2, fw); }) == ErrorCode::RegionMismatch);
  const auto other = build_mesh(CrossSection::disk(1.0), id, 1.0, 16, 4, 6);
  const auto fv_other = BoundaryData::from_function(other, Parity::V, [](const SpaceTimePoint&) { return 1.0; });
  CHECK(code_of([&] { solve_dirichlet(mesh, id, Parity::V, 2, fv_other); }) == ErrorCode::RegionMismatch);
}

TEST_CASE("input validation") {
  const auto id = CoefficientMatrix::identity(2);
  const auto mesh = build_mesh(CrossSection::disk(1.0), id, 1.0, 16, 4, 4);
  CHECK(code_of([&] { BoundaryData::sampled(mesh, Parity::V, {1.0, 2.0}); }) == ErrorCode::DimensionMismatch);
  std::vector<double> bad(mesh.bottom().size() + mesh.lateral().size(), 0.0);
  bad[3] = std::nan("");
  CHECK(code_of([&] { BoundaryData::sampled(mesh, Parity::V, bad); }) == ErrorCode::InvalidArgument);
  const auto one = BoundaryData::from_function(mesh, Parity::V, [](const SpaceTimePoint&) { return 1.0; });
  CHECK(code_of([&] { solve_dirichlet(mesh, id, Parity::V, 2, one, 0.0); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { completeness_study(mesh, id, Parity::V, one, {2, 2}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { solve_dirichlet(mesh, matrix_full3(), Parity::V, 2, one); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("constant data and zero coefficients") {
  const auto id = CoefficientMatrix::identity(2);
  const auto mesh = build_mesh(CrossSection::disk(1.0), id, 1.0, 32, 8, 8);
  const auto one = BoundaryData::from_function(mesh, Parity::V, [](const SpaceTimePoint&) { return 1.0; });
  const auto fit = solve_dirichlet(mesh, id, Parity::V, 0, one);
  CHECK(fit.residual < 1e-14);
  CHECK(fit.physical_coefficients()[0] == doctest::Approx(1.0).epsilon(1e-14));
  CaloricApproximant zero = solve_dirichlet(mesh, id, Parity::V, 3, one);
  std::fill(zero.coefficients.begin(), zero.coefficients.end(), 0.0);
  for (double v : evaluate_solution(zero, id, {{vec({0.2, 0.3}), 0.4}, {vec({5, -1}), 3.0}})) CHECK(v == 0.0);
}

TEST_CASE("restriction of v_(2,1) is recovered") {
  const auto id = CoefficientMatrix::identity(2);
  const auto mesh = build_mesh(CrossSection::disk(1.0), id, 1.0, 32, 8, 8);
  const auto v21 = caloric_poly(id, mi({2, 1}), Parity::V);
  const auto f = BoundaryData::from_function(
      mesh, Parity::V, [&](const SpaceTimePoint& p) { return v21.evaluate(p); }, DataSource::PolynomialRestriction);
  for (int n : {3, 4, 6}) {
    const auto fit = solve_dirichlet(mesh, id, Parity::V, n, f);
    CHECK(fit.residual < 1e-10);
    const auto c = fit.physical_coefficients();
    const std::size_t k = index_of(fit.basis, mi({2, 1}));
    CHECK(c[k] == doctest::Approx(1.0).epsilon(1e-9));
    for (std::size_t j = 0; j < c.size(); ++j) {
      if (j != k) CHECK(std::abs(c[j]) < 1e-9);
    }
    const SpaceTimePoint p{vec({1, 1}), 0.5};
    CHECK(std::abs(evaluate_solution(fit, id, {p})[0] - v21.evaluate(p)) < 1e-9);
  }
}

TEST_CASE("reproduction of random caloric polynomials, both parities") {
  auto g = rng(21);
  for (const auto& a : {CoefficientMatrix::identity(2), matrix_2x2_skew()}) {
    const auto mesh = build_mesh(CrossSection::ellipse(1.5, 1.0), a, 0.8, 48, 12, 12);
    for (Parity parity : {Parity::V, Parity::W}) {
      const auto polys = caloric_basis(RationalMatrix::from(a), 6, parity);
      for (int d = 0; d <= 6; ++d) {
        std::vector<double> c(polys.size(), 0.0);
        for (std::size_t k = 0; k < polys.size(); ++k) {
          if (polys[k].alpha.order() <= d) c[k] = uniform(g, -1, 1);
        }
        auto data = [&](const SpaceTimePoint& p) {
          double s = 0.0;
          for (std::size_t k = 0; k < polys.size(); ++k) s += c[k] * polys[k].evaluate(p);
          return s;
        };
        const auto f = BoundaryData::from_function(mesh, parity, data, DataSource::PolynomialRestriction);
        CHECK(solve_dirichlet(mesh, a, parity, d, f).residual < 1e-9);
        if (d == 6) CHECK(solve_dirichlet(mesh, a, parity, 12, f, 1e-12).residual < 1e-9);
      }
    }
  }
}

TEST_CASE("scaling equivariance") {
  const auto id = CoefficientMatrix::identity(2);
  const auto mesh = exponential_mesh();
  const auto f = BoundaryData::from_function(mesh, Parity::V, exponential_data);
  const double lambda = 3.7;
  const auto fl = BoundaryData::from_function(mesh, Parity::V,
                                              [&](const SpaceTimePoint& p) { return lambda * exponential_data(p); });
  const auto a1 = solve_dirichlet(mesh, id, Parity::V, 8, f);
  const auto a2 = solve_dirichlet(mesh, id, Parity::V, 8, fl);
  CHECK(std::abs(a1.residual - a2.residual) < 1e-12);
  for (std::size_t k = 0; k < a1.coefficients.size(); ++k) {
    CHECK(std::abs(a2.coefficients[k] - lambda * a1.coefficients[k]) < 1e-12 * lambda * (1 + std::abs(a1.coefficients[k])));
  }
}

TEST_CASE("caloric exponential: Taylor-tail bound, nested monotonicity and interior error") {
  const auto id = CoefficientMatrix::identity(2);
  const auto mesh = exponential_mesh();
  const auto f = BoundaryData::from_function(mesh, Parity::V, exponential_data);
  std::vector<int> degrees;
  for (int n = 0; n <= 12; ++n) degrees.push_back(n);
  const auto report = completeness_study(mesh, id, Parity::V, f, degrees, 1e-12, exponential_data);
  CHECK(report.exploratory);
  double f_rms = 0.0;
  double w_sum = 0.0;
  const auto nodes = boundary_nodes(mesh, Parity::V);
  for (std::size_t i = 0; i < nodes.points.size(); ++i) {
    f_rms += nodes.weights[i] * f.values[i] * f.values[i];
    w_sum += nodes.weights[i];
  }
  f_rms = std::sqrt(f_rms / w_sum);
  double worst_c = 0.0;
  for (std::size_t i = 0; i < degrees.size(); ++i) {
    // least squares can only do better than the truncated series
    CHECK(report.residuals[i] <= taylor_bound(mesh, degrees[i]) * (1 + 1e-9) + 1e-15);
    if (i > 0) {
      CHECK(report.residuals[i] <= report.residuals[i - 1] + 1e-12);
      CHECK(report.conditions[i] >= report.conditions[i - 1] * (1 - 1e-12));
    }
    worst_c = std::max(worst_c, report.interior_max_errors[i] / (report.residuals[i] * f_rms));
  }
  CHECK(taylor_bound(mesh, 12) < 1e-6);
  CHECK(report.residuals.back() < 1e-6);
  MESSAGE("interior max error / (residual * rms f), worst over N: " << worst_c);
  CHECK(worst_c <= 10.0);
}

TEST_CASE("non-caloric data |y1|: decay over even degrees") {
  const auto id = CoefficientMatrix::identity(2);
  const auto mesh = exponential_mesh();
  const auto f = BoundaryData::from_function(mesh, Parity::V, [](const SpaceTimePoint& p) { return std::abs(p.x[0]); });
  const auto all = completeness_study(mesh, id, Parity::V, f, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
  for (std::size_t i = 1; i < all.residuals.size(); ++i) CHECK(all.residuals[i] <= all.residuals[i - 1] + 1e-12);
  // the data is even in y1, so only even degrees add useful directions
  const auto even = completeness_study(mesh, id, Parity::V, f, {2, 4, 6, 8, 10});
  for (std::size_t i = 1; i < even.residuals.size(); ++i) CHECK(even.residuals[i] < even.residuals[i - 1]);
  CHECK(even.residuals.back() / even.residuals.front() < 0.5);
}

TEST_CASE("w study on the top cap mirrors the v study on time-reflected data") {
  const auto a = matrix_2x2_skew();
  const double T = 0.5;
  const auto mesh = build_mesh(CrossSection::disk(1.0), a, T, 64, 16, 16);
  auto data = [](const SpaceTimePoint& p) { return std::abs(p.x[0]) + std::sin(3 * p.t) + p.x[1] * p.t; };
  const auto fw = BoundaryData::from_function(mesh, Parity::W, data);
  const auto fv =
      BoundaryData::from_function(mesh, Parity::V, [&](const SpaceTimePoint& p) { return data({p.x, T - p.t}); });
  const std::vector<int> degrees{0, 2, 4, 6, 8, 10, 12};
  const auto rw = completeness_study(mesh, a, Parity::W, fw, degrees);
  const auto rv = completeness_study(mesh, a, Parity::V, fv, degrees);
  for (std::size_t i = 0; i < degrees.size(); ++i) CHECK(std::abs(rw.residuals[i] - rv.residuals[i]) < 1e-10);
}

TEST_CASE("cross validation on a finer mesh") {
  const auto id = CoefficientMatrix::identity(2);
  const auto coarse = build_mesh(CrossSection::disk(1.0), id, 0.5, 32, 8, 8);
  const auto fine = build_mesh(CrossSection::disk(1.0), id, 0.5, 64, 16, 16);
  const auto v31 = caloric_poly(id, mi({3, 1}), Parity::V);
  const auto poly = cross_validate(coarse, fine, id, Parity::V, 4, [&](const SpaceTimePoint& p) { return v31.evaluate(p); });
  CHECK(poly.coarse_residual < 1e-9);
  CHECK(poly.fine_residual < 1e-9);
  const auto expo = cross_validate(coarse, fine, id, Parity::V, 8, exponential_data);
  CHECK(expo.ratio < 2.0);
  CHECK_FALSE(expo.flagged);
  const auto zero = cross_validate(coarse, fine, id, Parity::V, 3, [](const SpaceTimePoint&) { return 0.0; });
  CHECK(zero.coarse_residual == 0.0);
  CHECK(zero.fine_residual == 0.0);
  CHECK_FALSE(zero.flagged);
}

TEST_CASE("three-dimensional study on an ellipsoid") {
  const auto a = matrix_full3();
  const auto mesh = build_mesh(CrossSection::ellipsoid(1.2, 1.0, 0.8), a, 0.5, 16, 6, 6);
  const auto v = caloric_poly(a, mi({1, 2, 1}), Parity::V);
  const auto f = BoundaryData::from_function(mesh, Parity::V, [&](const SpaceTimePoint& p) { return v.evaluate(p); });
  const auto report = completeness_study(mesh, a, Parity::V, f, {2, 4, 5}, 1e-12,
                                         [&](const SpaceTimePoint& p) { return v.evaluate(p); });
  CHECK_FALSE(report.exploratory);
  CHECK(report.residuals[0] > 1e-3);
  CHECK(report.residuals[1] < 1e-9);
  CHECK(report.residuals[2] < 1e-9);
  CHECK(report.interior_max_errors[1] < 1e-9);
  CHECK(report.ranks[2] == 56);
}

TEST_CASE("report serialization") {
  const auto id = CoefficientMatrix::identity(2);
  const auto mesh = build_mesh(CrossSection::disk(1.0), id, 0.5, 16, 4, 4);
  const auto f = BoundaryData::from_function(mesh, Parity::V, exponential_data);
  const auto report = completeness_study(mesh, id, Parity::V, f, {1, 3});
  std::ostringstream csv;
  report.write_csv(csv);
  const std::string text = csv.str();
  CHECK(text.rfind("degree,residual,rank,cond,interior_max_err,seconds\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
  const auto json = report.to_json();
  CHECK(json["rows"].size() == 2);
  CHECK(json["exploratory"] == true);
  const auto fit = solve_dirichlet(mesh, id, Parity::V, 2, f);
  const auto fj = fit.to_json();
  CHECK(fj["basis"].size() == 6);
  CHECK(fj["basis"][1]["alpha"] == nlohmann::json::array({1, 0}));
}
