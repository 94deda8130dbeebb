#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <sstream>

#include "calorix/error.hpp"
#include "calorix/kernels.hpp"
#include "calorix/parallel.hpp"
#include "calorix/potentials.hpp"
#include "test_support.hpp"

using namespace calorix;
using namespace calorix::testing;

namespace {

constexpr double kPi = std::numbers::pi;

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::TaskFailed;
}

// Tensor Gauss-Legendre over (theta, s) with the library kernels, for targets
// far enough from the boundary that the integrand is smooth.
double brute_lateral(const CrossSection& cs, double s_max, const std::function<double(const Vec&, const Vec&, double)>& f) {
  const TestRule r = golub_welsch(24);
  const int pt = 16;
  const int ps = 32;
  double sum = 0.0;
  for (int a = 0; a < pt; ++a) {
    for (int i = 0; i < 24; ++i) {
      const double th = 2 * kPi * (a + 0.5 * (r.x[i] + 1)) / pt;
      const double wt = kPi / pt * r.w[i];
      const Vec y = cs.curve(th);
      const Vec nu = cs.inward_normal_2d(th);
      const double jac = cs.curve_d1(th).norm();
      for (int b = 0; b < ps; ++b) {
        for (int j = 0; j < 24; ++j) {
          const double s = s_max * (b + 0.5 * (r.x[j] + 1)) / ps;
          sum += wt * jac * 0.5 * s_max / ps * r.w[j] * f(y, nu, s);
        }
      }
    }
  }
  return sum;
}

CaloricFunction exponential(const CoefficientMatrix& a, const Vec& xi, Sign sign) {
  return {[=](const SpaceTimePoint& p) { return caloric_exponential(a, p, {xi}, sign); },
          [=](const SpaceTimePoint& p) { return Vec(xi * caloric_exponential(a, p, {xi}, sign)); }};
}

}  // namespace

TEST_CASE("double and single layer against brute-force quadrature of the kernels") {
  const auto a = matrix_2x2_skew();
  const auto cs = CrossSection::ellipse(1.5, 1.0);
  const auto mesh = build_mesh(cs, a, 1.0, 64, 16, 8);
  auto density = [](const Vec& y, const Vec&, double s) { return 1.0 + 0.3 * y[0] * std::cos(2 * s) + 0.2 * s; };
  const auto phi = DensityField::from_function(mesh, Region::Lateral, density);
    for (const SpaceTimePoint& p : {SpaceTimePoint{vec({0.2, 0.1}), 0.6}, SpaceTimePoint{vec({2.3, 0.4}), 0.9},
                                  SpaceTimePoint{vec({0.0, -0.3}), 1.4}}) {
    const double s_max = std::min(p.t, 1.0);
    const double d = brute_lateral(cs, s_max, [&](const Vec& y, const Vec& nu, double s) {
      return density(y, nu, s) * conormal_kernel_source(a, p.x, y, nu, p.t - s);
    });
    const double sl = brute_lateral(cs, s_max, [&](const Vec& y, const Vec& nu, double s) {
      return density(y, nu, s) * fundamental_solution(a, p.x - y, p.t - s);
    });
    CHECK(std::abs(double_layer(mesh, a, phi, p) - d) < 1e-9 * std::max(1.0, std::abs(d)));
    CHECK(std::abs(single_layer(mesh, a, phi, p) - sl) < 1e-9 * std::max(1.0, std::abs(sl)));
    const Vec nu0 = vec({0.6, -0.8});
    const double cd = brute_lateral(cs, s_max, [&](const Vec& y, const Vec&, double s) {
      return density(y, nu0, s) * conormal_kernel_target(a, p.x, y, nu0, p.t - s);
    });
    CHECK(std::abs(conormal_derivative_single_layer(mesh, a, phi, p, nu0) - cd) < 1e-9 * std::max(1.0, std::abs(cd)));
  }
}

TEST_CASE("double layer of 1 near the boundary against the closed-form time integral") {
  // int_0^t tau^-2 exp(-q/(4 tau)) d tau = (4/q) exp(-q/(4t)) reduces D[1] to a
  // smooth periodic integral, summed here by a very fine trapezoid rule.
  const auto a = matrix_2x2_skew();
  const auto cs = CrossSection::disk(1.0);
  const auto mesh = build_mesh(cs, a, 2.0, 64, 16, 8);
  const auto one = DensityField::constant(mesh, Region::Lateral, 1.0);
  for (double d : {0.3, 0.05, 1e-3, -1e-3, -0.2}) {
    const SpaceTimePoint p{vec({(1.0 - d) * std::cos(0.4), (1.0 - d) * std::sin(0.4)}), 0.8};
    const int m = 200000;
    double sum = 0.0;
    for (int i = 0; i < m; ++i) {
      const double th = 2 * kPi * i / m;
      const Vec y = cs.curve(th);
      const Vec z = p.x - y;
      const double q = a.inverse_quadratic(z);
      sum += cs.inward_normal_2d(th).dot(z) / 2.0 * (4.0 / q) * std::exp(-q / (4.0 * p.t));
    }
    const double oracle = sum * 2 * kPi / m / (4.0 * kPi * a.sqrt_det());
    CHECK(std::abs(double_layer(mesh, a, one, p) - oracle) < 1e-10);
  }
}

TEST_CASE("causality and zero densities") {
  const auto a = matrix_2x2_skew();
  const auto mesh = build_mesh(CrossSection::disk(1.0), a, 1.0, 32, 8, 8);
  const auto one = DensityField::constant(mesh, Region::Lateral, 1.0);
  const auto zero = DensityField::constant(mesh, Region::Lateral, 0.0);
  const auto zero_cap = DensityField::constant(mesh, Region::Bottom, 0.0);
  CHECK(double_layer(mesh, a, one, {vec({0.2, 0}), 0.0}) == 0.0);
  CHECK(double_layer(mesh, a, one, {vec({0.2, 0}), -0.5}) == 0.0);
  CHECK(single_layer(mesh, a, one, {vec({0.2, 0}), 0.0}) == 0.0);
  CHECK(double_layer(mesh, a, zero, {vec({0.2, 0}), 0.5}) == 0.0);
  CHECK(single_layer(mesh, a, zero, {vec({0.2, 0}), 0.5}) == 0.0);
  CHECK(cap_potential(mesh, a, zero_cap, {vec({0.2, 0}), 0.5}) == 0.0);
  CHECK(double_layer_star(mesh, a, one, {vec({0.2, 0}), 1.0}) == 0.0);
  CHECK(double_layer_star(mesh, a, zero, {vec({0.2, 0}), 0.5}) == 0.0);
  CHECK(single_layer_star(mesh, a, zero, {vec({0.2, 0}), 0.5}) == 0.0);
}

TEST_CASE("cap potential: Gaussian mass of the unit disk and odd symmetry") {
  const auto id = CoefficientMatrix::identity(2);
  const auto mesh = build_mesh(CrossSection::disk(1.0), id, 1.0, 32, 8, 8);
  const auto one = DensityField::constant(mesh, Region::Bottom, 1.0);
  for (double t : {1e-3, 0.1, 1.0}) {
    // radial Gaussian mass inside radius 1
    CHECK(std::abs(cap_potential(mesh, id, one, {vec({0, 0}), t}) - (1.0 - std::exp(-1.0 / (4 * t)))) < 1e-10);
  }
  const auto a = matrix_2x2_skew();
  const auto mesh_a = build_mesh(CrossSection::disk(1.0), a, 1.0, 32, 8, 8);
  const auto odd = DensityField::from_function(mesh_a, Region::Bottom, [](const Vec& y, const Vec&, double) { return y[0]; });
  for (double t : {1e-3, 0.1, 1.0, 3.0}) {
    CHECK(std::abs(cap_potential(mesh_a, a, odd, {vec({0, 0}), t})) < 1e-12);
    CHECK(std::abs(cap_potential(mesh_a, a, odd.nodal(), {vec({0, 0}), t})) < 1e-12);
  }
}

TEST_CASE("initial limit of the cap potential") {
  const auto a = matrix_2x2_skew();
  const auto mesh = build_mesh(CrossSection::ellipse(2.0, 1.0), a, 1.0, 64, 8, 16);
  auto f = [](const Vec& y, const Vec&, double) { return std::cos(y[0]) * std::exp(0.3 * y[1]); };
  const auto phi = DensityField::from_function(mesh, Region::Bottom, f);
  for (const Vec& x : {vec({0.0, 0.0}), vec({1.2, -0.4}), vec({-0.5, 0.6})}) {
    double previous = 1e300;
    for (double t : {1e-1, 1e-2, 1e-3, 1e-4}) {
      const double err = std::abs(cap_potential(mesh, a, phi, {x, t}) - f(x, Vec(), 0));
      CHECK(err < previous);
      previous = err;
    }
    CHECK(previous < 1e-3);
  }
  // adjoint mirror: s -> T^- on the top cap
  const auto top = DensityField::from_function(mesh, Region::Top, f);
  CHECK(std::abs(cap_potential_star(mesh, a, top, {vec({0.3, 0.1}), 1.0 - 1e-4}) - f(vec({0.3, 0.1}), Vec(), 0)) <
        1e-3);
  CHECK(std::abs(cap_potential_star(mesh, a, DensityField::constant(mesh, Region::Top, 1.0), {vec({0.3, 0.1}), 1.0 - 1e-4}) -
                 1.0) < 1e-6);
}

TEST_CASE("nodal interpolation matches the generator for smooth densities") {
  const auto a = matrix_2x2_skew();
  const auto mesh = build_mesh(CrossSection::disk(1.0), a, 1.0, 32, 16, 16);
  auto g = [](const Vec& y, const Vec&, double s) { return std::exp(0.5 * y[0]) * std::cos(s) + y[1] * y[1]; };
  const auto phi = DensityField::from_function(mesh, Region::Lateral, g);
  const SpaceTimePoint p{vec({0.3, -0.4}), 0.7};
  CHECK(std::abs(double_layer(mesh, a, phi, p) - double_layer(mesh, a, phi.nodal(), p)) < 1e-10);
  CHECK(std::abs(single_layer(mesh, a, phi, p) - single_layer(mesh, a, phi.nodal(), p)) < 1e-10);
  const auto cap = DensityField::from_function(mesh, Region::Bottom, g);
  CHECK(std::abs(cap_potential(mesh, a, cap, p) - cap_potential(mesh, a, cap.nodal(), p)) < 1e-10);
}

TEST_CASE("time-reversal oracle for the adjoint potentials") {
  const auto a = matrix_2x2_skew();
  const auto mesh = build_mesh(CrossSection::ellipse(2.0, 1.0), a, 1.0, 48, 12, 12);
  const double T = mesh.final_time();
  auto g = [](const Vec& y, const Vec&, double s) { return 1.0 + 0.4 * y[1] * s + 0.1 * std::sin(3 * s + y[0]); };
  const auto phi = DensityField::from_function(mesh, Region::Lateral, g);
  const auto reflected = reflect_time(mesh, phi);
  const auto cap = DensityField::from_function(mesh, Region::Top, g);
  const auto cap_reflected = reflect_time(mesh, cap);
  CHECK(cap_reflected.region() == Region::Bottom);
  for (const SpaceTimePoint& p : {SpaceTimePoint{vec({0.4, 0.2}), 0.3}, SpaceTimePoint{vec({1.9, 0.0}), 0.8},
                                  SpaceTimePoint{vec({2.5, 1.0}), 0.5}}) {
    const SpaceTimePoint mirrored{p.x, T - p.t};
    CHECK(std::abs(double_layer_star(mesh, a, phi, p) - double_layer(mesh, a, reflected, mirrored)) < 1e-10);
    CHECK(std::abs(single_layer_star(mesh, a, phi, p) - single_layer(mesh, a, reflected, mirrored)) < 1e-10);
    CHECK(std::abs(double_layer_star(mesh, a, phi.nodal(), p) -
                   double_layer(mesh, a, reflect_time(mesh, phi.nodal()), mirrored)) < 1e-10);
    CHECK(std::abs(cap_potential_star(mesh, a, cap, p) - cap_potential(mesh, a, cap_reflected, mirrored)) < 1e-10);
  }
}

TEST_CASE("linearity in the density") {
  const auto a = matrix_2x2_skew();
  const auto mesh = build_mesh(CrossSection::disk(1.0), a, 1.0, 32, 8, 8);
  auto g = rng(5);
  const std::size_t count = mesh.lateral().size();
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<double> u(count), v(count), w(count);
    const double alpha = uniform(g, -2, 2);
    const double beta = uniform(g, -2, 2);
    for (std::size_t i = 0; i < count; ++i) {
      u[i] = uniform(g, -1, 1);
      v[i] = uniform(g, -1, 1);
      w[i] = alpha * u[i] + beta * v[i];
    }
    const auto fu = DensityField::sampled(mesh, Region::Lateral, u);
    const auto fv = DensityField::sampled(mesh, Region::Lateral, v);
    const auto fw = DensityField::sampled(mesh, Region::Lateral, w);
    const SpaceTimePoint p{vec({uniform(g, -0.6, 0.6), uniform(g, -0.6, 0.6)}), uniform(g, 0.1, 1.0)};
    const double lhs = double_layer(mesh, a, fw, p);
    const double rhs = alpha * double_layer(mesh, a, fu, p) + beta * double_layer(mesh, a, fv, p);
    CHECK(std::abs(lhs - rhs) < 1e-13 * (1.0 + std::abs(lhs)));
    const double sl = single_layer(mesh, a, fw, p);
    CHECK(std::abs(sl - alpha * single_layer(mesh, a, fu, p) - beta * single_layer(mesh, a, fv, p)) <
          1e-13 * (1.0 + std::abs(sl)));
  }
}

TEST_CASE("conormal derivative equals the finite-difference derivative of the single layer") {
  const auto a = matrix_2x2_skew();
  const auto mesh = build_mesh(CrossSection::disk(1.0), a, 1.0, 64, 16, 8);
  const auto phi = DensityField::from_function(mesh, Region::Lateral,
                                               [](const Vec& y, const Vec&, double s) { return 1.0 + y[0] * s; });
  const Vec nu0 = vec({-0.6, -0.8});
  const Vec dir = a.entries() * nu0;
  for (const SpaceTimePoint& p : {SpaceTimePoint{vec({0.3, 0.5}), 0.5}, SpaceTimePoint{vec({1.4, 0.2}), 0.7}}) {
    const double fd = fd_first(
        [&](double h) {
          return single_layer(mesh, a, phi, {p.x + h * dir, p.t});
        },
        0.0, 1e-3);
    const double cd = conormal_derivative_single_layer(mesh, a, phi, p, nu0);
    CHECK(std::abs(cd - fd) < 1e-6 * std::abs(fd));
  }
}

TEST_CASE("partition identity examples") {
  const auto a = matrix_2x2_skew();
  const auto mesh = build_mesh(CrossSection::disk(1.0), a, 1.0, 64, 16, 16);
  CHECK(std::abs(partition_identity(mesh, a, {vec({0, 0}), 0.5}) - 1.0) < 1e-6);
  CHECK(std::abs(partition_identity(mesh, a, {vec({3, 0}), 0.5})) < 1e-6);
  CHECK(std::abs(partition_identity(mesh, a, {vec({0.1, 0.2}), 1.4})) < 1e-6);
  CHECK(std::abs(partition_identity_star(mesh, a, {vec({0.1, 0.2}), 0.3}) - 1.0) < 1e-6);
  CHECK(std::abs(partition_identity_star(mesh, a, {vec({0.1, 0.2}), -0.3})) < 1e-6);
  CHECK(std::abs(partition_identity_star(mesh, a, {vec({1.8, 0.2}), 0.3})) < 1e-6);
  CHECK(code_of([&] { partition_identity(mesh, a, {vec({1, 0}), 0.5}); }) == ErrorCode::TargetOnBoundary);
  // record-only: values on the two sides of the lateral boundary
  MESSAGE("partition identity just inside/outside: " << partition_identity(mesh, a, {vec({1 - 1e-4, 0}), 0.5})
                                                      << " / " << partition_identity(mesh, a, {vec({1 + 1e-4, 0}), 0.5}));
}

TEST_CASE("3d partition identity on an ellipsoid") {
  const auto a = matrix_full3();
  const auto mesh = build_mesh(CrossSection::ellipsoid(1.2, 1.0, 0.8), a, 1.0, 32, 12, 8);
  CHECK(std::abs(partition_identity(mesh, a, {vec({0, 0, 0}), 0.5}) - 1.0) < 1e-6);
  CHECK(std::abs(partition_identity(mesh, a, {vec({0.5, 0.3, 0.1}), 0.3}) - 1.0) < 1e-6);
  CHECK(std::abs(partition_identity(mesh, a, {vec({1.5, 0.0, 0.0}), 0.5})) < 1e-6);
}

TEST_CASE("elliptic Gauss identity") {
  const auto a3 = matrix_full3();
  for (const auto& cs : {CrossSection::ball(1.0), CrossSection::ellipsoid(1.5, 1.0, 0.75)}) {
    for (const auto& a : {CoefficientMatrix::identity(3), a3}) {
      CHECK(std::abs(elliptic_gauss_identity(cs, a, vec({0, 0, 0})) - 1.0) < 1e-6);
      CHECK(std::abs(elliptic_gauss_identity(cs, a, vec({2, 0, 0}))) < 1e-6);
      const Vec on = cs.surface_point(vec({0.6, 0.48, 0.64}));
      CHECK(std::abs(elliptic_gauss_identity(cs, a, on) - 0.5) < 1e-3);
    }
  }
  CHECK(code_of([] { elliptic_gauss_identity(CrossSection::disk(1.0), CoefficientMatrix::identity(2), vec({0, 0})); }) ==
        ErrorCode::DimensionTooSmall);
}

TEST_CASE("jump probe examples") {
  const auto a = matrix_2x2_skew();
  const auto mesh = build_mesh(CrossSection::disk(1.0), a, 1.0, 64, 16, 8);
  const std::size_t node = 8 * 64 + 3;  // time node 8 of 16 lies mid-interval
  const auto zero = DensityField::constant(mesh, Region::Lateral, 0.0);
  const auto one = DensityField::constant(mesh, Region::Lateral, 1.0);
  CHECK(jump_probe(mesh, a, zero, node, JumpKind::DoubleLayer).jump == 0.0);
  const auto r1 = jump_probe(mesh, a, one, node, JumpKind::DoubleLayer);
  CHECK(std::abs(r1.jump - 1.0) < 1e-3);
  CHECK(r1.offsets.size() >= 8);
  for (std::size_t k = 1; k < r1.offsets.size(); ++k) CHECK(r1.offsets[k] < r1.offsets[k - 1]);
  const double T = mesh.final_time();
  const auto example = DensityField::from_function(mesh, Region::Lateral, [T](const Vec& y, const Vec&, double s) {
    return std::cos(std::atan2(y[1], y[0])) * s * (T - s);
  });
  for (JumpKind kind : {JumpKind::DoubleLayer, JumpKind::ConormalSingleLayer}) {
    const auto r = jump_probe(mesh, a, example, node, kind);
    const double phi = std::cos(mesh.angle_nodes()[3]) * mesh.lateral()[node].s * (T - mesh.lateral()[node].s);
    CHECK(r.predicted == doctest::Approx(kind == JumpKind::DoubleLayer ? phi : -phi).epsilon(1e-12));
    CHECK(r.relative_error < 1e-2);
  }
  CHECK(code_of([&] { jump_probe(mesh, a, one, 3, JumpKind::DoubleLayer); }) == ErrorCode::CornerTooClose);
  std::ostringstream csv;
  r1.write_csv(csv);
  const std::string text = csv.str();
  CHECK(text.rfind("node,h,interior,exterior,extrapolated,predicted,error\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 9 + 1);
}

TEST_CASE("Stokes reconstruction examples") {
  const auto id = CoefficientMatrix::identity(2);
  const auto mesh = build_mesh(CrossSection::disk(1.0), id, 0.5, 64, 16, 16);
  const Vec xi = vec({0.3, 0.4});
  const auto u = exponential(id, xi, Sign::Plus);
  const auto w = exponential(id, xi, Sign::Minus);
  const auto interior = stokes_check(mesh, id, u, {vec({0.2, -0.1}), 0.25}, Operator::H);
  CHECK(interior.where == Location::Interior);
  CHECK(interior.discrepancy < 1e-6);
  CHECK(stokes_check(mesh, id, u, {vec({1.6, 0.3}), 0.25}, Operator::H).discrepancy < 1e-6);
  CHECK(stokes_check(mesh, id, w, {vec({0.2, -0.1}), 0.25}, Operator::HStar).discrepancy < 1e-6);
  CHECK(stokes_check(mesh, id, w, {vec({0.2, -0.1}), -0.2}, Operator::HStar).discrepancy < 1e-6);
  const CaloricFunction one{[](const SpaceTimePoint&) { return 1.0; }, [](const SpaceTimePoint&) { return Vec(Vec::Zero(2)); }};
  const SpaceTimePoint p{vec({0.4, 0.3}), 0.3};
  CHECK(std::abs(stokes_check(mesh, id, one, p, Operator::H).reconstruction - partition_identity(mesh, id, p)) < 1e-14);
}

TEST_CASE("input validation") {
  const auto a = matrix_2x2_skew();
  const auto mesh = build_mesh(CrossSection::disk(1.0), a, 1.0, 16, 4, 4);
  const auto other = build_mesh(CrossSection::disk(1.0), a, 1.0, 32, 4, 4);
  const auto cap = DensityField::constant(mesh, Region::Bottom, 1.0);
  const auto lateral_other = DensityField::constant(other, Region::Lateral, 1.0);
  CHECK(code_of([&] { double_layer(mesh, a, cap, {vec({0, 0}), 0.5}); }) == ErrorCode::RegionMismatch);
  CHECK(code_of([&] { double_layer(mesh, a, lateral_other, {vec({0, 0}), 0.5}); }) == ErrorCode::RegionMismatch);
  CHECK(code_of([&] { DensityField::sampled(mesh, Region::Lateral, {1.0, 2.0}); }) == ErrorCode::DimensionMismatch);
  CHECK(code_of([&] { double_layer(mesh, matrix_full3(), DensityField::constant(mesh, Region::Lateral, 1.0), {vec({0, 0}), 0.5}); }) ==
        ErrorCode::DimensionMismatch);
}

TEST_CASE("parallel evaluation agrees with serial evaluation") {
  const auto a = matrix_2x2_skew();
  const auto mesh = build_mesh(CrossSection::disk(1.0), a, 1.0, 32, 8, 8);
  std::vector<SpaceTimePoint> targets;
  for (int i = 0; i < 12; ++i) targets.push_back({vec({0.07 * i - 0.4, 0.05 * i}), 0.1 + 0.07 * i});
  std::vector<double> serial(targets.size()), threaded(targets.size());
  parallel_for(targets.size(), [&](std::size_t i) { serial[i] = partition_identity(mesh, a, targets[i]); }, 1);
  parallel_for(targets.size(), [&](std::size_t i) { threaded[i] = partition_identity(mesh, a, targets[i]); }, 4);
  CHECK(serial == threaded);
  CHECK(code_of([&] {
          parallel_for(4, [](std::size_t i) {
            if (i == 2) throw Error(ErrorCode::InvalidArgument, "boom");
          }, 3);
        }) == ErrorCode::InvalidArgument);
}
