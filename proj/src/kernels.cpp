#include "calorix/kernels.hpp"

#include <cmath>
#include <numbers>

#include "calorix/error.hpp"

namespace calorix {

double gamma_half_integer(double x) {
  const double twice = 2.0 * x;
  const long k2 = std::lround(twice);
  if (k2 < 1 || std::abs(twice - static_cast<double>(k2)) > 1e-12) {
    throw Error(ErrorCode::InvalidArgument, "gamma_half_integer needs a positive multiple of 1/2");
  }
  double g;
  double start;
  if (k2 % 2 == 0) {
    g = 1.0;  // Gamma(1)
    start = 1.0;
  } else {
    g = std::sqrt(std::numbers::pi);  // Gamma(1/2)
    start = 0.5;
  }
  for (double z = start; z < x - 0.25; z += 1.0) g *= z;
  return g;
}

double unit_sphere_area(int n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "sphere dimension must be positive");
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / gamma_half_integer(0.5 * n);
}

double fundamental_solution(const CoefficientMatrix& a, const Vec& z, double tau) {
  if (!(tau > 0.0)) return 0.0;
  const int n = a.dim();
  const double exponent = -a.inverse_quadratic(z) / (4.0 * tau);
  if (exponent < kUnderflowExponent) return 0.0;
  return std::exp(exponent) / (std::pow(4.0 * std::numbers::pi * tau, 0.5 * n) * a.sqrt_det());
}

double conormal_kernel_source(const CoefficientMatrix& a, const Vec& x, const Vec& y, const Vec& nu_y,
                              double tau) {
  if (!(tau > 0.0)) return 0.0;
  const Vec z = x - y;
  return nu_y.dot(z) / (2.0 * tau) * fundamental_solution(a, z, tau);
}

double conormal_kernel_target(const CoefficientMatrix& a, const Vec& x, const Vec& y, const Vec& nu_x,
                              double tau) {
  if (!(tau > 0.0)) return 0.0;
  const Vec z = x - y;
  return -nu_x.dot(z) / (2.0 * tau) * fundamental_solution(a, z, tau);
}

double caloric_exponential(const CoefficientMatrix& a, const SpaceTimePoint& p, const FrequencyVector& xi,
                           Sign sign) {
  const double drift = a.quadratic(xi.xi);
  const double s = sign == Sign::Plus ? 1.0 : -1.0;
  return std::exp(p.x.dot(xi.xi) + s * p.t * drift);
}

double elliptic_fundamental(const CoefficientMatrix& a, const Vec& x, const Vec& y) {
  const int n = a.dim();
  if (n < 3) throw Error(ErrorCode::DimensionTooSmall, "elliptic fundamental solution needs n >= 3");
  const Vec z = x - y;
  const double q = a.inverse_quadratic(z);
  return std::pow(q, 0.5 * (2 - n)) / ((2.0 - n) * unit_sphere_area(n) * a.sqrt_det());
}

double elliptic_conormal_kernel(const CoefficientMatrix& a, const Vec& x, const Vec& y, const Vec& nu_y) {
  const int n = a.dim();
  if (n < 3) throw Error(ErrorCode::DimensionTooSmall, "elliptic conormal kernel needs n >= 3");
  const Vec z = x - y;
  const double q = a.inverse_quadratic(z);
  return -nu_y.dot(z) / (unit_sphere_area(n) * a.sqrt_det() * std::pow(q, 0.5 * n));
}

}  // namespace calorix
