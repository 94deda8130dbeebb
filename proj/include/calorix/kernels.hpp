#pragma once

#include "calorix/coefficient_matrix.hpp"
#include "calorix/linalg.hpp"

namespace calorix {

enum class Sign { Plus, Minus };

// Exponents below this value are flushed to zero instead of underflowing.
inline constexpr double kUnderflowExponent = -700.0;

/// Surface area of the unit (n-1)-sphere, 2 pi^{n/2} / Gamma(n/2).
double unit_sphere_area(int n);

/// Gamma at integers and half-integers (x = k/2, k >= 1).
double gamma_half_integer(double x);

/// Fundamental solution of H = E - d_t:
///   G(z, tau) = (4 pi tau)^{-n/2} |A|^{-1/2} exp(-<A^{-1} z, z> / (4 tau))  for tau > 0,
/// and exactly 0 for tau <= 0.
double fundamental_solution(const CoefficientMatrix& a, const Vec& z, double tau);

/// Conormal derivative of G(x - y, tau) in the source point y along (A nu_y, 0):
///   <nu_y, x - y> / (2 tau) * G(x - y, tau).
double conormal_kernel_source(const CoefficientMatrix& a, const Vec& x, const Vec& y, const Vec& nu_y,
                              double tau);

/// Conormal derivative of G(x - y, tau) in the field point x along (A nu_x, 0):
///   -<nu_x, x - y> / (2 tau) * G(x - y, tau).
double conormal_kernel_target(const CoefficientMatrix& a, const Vec& x, const Vec& y, const Vec& nu_x,
                              double tau);

/// exp(<x, xi> +/- t <A xi, xi>). Sign::Plus solves H u = 0, Sign::Minus solves H* u = 0.
double caloric_exponential(const CoefficientMatrix& a, const SpaceTimePoint& p, const FrequencyVector& xi,
                           Sign sign);

/// Fundamental solution of E (n >= 3):
///   s(x, y) = <A^{-1}(x-y), (x-y)>^{(2-n)/2} / ((2-n) omega_n |A|^{1/2}).
double elliptic_fundamental(const CoefficientMatrix& a, const Vec& x, const Vec& y);

/// d s(x, y) / d nu_bar_y = -<nu_y, x-y> / (omega_n |A|^{1/2} <A^{-1}(x-y),(x-y)>^{n/2}).
double elliptic_conormal_kernel(const CoefficientMatrix& a, const Vec& x, const Vec& y, const Vec& nu_y);

}  // namespace calorix
