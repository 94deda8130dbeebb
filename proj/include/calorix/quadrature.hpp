#pragma once

#include <array>
#include <functional>
#include <vector>

namespace calorix {

struct Rule1d {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1]. Cached; safe to call concurrently.
const Rule1d& gauss_legendre(int n);

/// Gauss-Legendre rule mapped to [a, b].
Rule1d gauss_legendre(int n, double a, double b);

/// Composite Gauss-Legendre over consecutive breakpoints.
Rule1d composite_gauss(const std::vector<double>& breakpoints, int order);

/// Periodic trapezoid rule with m equispaced nodes on [offset, offset + period).
Rule1d periodic_trapezoid(int m, double period, double offset = 0.0);

/// Breakpoints on [lo, hi] refined geometrically toward `center`: the panel
/// touching `center` has width `first`, each next panel doubles, and no panel
/// exceeds `max_width`.
std::vector<double> graded_breakpoints(double lo, double hi, double center, double first, double max_width);

/// Adaptive tensor Gauss-Legendre cubature on boxes of dimension D (1..3).
/// A box is accepted when its value agrees with the sum over its 2^D
/// children to within abs_tol scaled by the box's share of the volume.
template <int D>
struct Box {
  std::array<double, D> lo;
  std::array<double, D> hi;
};

template <int D>
struct AdaptiveOptions {
  int order = 6;
  double abs_tol = 1e-13;
  int max_boxes = 200000;
};

template <int D>
double adaptive_cubature(const std::function<double(const std::array<double, D>&)>& f,
                         const std::vector<Box<D>>& initial, const AdaptiveOptions<D>& opts);

}  // namespace calorix
