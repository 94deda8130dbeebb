#include "calorix/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <queue>
#include <utility>

#include "calorix/error.hpp"

namespace calorix {

namespace {

// Legendre P_n(x) and P_{n-1}(x) by the three-term recurrence (n >= 2).
std::pair<double, double> legendre_pair(int n, double x) {
  double p0 = 1.0;
  double p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return {p1, p0};
}

Rule1d compute_gauss_legendre(int n) {
  Rule1d r;
  r.nodes.resize(n);
  r.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [pn, pm] = legendre_pair(n, x);
      const double dx = pn / (n * (x * pn - pm) / (x * x - 1.0));
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const auto [pn, pm] = legendre_pair(n, x);
    const double dp = n * (x * pn - pm) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  return r;
}

}  // namespace

const Rule1d& gauss_legendre(int n) {
  if (n < 1) throw Error(ErrorCode::InvalidResolution, "Gauss-Legendre order must be >= 1");
  static std::mutex mu;
  static std::map<int, Rule1d> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) {
    Rule1d r;
    if (n == 1) {
      r.nodes = {0.0};
      r.weights = {2.0};
    } else {
      r = compute_gauss_legendre(n);
    }
    it = cache.emplace(n, std::move(r)).first;
  }
  return it->second;
}

Rule1d gauss_legendre(int n, double a, double b) {
  const Rule1d& ref = gauss_legendre(n);
  Rule1d r;
  r.nodes.resize(n);
  r.weights.resize(n);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  for (int i = 0; i < n; ++i) {
    r.nodes[i] = mid + half * ref.nodes[i];
    r.weights[i] = half * ref.weights[i];
  }
  return r;
}

Rule1d composite_gauss(const std::vector<double>& breakpoints, int order) {
  Rule1d r;
  if (breakpoints.size() < 2) return r;
  const Rule1d& ref = gauss_legendre(order);
  r.nodes.reserve((breakpoints.size() - 1) * order);
  r.weights.reserve((breakpoints.size() - 1) * order);
  for (std::size_t p = 0; p + 1 < breakpoints.size(); ++p) {
    const double a = breakpoints[p];
    const double b = breakpoints[p + 1];
    if (!(b > a)) continue;
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    for (int i = 0; i < order; ++i) {
      r.nodes.push_back(mid + half * ref.nodes[i]);
      r.weights.push_back(half * ref.weights[i]);
    }
  }
  return r;
}

Rule1d periodic_trapezoid(int m, double period, double offset) {
  if (m < 1) throw Error(ErrorCode::InvalidResolution, "trapezoid rule needs m >= 1");
  Rule1d r;
  r.nodes.resize(m);
  r.weights.assign(m, period / m);
  for (int i = 0; i < m; ++i) r.nodes[i] = offset + period * i / m;
  return r;
}

std::vector<double> graded_breakpoints(double lo, double hi, double center, double first, double max_width) {
  center = std::clamp(center, lo, hi);
  first = std::max(first, 1e-300);
  auto one_side = [&](double length) {
    std::vector<double> d{0.0};
    double width = std::min(first, max_width);
    double pos = 0.0;
    while (pos < length) {
      pos = std::min(length, pos + width);
      if (length - pos < 0.25 * width) pos = length;
      d.push_back(pos);
      width = std::min(2.0 * width, max_width);
    }
    return d;
  };
  std::vector<double> left = one_side(center - lo);
  std::vector<double> right = one_side(hi - center);
  std::vector<double> out;
  out.reserve(left.size() + right.size());
  for (auto it = left.rbegin(); it != left.rend(); ++it) out.push_back(center - *it);
  for (std::size_t i = 1; i < right.size(); ++i) out.push_back(center + right[i]);
  out.front() = lo;
  out.back() = hi;
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

template <int D>
double box_rule(const std::function<double(const std::array<double, D>&)>& f, const Box<D>& b, const Rule1d& ref) {
  const int q = static_cast<int>(ref.nodes.size());
  std::array<double, D> mid;
  std::array<double, D> half;
  for (int d = 0; d < D; ++d) {
    mid[d] = 0.5 * (b.lo[d] + b.hi[d]);
    half[d] = 0.5 * (b.hi[d] - b.lo[d]);
  }
  double sum = 0.0;
  std::array<int, D> idx{};
  std::array<double, D> p;
  int total = 1;
  for (int d = 0; d < D; ++d) total *= q;
  for (int flat = 0; flat < total; ++flat) {
    int rem = flat;
    double w = 1.0;
    for (int d = 0; d < D; ++d) {
      idx[d] = rem % q;
      rem /= q;
      p[d] = mid[d] + half[d] * ref.nodes[idx[d]];
      w *= half[d] * ref.weights[idx[d]];
    }
    sum += w * f(p);
  }
  return sum;
}

template <int D>
std::vector<Box<D>> split(const Box<D>& b) {
  std::vector<Box<D>> kids;
  kids.reserve(1 << D);
  for (int mask = 0; mask < (1 << D); ++mask) {
    Box<D> c;
    for (int d = 0; d < D; ++d) {
      const double m = 0.5 * (b.lo[d] + b.hi[d]);
      if (mask & (1 << d)) {
        c.lo[d] = m;
        c.hi[d] = b.hi[d];
      } else {
        c.lo[d] = b.lo[d];
        c.hi[d] = m;
      }
    }
    kids.push_back(c);
  }
  return kids;
}

template <int D>
struct Scored {
  Box<D> box;
  double value;
  double error;
  bool operator<(const Scored& o) const { return error < o.error; }
};

}  // namespace

template <int D>
double adaptive_cubature(const std::function<double(const std::array<double, D>&)>& f,
                         const std::vector<Box<D>>& initial, const AdaptiveOptions<D>& opts) {
  const Rule1d& ref = gauss_legendre(opts.order);
  auto score = [&](const Box<D>& b) {
    const double coarse = box_rule<D>(f, b, ref);
    double fine = 0.0;
    for (const auto& c : split<D>(b)) fine += box_rule<D>(f, c, ref);
    return Scored<D>{b, fine, std::abs(fine - coarse)};
  };
  std::priority_queue<Scored<D>> heap;
  double total_value = 0.0;
  double total_error = 0.0;
  for (const auto& b : initial) {
    auto s = score(b);
    total_value += s.value;
    total_error += s.error;
    heap.push(s);
  }
  int boxes = static_cast<int>(heap.size());
  while (total_error > opts.abs_tol && boxes < opts.max_boxes && !heap.empty()) {
    Scored<D> worst = heap.top();
    heap.pop();
    total_value -= worst.value;
    total_error -= worst.error;
    for (const auto& c : split<D>(worst.box)) {
      auto s = score(c);
      total_value += s.value;
      total_error += s.error;
      heap.push(s);
    }
    boxes += (1 << D) - 1;
  }
  // re-sum to shed the rounding accumulated by the running totals
  double sum = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    heap.pop();
  }
  return sum;
}

template double adaptive_cubature<1>(const std::function<double(const std::array<double, 1>&)>&,
                                     const std::vector<Box<1>>&, const AdaptiveOptions<1>&);
template double adaptive_cubature<2>(const std::function<double(const std::array<double, 2>&)>&,
                                     const std::vector<Box<2>>&, const AdaptiveOptions<2>&);
template double adaptive_cubature<3>(const std::function<double(const std::array<double, 3>&)>&,
                                     const std::vector<Box<3>>&, const AdaptiveOptions<3>&);

}  // namespace calorix
