#include "test_support.hpp"

#include <Eigen/Eigenvalues>

namespace calorix::testing {

TestRule golub_welsch(int n) {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = b;
    jacobi(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  TestRule r;
  for (int i = 0; i < n; ++i) {
    r.x.push_back(eig.eigenvalues()(i));
    const double v0 = eig.eigenvectors()(0, i);
    r.w.push_back(2.0 * v0 * v0);
  }
  return r;
}

double box_integral(const std::function<double(const Vec&)>& f, const Vec& lo, const Vec& hi, int panels, int order) {
  const int n = static_cast<int>(lo.size());
  const TestRule ref = golub_welsch(order);
  std::vector<std::vector<double>> xs(n), ws(n);
  for (int d = 0; d < n; ++d) {
    const double width = (hi[d] - lo[d]) / panels;
    for (int p = 0; p < panels; ++p) {
      const double a = lo[d] + p * width;
      for (int i = 0; i < order; ++i) {
        xs[d].push_back(a + 0.5 * width * (ref.x[i] + 1.0));
        ws[d].push_back(0.5 * width * ref.w[i]);
      }
    }
  }
  const std::size_t m = xs[0].size();
  std::size_t total = 1;
  for (int d = 0; d < n; ++d) total *= m;
  double sum = 0.0;
  Vec p(n);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    double w = 1.0;
    for (int d = 0; d < n; ++d) {
      const std::size_t i = rem % m;
      rem /= m;
      p[d] = xs[d][i];
      w *= ws[d][i];
    }
    sum += w * f(p);
  }
  return sum;
}

}  // namespace calorix::testing
