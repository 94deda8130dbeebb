#pragma once

#include <Eigen/Dense>

namespace calorix {

// Spatial vectors never exceed this dimension; fixed-capacity storage keeps
// the kernel loops free of heap traffic.
inline constexpr int kMaxDim = 8;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;

struct SpaceTimePoint {
  Vec x;
  double t = 0.0;
};

struct FrequencyVector {
  Vec xi;
};

}  // namespace calorix
