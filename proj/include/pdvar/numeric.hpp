#pragma once

// Dense statistical kernels shared by the jurimetrics, conformal and FAIR modules.
// Everything here is templated on the Eigen expression so callers can pass
// vectors, segments or mapped buffers without copying.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "pdvar/error.hpp"

namespace pdvar {

// Empirical quantile of an ascending sample, linear interpolation between
// closest ranks: h = level * (n - 1), x[floor h] + frac(h) * (x[floor h + 1] - x[floor h]).
template <typename Derived>
typename Derived::Scalar sorted_quantile(const Eigen::DenseBase<Derived>& sorted, double level) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = sorted.size();
  if (n == 0) throw EmptySampleError("quantile of an empty sample");
  if (!(level >= 0.0 && level <= 1.0)) throw ValidationError("quantile level must lie in [0, 1]");
  const double h = level * static_cast<double>(n - 1);
  const auto lo = static_cast<Eigen::Index>(std::floor(h));
  if (lo >= n - 1) return sorted(n - 1);
  const Scalar frac = static_cast<Scalar>(h - static_cast<double>(lo));
  return sorted(lo) + frac * (sorted(lo + 1) - sorted(lo));
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> sorted_copy(
    const Eigen::DenseBase<Derived>& sample) {
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> out = sample.derived();
  std::sort(out.data(), out.data() + out.size());
  return out;
}

template <typename Derived>
typename Derived::Scalar quantile(const Eigen::DenseBase<Derived>& sample, double level) {
  return sorted_quantile(sorted_copy(sample), level);
}

// Sample mean and n-1 standard deviation in one pass (Welford).
template <typename Scalar>
struct MeanStd {
  Scalar mean{};
  Scalar stddev{};
  std::size_t n = 0;
};

template <typename Derived>
MeanStd<typename Derived::Scalar> mean_and_stddev(const Eigen::DenseBase<Derived>& sample) {
  using Scalar = typename Derived::Scalar;
  MeanStd<Scalar> out;
  Scalar m2{};
  for (Eigen::Index i = 0; i < sample.size(); ++i) {
    ++out.n;
    const Scalar delta = sample(i) - out.mean;
    out.mean += delta / static_cast<Scalar>(out.n);
    m2 += delta * (sample(i) - out.mean);
  }
  if (out.n >= 2) out.stddev = std::sqrt(std::max(Scalar{}, m2 / static_cast<Scalar>(out.n - 1)));
  return out;
}

template <typename Derived>
typename Derived::Scalar median(const Eigen::DenseBase<Derived>& sample) {
  return quantile(sample, 0.5);
}

}  // namespace pdvar
