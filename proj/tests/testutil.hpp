#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "hfrec/rng.hpp"
#include "hfrec/tensor.hpp"

namespace hfrec::testutil {

inline std::vector<float> random_vec(Rng& rng, int64_t n, float lo = -1.0f, float hi = 1.0f) {
  std::vector<float> v(static_cast<size_t>(n));
  for (auto& x : v) x = static_cast<float>(rng.uniform(lo, hi));
  return v;
}

inline Tensor random_tensor(Rng& rng, std::vector<int64_t> shape, float lo = -1.0f,
                            float hi = 1.0f) {
  auto data = random_vec(rng, shape_numel(shape), lo, hi);
  return Tensor::from_data(std::move(shape), std::move(data));
}

inline double max_abs_diff(const float* a, const float* b, int64_t n) {
  double m = 0.0;
  for (int64_t i = 0; i < n; ++i) m = std::max(m, std::abs(double(a[i]) - double(b[i])));
  return m;
}

inline double max_rel_diff(const float* a, const float* b, int64_t n, double floor = 1e-5) {
  double m = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    const double d = std::abs(double(a[i]) - double(b[i]));
    const double s = std::max({std::abs(double(a[i])), std::abs(double(b[i])), floor});
    m = std::max(m, d / s);
  }
  return m;
}

}  // namespace hfrec::testutil
