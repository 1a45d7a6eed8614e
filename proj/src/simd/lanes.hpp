#pragma once

#include <cmath>
#include <cstddef>

#include "saekit/kernels.hpp"

// Shared pieces of the lane-ordered reduction contract. Vector variants spill
// their accumulators into a double[kLanes] array and finish with these helpers
// so that tails and the final combine match the scalar reference exactly.
namespace saekit::simd::lanes {

inline double combine(const double* acc) {
  return ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7]));
}

inline void dot_f32_tail(const float* a, const float* b, std::size_t i, std::size_t n, double* acc) {
  for (std::size_t l = 0; i < n; ++i, ++l) acc[l] += double(a[i]) * double(b[i]);
}

inline void dot_f64_tail(const double* a, const double* b, std::size_t i, std::size_t n,
                         double* acc) {
  for (std::size_t l = 0; i < n; ++i, ++l) acc[l] += a[i] * b[i];
}

inline void dot_mixed_tail(const float* a, const double* b, std::size_t i, std::size_t n,
                           double* acc) {
  for (std::size_t l = 0; i < n; ++i, ++l) acc[l] += double(a[i]) * b[i];
}

inline void sq_dist_f32_tail(const float* a, const float* b, std::size_t i, std::size_t n,
                             double* acc) {
  for (std::size_t l = 0; i < n; ++i, ++l) {
    const double d = double(a[i]) - double(b[i]);
    acc[l] += d * d;
  }
}

inline void adam_one(const AdamCoefficients& c, float& p, double g, double& m, double& v) {
  m = c.beta1 * m + (1.0 - c.beta1) * g;
  v = c.beta2 * v + (1.0 - c.beta2) * (g * g);
  const double m_hat = m / c.bias_correction1;
  const double v_hat = v / c.bias_correction2;
  p = static_cast<float>(double(p) - c.lr * m_hat / (std::sqrt(v_hat) + c.eps));
}

}  // namespace saekit::simd::lanes
