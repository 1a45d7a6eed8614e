#include "lanes.hpp"

namespace saekit::simd {
namespace {

double dot_f32(const float* a, const float* b, std::size_t n) {
  double acc[kLanes] = {};
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes)
    for (std::size_t l = 0; l < kLanes; ++l) acc[l] += double(a[i + l]) * double(b[i + l]);
  lanes::dot_f32_tail(a, b, i, n, acc);
  return lanes::combine(acc);
}

double dot_f64(const double* a, const double* b, std::size_t n) {
  double acc[kLanes] = {};
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes)
    for (std::size_t l = 0; l < kLanes; ++l) acc[l] += a[i + l] * b[i + l];
  lanes::dot_f64_tail(a, b, i, n, acc);
  return lanes::combine(acc);
}

double dot_mixed(const float* a, const double* b, std::size_t n) {
  double acc[kLanes] = {};
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes)
    for (std::size_t l = 0; l < kLanes; ++l) acc[l] += double(a[i + l]) * b[i + l];
  lanes::dot_mixed_tail(a, b, i, n, acc);
  return lanes::combine(acc);
}

double sq_dist_f32(const float* a, const float* b, std::size_t n) {
  double acc[kLanes] = {};
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes)
    for (std::size_t l = 0; l < kLanes; ++l) {
      const double d = double(a[i + l]) - double(b[i + l]);
      acc[l] += d * d;
    }
  lanes::sq_dist_f32_tail(a, b, i, n, acc);
  return lanes::combine(acc);
}

void axpy_f32(double alpha, const float* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * double(x[i]);
}

void axpy_f64(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void adam_update(const AdamCoefficients& c, float* params, const double* grads, double* m,
                 double* v, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) lanes::adam_one(c, params[i], grads[i], m[i], v[i]);
}

constexpr KernelTable kTable{Isa::Scalar, dot_f32,  dot_f64,  dot_mixed,
                             sq_dist_f32, axpy_f32, axpy_f64, adam_update};

}  // namespace

const KernelTable& detail::scalar_table() noexcept { return kTable; }

}  // namespace saekit::simd
