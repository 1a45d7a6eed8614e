#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Data-parallel inner loops shared by every trainer and metric.
//
// Each kernel has a scalar reference and optional AVX2 / NEON variants chosen
// at runtime. Reductions accumulate in float64 across kLanes interleaved
// partial sums (lane l owns elements i with i % kLanes == l) and combine them
// in a fixed tree, so every variant returns bit-identical results to the
// scalar reference. Training runs are therefore reproducible independent of
// the host ISA.
namespace saekit::simd {

inline constexpr std::size_t kLanes = 8;

enum class Isa { Scalar, Avx2, Neon };

std::string_view to_string(Isa isa) noexcept;

struct AdamCoefficients {
  double lr;
  double beta1;
  double beta2;
  double eps;
  double bias_correction1;  // 1 - beta1^t
  double bias_correction2;  // 1 - beta2^t
};

struct KernelTable {
  Isa isa;
  // sum_i a[i] * b[i]
  double (*dot_f32)(const float* a, const float* b, std::size_t n);
  double (*dot_f64)(const double* a, const double* b, std::size_t n);
  double (*dot_mixed)(const float* a, const double* b, std::size_t n);
  // sum_i (a[i] - b[i])^2
  double (*sq_dist_f32)(const float* a, const float* b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy_f32)(double alpha, const float* x, double* y, std::size_t n);
  void (*axpy_f64)(double alpha, const double* x, double* y, std::size_t n);
  // One bias-corrected Adam update over n parameters; m and v are updated in place.
  void (*adam_update)(const AdamCoefficients& c, float* params, const double* grads, double* m,
                      double* v, std::size_t n);
};

bool isa_available(Isa isa) noexcept;
Isa best_available_isa() noexcept;

// Throws saekit::Error(InvalidInput) when the ISA is not available on this host/build.
const KernelTable& kernels_for(Isa isa);

// Active table; defaults to best_available_isa().
const KernelTable& kernels() noexcept;
void select_isa(Isa isa);

inline double dot(std::span<const float> a, std::span<const float> b) {
  return kernels().dot_f32(a.data(), b.data(), a.size());
}
inline double dot(std::span<const double> a, std::span<const double> b) {
  return kernels().dot_f64(a.data(), b.data(), a.size());
}
inline double dot(std::span<const float> a, std::span<const double> b) {
  return kernels().dot_mixed(a.data(), b.data(), a.size());
}
inline double sq_dist(std::span<const float> a, std::span<const float> b) {
  return kernels().sq_dist_f32(a.data(), b.data(), a.size());
}
inline void axpy(double alpha, std::span<const float> x, std::span<double> y) {
  kernels().axpy_f32(alpha, x.data(), y.data(), x.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  kernels().axpy_f64(alpha, x.data(), y.data(), x.size());
}

namespace detail {
const KernelTable& scalar_table() noexcept;
const KernelTable* avx2_table() noexcept;
const KernelTable* neon_table() noexcept;
}  // namespace detail

}  // namespace saekit::simd
