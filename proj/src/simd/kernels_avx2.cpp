#include "lanes.hpp"

#if (defined(__x86_64__) || defined(_M_X64)) && !defined(SAEKIT_NO_SIMD)
#include <immintrin.h>

namespace saekit::simd {
namespace {

inline __m256d load4_f32(const float* p) { return _mm256_cvtps_pd(_mm_loadu_ps(p)); }

double dot_f32(const float* a, const float* b, std::size_t n) {
  __m256d lo = _mm256_setzero_pd();
  __m256d hi = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    lo = _mm256_add_pd(lo, _mm256_mul_pd(load4_f32(a + i), load4_f32(b + i)));
    hi = _mm256_add_pd(hi, _mm256_mul_pd(load4_f32(a + i + 4), load4_f32(b + i + 4)));
  }
  alignas(32) double acc[kLanes];
  _mm256_store_pd(acc, lo);
  _mm256_store_pd(acc + 4, hi);
  lanes::dot_f32_tail(a, b, i, n, acc);
  return lanes::combine(acc);
}

double dot_f64(const double* a, const double* b, std::size_t n) {
  __m256d lo = _mm256_setzero_pd();
  __m256d hi = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    lo = _mm256_add_pd(lo, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    hi = _mm256_add_pd(hi, _mm256_mul_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4)));
  }
  alignas(32) double acc[kLanes];
  _mm256_store_pd(acc, lo);
  _mm256_store_pd(acc + 4, hi);
  lanes::dot_f64_tail(a, b, i, n, acc);
  return lanes::combine(acc);
}

double dot_mixed(const float* a, const double* b, std::size_t n) {
  __m256d lo = _mm256_setzero_pd();
  __m256d hi = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    lo = _mm256_add_pd(lo, _mm256_mul_pd(load4_f32(a + i), _mm256_loadu_pd(b + i)));
    hi = _mm256_add_pd(hi, _mm256_mul_pd(load4_f32(a + i + 4), _mm256_loadu_pd(b + i + 4)));
  }
  alignas(32) double acc[kLanes];
  _mm256_store_pd(acc, lo);
  _mm256_store_pd(acc + 4, hi);
  lanes::dot_mixed_tail(a, b, i, n, acc);
  return lanes::combine(acc);
}

double sq_dist_f32(const float* a, const float* b, std::size_t n) {
  __m256d lo = _mm256_setzero_pd();
  __m256d hi = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d dl = _mm256_sub_pd(load4_f32(a + i), load4_f32(b + i));
    const __m256d dh = _mm256_sub_pd(load4_f32(a + i + 4), load4_f32(b + i + 4));
    lo = _mm256_add_pd(lo, _mm256_mul_pd(dl, dl));
    hi = _mm256_add_pd(hi, _mm256_mul_pd(dh, dh));
  }
  alignas(32) double acc[kLanes];
  _mm256_store_pd(acc, lo);
  _mm256_store_pd(acc + 4, hi);
  lanes::sq_dist_f32_tail(a, b, i, n, acc);
  return lanes::combine(acc);
}

void axpy_f32(double alpha, const float* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_mul_pd(va, load4_f32(x + i))));
  for (; i < n; ++i) y[i] += alpha * double(x[i]);
}

void axpy_f64(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i,
                     _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_mul_pd(va, _mm256_loadu_pd(x + i))));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void adam_update(const AdamCoefficients& c, float* params, const double* grads, double* m,
                 double* v, std::size_t n) {
  const __m256d b1 = _mm256_set1_pd(c.beta1);
  const __m256d b2 = _mm256_set1_pd(c.beta2);
  const __m256d one_b1 = _mm256_set1_pd(1.0 - c.beta1);
  const __m256d one_b2 = _mm256_set1_pd(1.0 - c.beta2);
  const __m256d bc1 = _mm256_set1_pd(c.bias_correction1);
  const __m256d bc2 = _mm256_set1_pd(c.bias_correction2);
  const __m256d lr = _mm256_set1_pd(c.lr);
  const __m256d eps = _mm256_set1_pd(c.eps);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d g = _mm256_loadu_pd(grads + i);
    const __m256d mi = _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + i)), _mm256_mul_pd(one_b1, g));
    const __m256d vi =
        _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v + i)), _mm256_mul_pd(one_b2, _mm256_mul_pd(g, g)));
    _mm256_storeu_pd(m + i, mi);
    _mm256_storeu_pd(v + i, vi);
    const __m256d m_hat = _mm256_div_pd(mi, bc1);
    const __m256d v_hat = _mm256_div_pd(vi, bc2);
    const __m256d step = _mm256_div_pd(_mm256_mul_pd(lr, m_hat), _mm256_add_pd(_mm256_sqrt_pd(v_hat), eps));
    const __m256d p = _mm256_sub_pd(load4_f32(params + i), step);
    _mm_storeu_ps(params + i, _mm256_cvtpd_ps(p));
  }
  for (; i < n; ++i) lanes::adam_one(c, params[i], grads[i], m[i], v[i]);
}

constexpr KernelTable kTable{Isa::Avx2,   dot_f32,  dot_f64,  dot_mixed,
                             sq_dist_f32, axpy_f32, axpy_f64, adam_update};

}  // namespace

const KernelTable* detail::avx2_table() noexcept {
  return __builtin_cpu_supports("avx2") ? &kTable : nullptr;
}

}  // namespace saekit::simd

#else

namespace saekit::simd {
const KernelTable* detail::avx2_table() noexcept { return nullptr; }
}  // namespace saekit::simd

#endif
