#include "lanes.hpp"

#if defined(__aarch64__) && !defined(SAEKIT_NO_SIMD)
#include <arm_neon.h>

namespace saekit::simd {
namespace {

// Four float64x2 accumulators cover lanes {0,1}, {2,3}, {4,5}, {6,7}.
struct Acc8 {
  float64x2_t q0 = vdupq_n_f64(0.0), q1 = vdupq_n_f64(0.0), q2 = vdupq_n_f64(0.0),
              q3 = vdupq_n_f64(0.0);

  void spill(double* acc) const {
    vst1q_f64(acc, q0);
    vst1q_f64(acc + 2, q1);
    vst1q_f64(acc + 4, q2);
    vst1q_f64(acc + 6, q3);
  }
};

double dot_f32(const float* a, const float* b, std::size_t n) {
  Acc8 s;
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const float32x4_t a0 = vld1q_f32(a + i), a1 = vld1q_f32(a + i + 4);
    const float32x4_t b0 = vld1q_f32(b + i), b1 = vld1q_f32(b + i + 4);
    s.q0 = vaddq_f64(s.q0, vmulq_f64(vcvt_f64_f32(vget_low_f32(a0)), vcvt_f64_f32(vget_low_f32(b0))));
    s.q1 = vaddq_f64(s.q1, vmulq_f64(vcvt_high_f64_f32(a0), vcvt_high_f64_f32(b0)));
    s.q2 = vaddq_f64(s.q2, vmulq_f64(vcvt_f64_f32(vget_low_f32(a1)), vcvt_f64_f32(vget_low_f32(b1))));
    s.q3 = vaddq_f64(s.q3, vmulq_f64(vcvt_high_f64_f32(a1), vcvt_high_f64_f32(b1)));
  }
  double acc[kLanes];
  s.spill(acc);
  lanes::dot_f32_tail(a, b, i, n, acc);
  return lanes::combine(acc);
}

double dot_f64(const double* a, const double* b, std::size_t n) {
  Acc8 s;
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    s.q0 = vaddq_f64(s.q0, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    s.q1 = vaddq_f64(s.q1, vmulq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2)));
    s.q2 = vaddq_f64(s.q2, vmulq_f64(vld1q_f64(a + i + 4), vld1q_f64(b + i + 4)));
    s.q3 = vaddq_f64(s.q3, vmulq_f64(vld1q_f64(a + i + 6), vld1q_f64(b + i + 6)));
  }
  double acc[kLanes];
  s.spill(acc);
  lanes::dot_f64_tail(a, b, i, n, acc);
  return lanes::combine(acc);
}

double dot_mixed(const float* a, const double* b, std::size_t n) {
  Acc8 s;
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const float32x4_t a0 = vld1q_f32(a + i), a1 = vld1q_f32(a + i + 4);
    s.q0 = vaddq_f64(s.q0, vmulq_f64(vcvt_f64_f32(vget_low_f32(a0)), vld1q_f64(b + i)));
    s.q1 = vaddq_f64(s.q1, vmulq_f64(vcvt_high_f64_f32(a0), vld1q_f64(b + i + 2)));
    s.q2 = vaddq_f64(s.q2, vmulq_f64(vcvt_f64_f32(vget_low_f32(a1)), vld1q_f64(b + i + 4)));
    s.q3 = vaddq_f64(s.q3, vmulq_f64(vcvt_high_f64_f32(a1), vld1q_f64(b + i + 6)));
  }
  double acc[kLanes];
  s.spill(acc);
  lanes::dot_mixed_tail(a, b, i, n, acc);
  return lanes::combine(acc);
}

double sq_dist_f32(const float* a, const float* b, std::size_t n) {
  Acc8 s;
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const float32x4_t a0 = vld1q_f32(a + i), a1 = vld1q_f32(a + i + 4);
    const float32x4_t b0 = vld1q_f32(b + i), b1 = vld1q_f32(b + i + 4);
    const float64x2_t d0 = vsubq_f64(vcvt_f64_f32(vget_low_f32(a0)), vcvt_f64_f32(vget_low_f32(b0)));
    const float64x2_t d1 = vsubq_f64(vcvt_high_f64_f32(a0), vcvt_high_f64_f32(b0));
    const float64x2_t d2 = vsubq_f64(vcvt_f64_f32(vget_low_f32(a1)), vcvt_f64_f32(vget_low_f32(b1)));
    const float64x2_t d3 = vsubq_f64(vcvt_high_f64_f32(a1), vcvt_high_f64_f32(b1));
    s.q0 = vaddq_f64(s.q0, vmulq_f64(d0, d0));
    s.q1 = vaddq_f64(s.q1, vmulq_f64(d1, d1));
    s.q2 = vaddq_f64(s.q2, vmulq_f64(d2, d2));
    s.q3 = vaddq_f64(s.q3, vmulq_f64(d3, d3));
  }
  double acc[kLanes];
  s.spill(acc);
  lanes::sq_dist_f32_tail(a, b, i, n, acc);
  return lanes::combine(acc);
}

void axpy_f32(double alpha, const float* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float32x4_t xv = vld1q_f32(x + i);
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vcvt_f64_f32(vget_low_f32(xv)))));
    vst1q_f64(y + i + 2, vaddq_f64(vld1q_f64(y + i + 2), vmulq_f64(va, vcvt_high_f64_f32(xv))));
  }
  for (; i < n; ++i) y[i] += alpha * double(x[i]);
}

void axpy_f64(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vld1q_f64(x + i))));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void adam_update(const AdamCoefficients& c, float* params, const double* grads, double* m,
                 double* v, std::size_t n) {
  const float64x2_t b1 = vdupq_n_f64(c.beta1), b2 = vdupq_n_f64(c.beta2);
  const float64x2_t one_b1 = vdupq_n_f64(1.0 - c.beta1), one_b2 = vdupq_n_f64(1.0 - c.beta2);
  const float64x2_t bc1 = vdupq_n_f64(c.bias_correction1), bc2 = vdupq_n_f64(c.bias_correction2);
  const float64x2_t lr = vdupq_n_f64(c.lr), eps = vdupq_n_f64(c.eps);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t g = vld1q_f64(grads + i);
    const float64x2_t mi = vaddq_f64(vmulq_f64(b1, vld1q_f64(m + i)), vmulq_f64(one_b1, g));
    const float64x2_t vi = vaddq_f64(vmulq_f64(b2, vld1q_f64(v + i)), vmulq_f64(one_b2, vmulq_f64(g, g)));
    vst1q_f64(m + i, mi);
    vst1q_f64(v + i, vi);
    const float64x2_t step = vdivq_f64(vmulq_f64(lr, vdivq_f64(mi, bc1)),
                                       vaddq_f64(vsqrtq_f64(vdivq_f64(vi, bc2)), eps));
    const float64x2_t p = vsubq_f64(vcvt_f64_f32(vld1_f32(params + i)), step);
    vst1_f32(params + i, vcvt_f32_f64(p));
  }
  for (; i < n; ++i) lanes::adam_one(c, params[i], grads[i], m[i], v[i]);
}

constexpr KernelTable kTable{Isa::Neon,   dot_f32,  dot_f64,  dot_mixed,
                             sq_dist_f32, axpy_f32, axpy_f64, adam_update};

}  // namespace

const KernelTable* detail::neon_table() noexcept { return &kTable; }

}  // namespace saekit::simd

#else

namespace saekit::simd {
const KernelTable* detail::neon_table() noexcept { return nullptr; }
}  // namespace saekit::simd

#endif
