#if defined(__aarch64__)

#include <arm_neon.h>

#include <cmath>
#include <cstddef>

#include "h2fed/kernels.hpp"

// NEON variants, 2 doubles per vector. aarch64 guarantees NEON, so no
// runtime feature check is needed beyond the architecture guard.
namespace h2fed::kernels::detail {
namespace {

double dot_v(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double acc = vaddvq_f64(acc0) + vaddvq_f64(acc1);
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_v(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scal_v(double alpha, double* x, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(x + i, vmulq_f64(va, vld1q_f64(x + i)));
  }
  for (; i < n; ++i) x[i] *= alpha;
}

double sq_dist_v(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    acc = vfmaq_f64(acc, d, d);
  }
  double out = vaddvq_f64(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    out += d * d;
  }
  return out;
}

double sum_v(const double* x, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vld1q_f64(x + i));
  double out = vaddvq_f64(acc);
  for (; i < n; ++i) out += x[i];
  return out;
}

void relu_v(double* x, std::size_t n) {
  const float64x2_t zero = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(x + i, vmaxq_f64(zero, vld1q_f64(x + i)));
  }
  for (; i < n; ++i) x[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward_v(const double* act, double* g, std::size_t n) {
  const float64x2_t zero = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    uint64x2_t mask = vcgtq_f64(vld1q_f64(act + i), zero);
    float64x2_t vg = vld1q_f64(g + i);
    vst1q_f64(g + i, vreinterpretq_f64_u64(
                         vandq_u64(mask, vreinterpretq_u64_f64(vg))));
  }
  for (; i < n; ++i) {
    if (act[i] <= 0.0) g[i] = 0.0;
  }
}

bool all_finite_v(const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i])) return false;
  }
  return true;
}

void gemv_t_v(const double* a, const double* x, double* y, std::size_t k,
              std::size_t n) {
  for (std::size_t i = 0; i < k; ++i) axpy_v(x[i], a + i * n, y, n);
}

void gemv_n_v(const double* a, const double* x, double* y, std::size_t k,
              std::size_t n) {
  for (std::size_t i = 0; i < k; ++i) y[i] += dot_v(a + i * n, x, n);
}

void ger_v(double* a, const double* x, const double* y, std::size_t k,
           std::size_t n) {
  for (std::size_t i = 0; i < k; ++i) axpy_v(x[i], y, a + i * n, n);
}

}  // namespace

const KernelTable neon_table = {
    dot_v,          axpy_v,   scal_v,   sq_dist_v, sum_v,
    relu_v,         relu_backward_v,    all_finite_v,
    gemv_t_v,       gemv_n_v, ger_v,
};

}  // namespace h2fed::kernels::detail

#endif  // __aarch64__
