#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>
#include <cstddef>

#include "h2fed/kernels.hpp"

// AVX2/FMA variants, 4 doubles per lane group. Tails fall back to scalar
// loops. Compiled with -mavx2 -mfma for this translation unit only; the
// dispatcher guards entry with a cpuid check.
namespace h2fed::kernels::detail {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

double dot_v(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_v(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scal_v(double alpha, double* x, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) x[i] *= alpha;
}

double sq_dist_v(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double out = hsum(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    out += d * d;
  }
  return out;
}

double sum_v(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double out = hsum(acc);
  for (; i < n; ++i) out += x[i];
  return out;
}

void relu_v(double* x, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(x + i, _mm256_max_pd(zero, _mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) x[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward_v(const double* act, double* g, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(act + i), zero, _CMP_GT_OQ);
    _mm256_storeu_pd(g + i, _mm256_and_pd(mask, _mm256_loadu_pd(g + i)));
  }
  for (; i < n; ++i) {
    if (act[i] <= 0.0) g[i] = 0.0;
  }
}

bool all_finite_v(const double* x, std::size_t n) {
  // |x| < inf catches both NaN (unordered) and +-inf.
  const __m256d abs_mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  const __m256d inf = _mm256_set1_pd(HUGE_VAL);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_and_pd(abs_mask, _mm256_loadu_pd(x + i));
    __m256d bad = _mm256_cmp_pd(v, inf, _CMP_NLT_UQ);
    if (_mm256_movemask_pd(bad) != 0) return false;
  }
  for (; i < n; ++i) {
    if (!std::isfinite(x[i])) return false;
  }
  return true;
}

void gemv_t_v(const double* a, const double* x, double* y, std::size_t k,
              std::size_t n) {
  // Row-wise axpy keeps the inner loop contiguous over n.
  std::size_t i = 0;
  for (; i + 2 <= k; i += 2) {
    const __m256d x0 = _mm256_set1_pd(x[i]);
    const __m256d x1 = _mm256_set1_pd(x[i + 1]);
    const double* r0 = a + i * n;
    const double* r1 = r0 + n;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      __m256d vy = _mm256_loadu_pd(y + j);
      vy = _mm256_fmadd_pd(x0, _mm256_loadu_pd(r0 + j), vy);
      vy = _mm256_fmadd_pd(x1, _mm256_loadu_pd(r1 + j), vy);
      _mm256_storeu_pd(y + j, vy);
    }
    for (; j < n; ++j) y[j] += x[i] * r0[j] + x[i + 1] * r1[j];
  }
  for (; i < k; ++i) axpy_v(x[i], a + i * n, y, n);
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

const KernelTable avx2_table = {
    dot_v,          axpy_v,   scal_v,   sq_dist_v, sum_v,
    relu_v,         relu_backward_v,    all_finite_v,
    gemv_t_v,       gemv_n_v, ger_v,
};

}  // namespace h2fed::kernels::detail

#endif  // x86_64
