#include <cmath>
#include <cstddef>

#include "h2fed/kernels.hpp"

// Reference implementations. Deliberately plain loops: these define the
// semantics the SIMD variants are tested against.
namespace h2fed::kernels::detail {
namespace {

double dot_s(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_s(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scal_s(double alpha, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

double sq_dist_s(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

double sum_s(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

void relu_s(double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward_s(const double* act, double* g, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (act[i] <= 0.0) g[i] = 0.0;
  }
}

bool all_finite_s(const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i])) return false;
  }
  return true;
}

void gemv_t_s(const double* a, const double* x, double* y, std::size_t k,
              std::size_t n) {
  for (std::size_t i = 0; i < k; ++i) {
    const double xi = x[i];
    const double* row = a + i * n;
    for (std::size_t j = 0; j < n; ++j) y[j] += xi * row[j];
  }
}

void gemv_n_s(const double* a, const double* x, double* y, std::size_t k,
              std::size_t n) {
  for (std::size_t i = 0; i < k; ++i) y[i] += dot_s(a + i * n, x, n);
}

void ger_s(double* a, const double* x, const double* y, std::size_t k,
           std::size_t n) {
  for (std::size_t i = 0; i < k; ++i) {
    const double xi = x[i];
    double* row = a + i * n;
    for (std::size_t j = 0; j < n; ++j) row[j] += xi * y[j];
  }
}

}  // namespace

const KernelTable scalar_table = {
    dot_s,          axpy_s,   scal_s,   sq_dist_s, sum_s,
    relu_s,         relu_backward_s,    all_finite_s,
    gemv_t_s,       gemv_n_s, ger_s,
};

}  // namespace h2fed::kernels::detail
