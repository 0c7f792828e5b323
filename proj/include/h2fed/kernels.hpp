#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

// Data-parallel primitives behind every training and aggregation loop.
// A scalar reference implementation always exists; AVX2 (x86) and NEON
// (aarch64) variants are selected at runtime and must agree with the
// reference up to floating-point reassociation.
namespace h2fed::kernels {

enum class Backend { Scalar, Avx2, Neon };

struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  void (*scal)(double alpha, double* x, std::size_t n);
  double (*sq_dist)(const double* a, const double* b, std::size_t n);
  double (*sum)(const double* x, std::size_t n);
  void (*relu)(double* x, std::size_t n);
  // g[i] := act[i] > 0 ? g[i] : 0
  void (*relu_backward)(const double* act, double* g, std::size_t n);
  bool (*all_finite)(const double* x, std::size_t n);
  // A is row-major k x n.
  void (*gemv_t)(const double* a, const double* x, double* y, std::size_t k,
                 std::size_t n);  // y += A^T x
  void (*gemv_n)(const double* a, const double* x, double* y, std::size_t k,
                 std::size_t n);  // y += A x
  void (*ger)(double* a, const double* x, const double* y, std::size_t k,
              std::size_t n);  // A += x y^T
};

const KernelTable& active();
Backend active_backend();
std::string_view backend_name(Backend b);

// Returns false (and leaves the active table unchanged) if the requested
// backend is not available on this CPU.
bool set_backend(Backend b);
std::vector<Backend> available_backends();
const KernelTable* table_for(Backend b);

// Convenience forwarders through the active table.
inline double dot(const double* a, const double* b, std::size_t n) {
  return active().dot(a, b, n);
}
inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
  active().axpy(alpha, x, y, n);
}
inline void scal(double alpha, double* x, std::size_t n) {
  active().scal(alpha, x, n);
}
inline double sq_dist(const double* a, const double* b, std::size_t n) {
  return active().sq_dist(a, b, n);
}
inline double sum(const double* x, std::size_t n) { return active().sum(x, n); }
inline void relu(double* x, std::size_t n) { active().relu(x, n); }
inline void relu_backward(const double* act, double* g, std::size_t n) {
  active().relu_backward(act, g, n);
}
inline bool all_finite(const double* x, std::size_t n) {
  return active().all_finite(x, n);
}
inline void gemv_t(const double* a, const double* x, double* y, std::size_t k,
                   std::size_t n) {
  active().gemv_t(a, x, y, k, n);
}
inline void gemv_n(const double* a, const double* x, double* y, std::size_t k,
                   std::size_t n) {
  active().gemv_n(a, x, y, k, n);
}
inline void ger(double* a, const double* x, const double* y, std::size_t k,
                std::size_t n) {
  active().ger(a, x, y, k, n);
}

namespace detail {
extern const KernelTable scalar_table;
#if defined(__x86_64__) || defined(_M_X64)
extern const KernelTable avx2_table;
#endif
#if defined(__aarch64__)
extern const KernelTable neon_table;
#endif
}  // namespace detail

}  // namespace h2fed::kernels
