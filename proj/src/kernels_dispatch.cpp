#include <atomic>
#include <cstdlib>
#include <string_view>

#include "h2fed/kernels.hpp"

namespace h2fed::kernels {
namespace {

bool backend_available(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Backend::Neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Backend pick_default() {
  if (const char* env = std::getenv("H2FED_KERNEL_BACKEND")) {
    std::string_view want(env);
    for (Backend b : {Backend::Scalar, Backend::Avx2, Backend::Neon}) {
      if (want == backend_name(b) && backend_available(b)) return b;
    }
  }
  if (backend_available(Backend::Avx2)) return Backend::Avx2;
  if (backend_available(Backend::Neon)) return Backend::Neon;
  return Backend::Scalar;
}

std::atomic<Backend> g_backend{pick_default()};

}  // namespace

const KernelTable* table_for(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return &detail::scalar_table;
    case Backend::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return &detail::avx2_table;
#else
      return nullptr;
#endif
    case Backend::Neon:
#if defined(__aarch64__)
      return &detail::neon_table;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

const KernelTable& active() { return *table_for(g_backend.load(std::memory_order_relaxed)); }

Backend active_backend() { return g_backend.load(std::memory_order_relaxed); }

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return "scalar";
    case Backend::Avx2:
      return "avx2";
    case Backend::Neon:
      return "neon";
  }
  return "unknown";
}

bool set_backend(Backend b) {
  if (!backend_available(b)) return false;
  g_backend.store(b, std::memory_order_relaxed);
  return true;
}

std::vector<Backend> available_backends() {
  std::vector<Backend> out;
  for (Backend b : {Backend::Scalar, Backend::Avx2, Backend::Neon}) {
    if (backend_available(b)) out.push_back(b);
  }
  return out;
}

}  // namespace h2fed::kernels
