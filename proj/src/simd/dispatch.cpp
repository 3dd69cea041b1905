#include <atomic>
#include <stdexcept>
#include <string>

#include "simd/backends.hpp"

namespace edagger::simd {

std::string_view to_string(Backend backend) {
  switch (backend) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
    case Backend::Neon: return "neon";
  }
  return "unknown";
}

Backend parse_backend(std::string_view name) {
  if (name == "auto") return best_backend();
  if (name == "scalar") return Backend::Scalar;
  if (name == "avx2") return Backend::Avx2;
  if (name == "neon") return Backend::Neon;
  throw std::invalid_argument("unknown kernel backend '" + std::string(name) + "'");
}

bool backend_available(Backend backend) {
  switch (backend) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
#if defined(EDAGGER_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Backend::Neon:
#if defined(EDAGGER_HAVE_NEON)
      return true;  // mandatory on AArch64
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& kernels_for(Backend backend) {
  if (!backend_available(backend)) {
    throw std::invalid_argument("kernel backend '" + std::string(to_string(backend)) +
                                "' is not available on this machine");
  }
  switch (backend) {
#if defined(EDAGGER_HAVE_AVX2)
    case Backend::Avx2: return detail::avx2_kernels();
#endif
#if defined(EDAGGER_HAVE_NEON)
    case Backend::Neon: return detail::neon_kernels();
#endif
    default: return scalar_kernels();
  }
}

Backend best_backend() {
  if (backend_available(Backend::Avx2)) return Backend::Avx2;
  if (backend_available(Backend::Neon)) return Backend::Neon;
  return Backend::Scalar;
}

namespace {

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{&kernels_for(best_backend())};
  return slot;
}

}  // namespace

const KernelTable& active_kernels() { return *active_slot().load(std::memory_order_acquire); }

void set_active_backend(Backend backend) {
  active_slot().store(&kernels_for(backend), std::memory_order_release);
}

}  // namespace edagger::simd
