#pragma once

// Dense arithmetic kernels behind the network engine.
//
// Every kernel has a scalar reference implementation; vector variants (AVX2 on
// x86-64, NEON on AArch64) are selected at runtime and tested for equivalence
// against the reference. Matrices are row-major and densely packed.

#include <cstddef>
#include <string_view>

namespace edagger::simd {

enum class Backend { Scalar, Avx2, Neon };

std::string_view to_string(Backend backend);
/// Parses "scalar", "avx2", "neon" or "auto" (best available).
Backend parse_backend(std::string_view name);

/// Precomputed per-step ADAM constants.
struct AdamCoefficients {
  double learning_rate;
  double beta1;
  double beta2;
  double epsilon;
  double bias_correction1;  // 1 - beta1^t
  double bias_correction2;  // 1 - beta2^t
};

struct KernelTable {
  Backend backend;

  /// C[m x n] = A[m x k] * B[k x n], or C += A * B when accumulate is set.
  void (*gemm_nn)(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                  double* c, bool accumulate);
  /// C[m x n] += A^T * B with A stored [k x m] and B stored [k x n].
  void (*gemm_tn_acc)(std::size_t m, std::size_t n, std::size_t k, const double* a,
                      const double* b, double* c);
  /// C[m x n] = A[m x k] * B^T with B stored [n x k].
  void (*gemm_nt)(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                  double* c);
  /// y[i] = tanh(x[i]); x and y may alias.
  void (*tanh)(const double* x, double* y, std::size_t n);
  /// g[i] *= 1 - t[i]^2 (tanh derivative expressed through its output).
  void (*tanh_backward)(const double* t, double* g, std::size_t n);
  /// In-place ADAM update of w given gradient g and moment buffers m, v.
  void (*adam_update)(double* w, const double* g, double* m, double* v, std::size_t n,
                      const AdamCoefficients& coeffs);

  // Single-precision inference path (no gradients).

  /// C[m x n] = A[m x k] * B[k x n].
  void (*gemm_nn_f32)(std::size_t m, std::size_t n, std::size_t k, const float* a, const float* b,
                      float* c);
  /// y[i] = tanh(x[i]); x and y may alias.
  void (*tanh_f32)(const float* x, float* y, std::size_t n);
};

/// Reference kernels; always available.
const KernelTable& scalar_kernels();

/// True when the backend was compiled in and the running CPU supports it.
bool backend_available(Backend backend);

/// Table for a specific backend. Throws std::invalid_argument if unavailable.
const KernelTable& kernels_for(Backend backend);

/// Best backend the running CPU supports.
Backend best_backend();

/// Process-wide active table. Defaults to best_backend() on first use.
const KernelTable& active_kernels();
void set_active_backend(Backend backend);

/// Scalar tanh following the vector kernels step for step (they may fuse
/// multiply-adds, so results can differ in the last bits).
double tanh_reference(double x);
/// Single-precision counterpart of tanh_reference with a shorter polynomial.
float tanh_reference_f32(float x);

}  // namespace edagger::simd
