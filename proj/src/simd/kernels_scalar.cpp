#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>

#include "simd/backends.hpp"
#include "simd/tanh_constants.hpp"

namespace edagger::simd {

using namespace detail;

namespace {

// 2^n for integer n in the normal exponent range, built from the bit pattern
// the vector kernels use.
double pow2i(std::int64_t n) {
  const std::uint64_t bits = static_cast<std::uint64_t>(n + 1023) << 52;
  double out;
  std::memcpy(&out, &bits, sizeof(out));
  return out;
}

// expm1(y) for y in [0, 2 * kTanhSaturate].
double expm1_reference(double y) {
  const double px = std::floor(kLog2e * y + 0.5);
  const auto n = static_cast<std::int64_t>(px);
  double r = y - px * kLn2Hi;
  r = r - px * kLn2Lo;
  double q = kExpm1Coeff[0];
  for (int i = 1; i < kExpm1Terms; ++i) q = q * r + kExpm1Coeff[i];
  const double p = r + (r * r) * q;
  const double scale = pow2i(n);
  return scale * p + (scale - 1.0);
}

float pow2i_f32(std::int32_t n) {
  const std::uint32_t bits = static_cast<std::uint32_t>(n + 127) << 23;
  float out;
  std::memcpy(&out, &bits, sizeof(out));
  return out;
}

// expm1(y) for y in [0, 2 * kTanhSaturateF].
float expm1_reference_f32(float y) {
  const float px = std::floor(kLog2eF * y + 0.5f);
  const auto n = static_cast<std::int32_t>(px);
  float r = y - px * kLn2HiF;
  r = r - px * kLn2LoF;
  float q = kExpm1CoeffF[0];
  for (int i = 1; i < kExpm1TermsF; ++i) q = q * r + kExpm1CoeffF[i];
  const float p = r + (r * r) * q;
  const float scale = pow2i_f32(n);
  return scale * p + (scale - 1.0f);
}

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
             double* c, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    if (!accumulate) std::fill(crow, crow + n, 0.0);
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
    }
  }
}

void gemm_tn_acc(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                 double* c) {
  for (std::size_t p = 0; p < k; ++p) {
    const double* arow = a + p * m;
    const double* brow = b + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double api = arow[i];
      double* crow = c + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += api * brow[j];
    }
  }
}

void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
             double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += a[i * k + p] * b[j * k + p];
      c[i * n + j] = acc;
    }
  }
}

void gemm_nn_f32(std::size_t m, std::size_t n, std::size_t k, const float* a, const float* b, float* c) {
  for (std::size_t i = 0; i < m; ++i) {
    float* crow = c + i * n;
    std::fill(crow, crow + n, 0.0f);
    for (std::size_t p = 0; p < k; ++p) {
      const float aip = a[i * k + p];
      const float* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
    }
  }
}

void tanh_backward(const double* t, double* g, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) g[i] *= 1.0 - t[i] * t[i];
}

void adam_update(double* w, const double* g, double* m, double* v, std::size_t n,
                 const AdamCoefficients& c) {
  const double one_minus_b1 = 1.0 - c.beta1;
  const double one_minus_b2 = 1.0 - c.beta2;
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = c.beta1 * m[i] + one_minus_b1 * g[i];
    v[i] = c.beta2 * v[i] + one_minus_b2 * (g[i] * g[i]);
    const double m_hat = m[i] / c.bias_correction1;
    const double v_hat = v[i] / c.bias_correction2;
    w[i] = w[i] - c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
  }
}

}  // namespace

double tanh_reference(double x) {
  if (std::isnan(x)) return x;
  const double z = std::fabs(x);
  if (z > kTanhSaturate) return std::copysign(1.0, x);
  const double m = expm1_reference(z + z);
  return std::copysign(m / (m + 2.0), x);
}

float tanh_reference_f32(float x) {
  if (std::isnan(x)) return x;
  const float z = std::fabs(x);
  if (z > kTanhSaturateF) return std::copysign(1.0f, x);
  const float m = expm1_reference_f32(z + z);
  return std::copysign(m / (m + 2.0f), x);
}

namespace detail {

void scalar_tanh_f32(const float* x, float* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = tanh_reference_f32(x[i]);
}

void scalar_tanh(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = tanh_reference(x[i]);
}

}  // namespace detail

const KernelTable& scalar_kernels() {
  static const KernelTable table{
      Backend::Scalar, gemm_nn, gemm_tn_acc, gemm_nt, detail::scalar_tanh, tanh_backward,
      adam_update, gemm_nn_f32, detail::scalar_tanh_f32,
  };
  return table;
}

}  // namespace edagger::simd
