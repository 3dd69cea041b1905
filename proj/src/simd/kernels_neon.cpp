// AArch64 NEON kernels (two doubles or four floats per register). Double tanh
// falls back to the scalar reference; everything else is vectorized.

#include <arm_neon.h>

#include "simd/backends.hpp"
#include "simd/tanh_constants.hpp"

namespace edagger::simd::detail {

namespace {

double dot(const double* a, const double* b, std::size_t k) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t p = 0;
  for (; p + 4 <= k; p += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + p), vld1q_f64(b + p));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + p + 2), vld1q_f64(b + p + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; p < k; ++p) s += a[p] * b[p];
  return s;
}

template <int R>
void block_rows(std::size_t i, std::size_t n, std::size_t k, const double* a,
                std::size_t row_stride, std::size_t col_stride, const double* b, double* c,
                bool accumulate) {
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    float64x2_t c0[R];
    float64x2_t c1[R];
    for (int r = 0; r < R; ++r) {
      double* crow = c + (i + r) * n + j;
      c0[r] = accumulate ? vld1q_f64(crow) : vdupq_n_f64(0.0);
      c1[r] = accumulate ? vld1q_f64(crow + 2) : vdupq_n_f64(0.0);
    }
    for (std::size_t p = 0; p < k; ++p) {
      const float64x2_t b0 = vld1q_f64(b + p * n + j);
      const float64x2_t b1 = vld1q_f64(b + p * n + j + 2);
      for (int r = 0; r < R; ++r) {
        const float64x2_t av = vdupq_n_f64(a[(i + r) * row_stride + p * col_stride]);
        c0[r] = vfmaq_f64(c0[r], av, b0);
        c1[r] = vfmaq_f64(c1[r], av, b1);
      }
    }
    for (int r = 0; r < R; ++r) {
      double* crow = c + (i + r) * n + j;
      vst1q_f64(crow, c0[r]);
      vst1q_f64(crow + 2, c1[r]);
    }
  }
  for (; j < n; ++j) {
    for (int r = 0; r < R; ++r) {
      double s = accumulate ? c[(i + r) * n + j] : 0.0;
      for (std::size_t p = 0; p < k; ++p) {
        s += a[(i + r) * row_stride + p * col_stride] * b[p * n + j];
      }
      c[(i + r) * n + j] = s;
    }
  }
}

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
             double* c, bool accumulate) {
  if (n == 1) {
    for (std::size_t i = 0; i < m; ++i) c[i] = (accumulate ? c[i] : 0.0) + dot(a + i * k, b, k);
    return;
  }
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) block_rows<4>(i, n, k, a, k, 1, b, c, accumulate);
  for (; i < m; ++i) block_rows<1>(i, n, k, a, k, 1, b, c, accumulate);
}

void gemm_tn_acc(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                 double* c) {
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) block_rows<4>(i, n, k, a, 1, m, b, c, true);
  for (; i < m; ++i) block_rows<1>(i, n, k, a, 1, m, b, c, true);
}

void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
             double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) c[i * n + j] = dot(a + i * k, b + j * k, k);
  }
}

void tanh_backward(const double* t, double* g, std::size_t n) {
  const float64x2_t one = vdupq_n_f64(1.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t tv = vld1q_f64(t + i);
    const float64x2_t d = vsubq_f64(one, vmulq_f64(tv, tv));
    vst1q_f64(g + i, vmulq_f64(vld1q_f64(g + i), d));
  }
  for (; i < n; ++i) g[i] *= 1.0 - t[i] * t[i];
}

void adam_update(double* w, const double* g, double* m, double* v, std::size_t n,
                 const AdamCoefficients& c) {
  const float64x2_t b1 = vdupq_n_f64(c.beta1);
  const float64x2_t b2 = vdupq_n_f64(c.beta2);
  const float64x2_t omb1 = vdupq_n_f64(1.0 - c.beta1);
  const float64x2_t omb2 = vdupq_n_f64(1.0 - c.beta2);
  const float64x2_t bc1 = vdupq_n_f64(c.bias_correction1);
  const float64x2_t bc2 = vdupq_n_f64(c.bias_correction2);
  const float64x2_t lr = vdupq_n_f64(c.learning_rate);
  const float64x2_t eps = vdupq_n_f64(c.epsilon);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t gv = vld1q_f64(g + i);
    const float64x2_t mv = vaddq_f64(vmulq_f64(b1, vld1q_f64(m + i)), vmulq_f64(omb1, gv));
    const float64x2_t vv =
        vaddq_f64(vmulq_f64(b2, vld1q_f64(v + i)), vmulq_f64(omb2, vmulq_f64(gv, gv)));
    vst1q_f64(m + i, mv);
    vst1q_f64(v + i, vv);
    const float64x2_t m_hat = vdivq_f64(mv, bc1);
    const float64x2_t v_hat = vdivq_f64(vv, bc2);
    const float64x2_t step = vdivq_f64(vmulq_f64(lr, m_hat), vaddq_f64(vsqrtq_f64(v_hat), eps));
    vst1q_f64(w + i, vsubq_f64(vld1q_f64(w + i), step));
  }
  if (i < n) scalar_kernels().adam_update(w + i, g + i, m + i, v + i, n - i, c);
}

template <int R>
void block_rows_f32(std::size_t i, std::size_t n, std::size_t k, const float* a, const float* b, float* c) {
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) {
    float32x4_t c0[R];
    float32x4_t c1[R];
    for (int r = 0; r < R; ++r) {
      c0[r] = vdupq_n_f32(0.0f);
      c1[r] = vdupq_n_f32(0.0f);
    }
    for (std::size_t p = 0; p < k; ++p) {
      const float32x4_t b0 = vld1q_f32(b + p * n + j);
      const float32x4_t b1 = vld1q_f32(b + p * n + j + 4);
      for (int r = 0; r < R; ++r) {
        const float32x4_t av = vdupq_n_f32(a[(i + r) * k + p]);
        c0[r] = vfmaq_f32(c0[r], av, b0);
        c1[r] = vfmaq_f32(c1[r], av, b1);
      }
    }
    for (int r = 0; r < R; ++r) {
      vst1q_f32(c + (i + r) * n + j, c0[r]);
      vst1q_f32(c + (i + r) * n + j + 4, c1[r]);
    }
  }
  for (; j < n; ++j) {
    for (int r = 0; r < R; ++r) {
      float s = 0.0f;
      for (std::size_t p = 0; p < k; ++p) s += a[(i + r) * k + p] * b[p * n + j];
      c[(i + r) * n + j] = s;
    }
  }
}

void gemm_nn_f32(std::size_t m, std::size_t n, std::size_t k, const float* a, const float* b, float* c) {
  if (n == 1) {
    for (std::size_t i = 0; i < m; ++i) {
      float32x4_t acc = vdupq_n_f32(0.0f);
      std::size_t p = 0;
      for (; p + 4 <= k; p += 4) acc = vfmaq_f32(acc, vld1q_f32(a + i * k + p), vld1q_f32(b + p));
      float s = vaddvq_f32(acc);
      for (; p < k; ++p) s += a[i * k + p] * b[p];
      c[i] = s;
    }
    return;
  }
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) block_rows_f32<4>(i, n, k, a, b, c);
  for (; i < m; ++i) block_rows_f32<1>(i, n, k, a, b, c);
}

inline float32x4_t tanh4_f32(float32x4_t x) {
  const float32x4_t z = vabsq_f32(x);
  // vminnmq would drop a NaN; vminq propagates it.
  const float32x4_t zc = vminq_f32(vdupq_n_f32(kTanhSaturateF), z);
  const float32x4_t y = vaddq_f32(zc, zc);
  const float32x4_t px = vrndmq_f32(vaddq_f32(vmulq_f32(vdupq_n_f32(kLog2eF), y), vdupq_n_f32(0.5f)));
  float32x4_t r = vsubq_f32(y, vmulq_f32(px, vdupq_n_f32(kLn2HiF)));
  r = vsubq_f32(r, vmulq_f32(px, vdupq_n_f32(kLn2LoF)));
  float32x4_t q = vdupq_n_f32(kExpm1CoeffF[0]);
  for (int i = 1; i < kExpm1TermsF; ++i) q = vfmaq_f32(vdupq_n_f32(kExpm1CoeffF[i]), q, r);
  const float32x4_t p = vfmaq_f32(r, vmulq_f32(r, r), q);
  const int32x4_t n = vaddq_s32(vcvtq_s32_f32(px), vdupq_n_s32(127));
  const float32x4_t scale = vreinterpretq_f32_s32(vshlq_n_s32(n, 23));
  const float32x4_t m = vfmaq_f32(vsubq_f32(scale, vdupq_n_f32(1.0f)), scale, p);
  float32x4_t t = vdivq_f32(m, vaddq_f32(m, vdupq_n_f32(2.0f)));
  const uint32x4_t saturated = vcgtq_f32(z, vdupq_n_f32(kTanhSaturateF));
  t = vbslq_f32(saturated, vdupq_n_f32(1.0f), t);
  const uint32x4_t sign = vandq_u32(vreinterpretq_u32_f32(x), vdupq_n_u32(0x80000000u));
  return vreinterpretq_f32_u32(vorrq_u32(vreinterpretq_u32_f32(t), sign));
}

void tanh_f32(const float* x, float* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) vst1q_f32(y + i, tanh4_f32(vld1q_f32(x + i)));
  for (; i < n; ++i) y[i] = tanh_reference_f32(x[i]);
}

}  // namespace

const KernelTable& neon_kernels() {
  static const KernelTable table{
      Backend::Neon, gemm_nn, gemm_tn_acc, gemm_nt, scalar_tanh, tanh_backward, adam_update, gemm_nn_f32,
      tanh_f32,
  };
  return table;
}

}  // namespace edagger::simd::detail
