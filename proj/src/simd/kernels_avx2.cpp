// AVX2 + FMA kernels. This translation unit is compiled with -mavx2 -mfma and
// must only be entered after a runtime CPU check (see dispatch.cpp).

#include <immintrin.h>

#include <cstdint>

#include "simd/backends.hpp"
#include "simd/tanh_constants.hpp"

namespace edagger::simd::detail {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

// [sum(a0), sum(a1), sum(a2), sum(a3)]
inline __m256d reduce4(__m256d a0, __m256d a1, __m256d a2, __m256d a3) {
  const __m256d t0 = _mm256_hadd_pd(a0, a1);
  const __m256d t1 = _mm256_hadd_pd(a2, a3);
  const __m256d lo = _mm256_permute2f128_pd(t0, t1, 0x20);
  const __m256d hi = _mm256_permute2f128_pd(t0, t1, 0x31);
  return _mm256_add_pd(lo, hi);
}

double dot(const double* a, const double* b, std::size_t k) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t p = 0;
  for (; p + 8 <= k; p += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + p), _mm256_loadu_pd(b + p), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + p + 4), _mm256_loadu_pd(b + p + 4), acc1);
  }
  for (; p + 4 <= k; p += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + p), _mm256_loadu_pd(b + p), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; p < k; ++p) s += a[p] * b[p];
  return s;
}

// C rows [i, i+R) += A_block * B where A(r, p) = a[(i + r) * row_stride + p * col_stride].
template <int R>
void block_rows(std::size_t i, std::size_t n, std::size_t k, const double* a,
                std::size_t row_stride, std::size_t col_stride, const double* b, double* c,
                bool accumulate) {
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) {
    __m256d c0[R];
    __m256d c1[R];
    for (int r = 0; r < R; ++r) {
      double* crow = c + (i + r) * n + j;
      c0[r] = accumulate ? _mm256_loadu_pd(crow) : _mm256_setzero_pd();
      c1[r] = accumulate ? _mm256_loadu_pd(crow + 4) : _mm256_setzero_pd();
    }
    for (std::size_t p = 0; p < k; ++p) {
      const __m256d b0 = _mm256_loadu_pd(b + p * n + j);
      const __m256d b1 = _mm256_loadu_pd(b + p * n + j + 4);
      for (int r = 0; r < R; ++r) {
        const __m256d av = _mm256_broadcast_sd(a + (i + r) * row_stride + p * col_stride);
        c0[r] = _mm256_fmadd_pd(av, b0, c0[r]);
        c1[r] = _mm256_fmadd_pd(av, b1, c1[r]);
      }
    }
    for (int r = 0; r < R; ++r) {
      double* crow = c + (i + r) * n + j;
      _mm256_storeu_pd(crow, c0[r]);
      _mm256_storeu_pd(crow + 4, c1[r]);
    }
  }
  for (; j + 4 <= n; j += 4) {
    __m256d c0[R];
    for (int r = 0; r < R; ++r) {
      c0[r] = accumulate ? _mm256_loadu_pd(c + (i + r) * n + j) : _mm256_setzero_pd();
    }
    for (std::size_t p = 0; p < k; ++p) {
      const __m256d b0 = _mm256_loadu_pd(b + p * n + j);
      for (int r = 0; r < R; ++r) {
        const __m256d av = _mm256_broadcast_sd(a + (i + r) * row_stride + p * col_stride);
        c0[r] = _mm256_fmadd_pd(av, b0, c0[r]);
      }
    }
    for (int r = 0; r < R; ++r) _mm256_storeu_pd(c + (i + r) * n + j, c0[r]);
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
    for (std::size_t i = 0; i < m; ++i) {
      c[i] = (accumulate ? c[i] : 0.0) + dot(a + i * k, b, k);
    }
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
    const double* arow = a + i * k;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      const double* b0 = b + j * k;
      const double* b1 = b0 + k;
      const double* b2 = b1 + k;
      const double* b3 = b2 + k;
      __m256d s0 = _mm256_setzero_pd();
      __m256d s1 = _mm256_setzero_pd();
      __m256d s2 = _mm256_setzero_pd();
      __m256d s3 = _mm256_setzero_pd();
      std::size_t p = 0;
      for (; p + 4 <= k; p += 4) {
        const __m256d av = _mm256_loadu_pd(arow + p);
        s0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b0 + p), s0);
        s1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b1 + p), s1);
        s2 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b2 + p), s2);
        s3 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b3 + p), s3);
      }
      alignas(32) double sums[4];
      _mm256_store_pd(sums, reduce4(s0, s1, s2, s3));
      for (; p < k; ++p) {
        sums[0] += arow[p] * b0[p];
        sums[1] += arow[p] * b1[p];
        sums[2] += arow[p] * b2[p];
        sums[3] += arow[p] * b3[p];
      }
      for (int r = 0; r < 4; ++r) c[i * n + j + r] = sums[r];
    }
    for (; j < n; ++j) c[i * n + j] = dot(arow, b + j * k, k);
  }
}

// expm1(y) for y in [0, 2 * kTanhSaturate]; mirrors expm1_reference.
inline __m256d expm1_small_range(__m256d y) {
  const __m256d px = _mm256_floor_pd(_mm256_add_pd(_mm256_mul_pd(_mm256_set1_pd(kLog2e), y), _mm256_set1_pd(0.5)));
  __m256d r = _mm256_sub_pd(y, _mm256_mul_pd(px, _mm256_set1_pd(kLn2Hi)));
  r = _mm256_sub_pd(r, _mm256_mul_pd(px, _mm256_set1_pd(kLn2Lo)));
  __m256d q = _mm256_set1_pd(kExpm1Coeff[0]);
  for (int i = 1; i < kExpm1Terms; ++i) q = _mm256_fmadd_pd(q, r, _mm256_set1_pd(kExpm1Coeff[i]));
  const __m256d p = _mm256_fmadd_pd(_mm256_mul_pd(r, r), q, r);
  __m256i n64 = _mm256_cvtepi32_epi64(_mm256_cvtpd_epi32(px));
  n64 = _mm256_add_epi64(n64, _mm256_set1_epi64x(1023));
  const __m256d scale = _mm256_castsi256_pd(_mm256_slli_epi64(n64, 52));
  return _mm256_fmadd_pd(scale, p, _mm256_sub_pd(scale, _mm256_set1_pd(1.0)));
}

inline __m256d tanh4(__m256d x) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  const __m256d z = _mm256_andnot_pd(sign_mask, x);
  const __m256d sign = _mm256_and_pd(sign_mask, x);
  // min(c, z) keeps a NaN in z, and the NaN then flows through the arithmetic.
  const __m256d zc = _mm256_min_pd(_mm256_set1_pd(kTanhSaturate), z);
  const __m256d m = expm1_small_range(_mm256_add_pd(zc, zc));
  __m256d t = _mm256_div_pd(m, _mm256_add_pd(m, _mm256_set1_pd(2.0)));
  const __m256d saturated = _mm256_cmp_pd(z, _mm256_set1_pd(kTanhSaturate), _CMP_GT_OQ);
  t = _mm256_blendv_pd(t, _mm256_set1_pd(1.0), saturated);
  return _mm256_or_pd(t, sign);
}

void tanh(const double* x, double* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d t0 = tanh4(_mm256_loadu_pd(x + i));
    const __m256d t1 = tanh4(_mm256_loadu_pd(x + i + 4));
    _mm256_storeu_pd(y + i, t0);
    _mm256_storeu_pd(y + i + 4, t1);
  }
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(y + i, tanh4(_mm256_loadu_pd(x + i)));
  if (i < n) {
    alignas(32) double buf[4] = {0.0, 0.0, 0.0, 0.0};
    for (std::size_t t = i; t < n; ++t) buf[t - i] = x[t];
    _mm256_store_pd(buf, tanh4(_mm256_load_pd(buf)));
    for (std::size_t t = i; t < n; ++t) y[t] = buf[t - i];
  }
}

float dot_f32(const float* a, const float* b, std::size_t k) {
  __m256 acc = _mm256_setzero_ps();
  std::size_t p = 0;
  for (; p + 8 <= k; p += 8) acc = _mm256_fmadd_ps(_mm256_loadu_ps(a + p), _mm256_loadu_ps(b + p), acc);
  __m128 lo = _mm_add_ps(_mm256_castps256_ps128(acc), _mm256_extractf128_ps(acc, 1));
  lo = _mm_add_ps(lo, _mm_movehl_ps(lo, lo));
  float s = _mm_cvtss_f32(_mm_add_ss(lo, _mm_movehdup_ps(lo)));
  for (; p < k; ++p) s += a[p] * b[p];
  return s;
}

template <int R>
void block_rows_f32(std::size_t i, std::size_t n, std::size_t k, const float* a, const float* b, float* c) {
  std::size_t j = 0;
  for (; j + 16 <= n; j += 16) {
    __m256 c0[R];
    __m256 c1[R];
    for (int r = 0; r < R; ++r) {
      c0[r] = _mm256_setzero_ps();
      c1[r] = _mm256_setzero_ps();
    }
    for (std::size_t p = 0; p < k; ++p) {
      const __m256 b0 = _mm256_loadu_ps(b + p * n + j);
      const __m256 b1 = _mm256_loadu_ps(b + p * n + j + 8);
      for (int r = 0; r < R; ++r) {
        const __m256 av = _mm256_broadcast_ss(a + (i + r) * k + p);
        c0[r] = _mm256_fmadd_ps(av, b0, c0[r]);
        c1[r] = _mm256_fmadd_ps(av, b1, c1[r]);
      }
    }
    for (int r = 0; r < R; ++r) {
      _mm256_storeu_ps(c + (i + r) * n + j, c0[r]);
      _mm256_storeu_ps(c + (i + r) * n + j + 8, c1[r]);
    }
  }
  for (; j + 8 <= n; j += 8) {
    __m256 c0[R];
    for (int r = 0; r < R; ++r) c0[r] = _mm256_setzero_ps();
    for (std::size_t p = 0; p < k; ++p) {
      const __m256 b0 = _mm256_loadu_ps(b + p * n + j);
      for (int r = 0; r < R; ++r) c0[r] = _mm256_fmadd_ps(_mm256_broadcast_ss(a + (i + r) * k + p), b0, c0[r]);
    }
    for (int r = 0; r < R; ++r) _mm256_storeu_ps(c + (i + r) * n + j, c0[r]);
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
    for (std::size_t i = 0; i < m; ++i) c[i] = dot_f32(a + i * k, b, k);
    return;
  }
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) block_rows_f32<4>(i, n, k, a, b, c);
  for (; i < m; ++i) block_rows_f32<1>(i, n, k, a, b, c);
}

inline __m256 tanh8(__m256 x) {
  const __m256 sign_mask = _mm256_set1_ps(-0.0f);
  const __m256 z = _mm256_andnot_ps(sign_mask, x);
  const __m256 sign = _mm256_and_ps(sign_mask, x);
  const __m256 zc = _mm256_min_ps(_mm256_set1_ps(kTanhSaturateF), z);
  const __m256 y = _mm256_add_ps(zc, zc);
  const __m256 px = _mm256_floor_ps(_mm256_add_ps(_mm256_mul_ps(_mm256_set1_ps(kLog2eF), y), _mm256_set1_ps(0.5f)));
  __m256 r = _mm256_sub_ps(y, _mm256_mul_ps(px, _mm256_set1_ps(kLn2HiF)));
  r = _mm256_sub_ps(r, _mm256_mul_ps(px, _mm256_set1_ps(kLn2LoF)));
  __m256 q = _mm256_set1_ps(kExpm1CoeffF[0]);
  for (int i = 1; i < kExpm1TermsF; ++i) q = _mm256_fmadd_ps(q, r, _mm256_set1_ps(kExpm1CoeffF[i]));
  const __m256 p = _mm256_fmadd_ps(_mm256_mul_ps(r, r), q, r);
  const __m256i n = _mm256_add_epi32(_mm256_cvtps_epi32(px), _mm256_set1_epi32(127));
  const __m256 scale = _mm256_castsi256_ps(_mm256_slli_epi32(n, 23));
  const __m256 m = _mm256_fmadd_ps(scale, p, _mm256_sub_ps(scale, _mm256_set1_ps(1.0f)));
  __m256 t = _mm256_div_ps(m, _mm256_add_ps(m, _mm256_set1_ps(2.0f)));
  const __m256 saturated = _mm256_cmp_ps(z, _mm256_set1_ps(kTanhSaturateF), _CMP_GT_OQ);
  t = _mm256_blendv_ps(t, _mm256_set1_ps(1.0f), saturated);
  return _mm256_or_ps(t, sign);
}

void tanh_f32(const float* x, float* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    const __m256 t0 = tanh8(_mm256_loadu_ps(x + i));
    const __m256 t1 = tanh8(_mm256_loadu_ps(x + i + 8));
    _mm256_storeu_ps(y + i, t0);
    _mm256_storeu_ps(y + i + 8, t1);
  }
  for (; i + 8 <= n; i += 8) _mm256_storeu_ps(y + i, tanh8(_mm256_loadu_ps(x + i)));
  if (i < n) {
    alignas(32) float buf[8] = {};
    for (std::size_t t = i; t < n; ++t) buf[t - i] = x[t];
    _mm256_store_ps(buf, tanh8(_mm256_load_ps(buf)));
    for (std::size_t t = i; t < n; ++t) y[t] = buf[t - i];
  }
}

void tanh_backward(const double* t, double* g, std::size_t n) {
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d tv = _mm256_loadu_pd(t + i);
    const __m256d d = _mm256_sub_pd(one, _mm256_mul_pd(tv, tv));
    _mm256_storeu_pd(g + i, _mm256_mul_pd(_mm256_loadu_pd(g + i), d));
  }
  for (; i < n; ++i) g[i] *= 1.0 - t[i] * t[i];
}

void adam_update(double* w, const double* g, double* m, double* v, std::size_t n,
                 const AdamCoefficients& c) {
  const __m256d b1 = _mm256_set1_pd(c.beta1);
  const __m256d b2 = _mm256_set1_pd(c.beta2);
  const __m256d omb1 = _mm256_set1_pd(1.0 - c.beta1);
  const __m256d omb2 = _mm256_set1_pd(1.0 - c.beta2);
  const __m256d bc1 = _mm256_set1_pd(c.bias_correction1);
  const __m256d bc2 = _mm256_set1_pd(c.bias_correction2);
  const __m256d lr = _mm256_set1_pd(c.learning_rate);
  const __m256d eps = _mm256_set1_pd(c.epsilon);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d gv = _mm256_loadu_pd(g + i);
    const __m256d mv = _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + i)), _mm256_mul_pd(omb1, gv));
    const __m256d vv = _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v + i)),
                                     _mm256_mul_pd(omb2, _mm256_mul_pd(gv, gv)));
    _mm256_storeu_pd(m + i, mv);
    _mm256_storeu_pd(v + i, vv);
    const __m256d m_hat = _mm256_div_pd(mv, bc1);
    const __m256d v_hat = _mm256_div_pd(vv, bc2);
    const __m256d step =
        _mm256_div_pd(_mm256_mul_pd(lr, m_hat), _mm256_add_pd(_mm256_sqrt_pd(v_hat), eps));
    _mm256_storeu_pd(w + i, _mm256_sub_pd(_mm256_loadu_pd(w + i), step));
  }
  if (i < n) scalar_kernels().adam_update(w + i, g + i, m + i, v + i, n - i, c);
}

}  // namespace

const KernelTable& avx2_kernels() {
  static const KernelTable table{
      Backend::Avx2, gemm_nn, gemm_tn_acc, gemm_nt, tanh, tanh_backward, adam_update, gemm_nn_f32, tanh_f32,
  };
  return table;
}

}  // namespace edagger::simd::detail
