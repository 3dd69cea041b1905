#pragma once

#include "edagger/simd/kernels.hpp"

namespace edagger::simd::detail {

#if defined(EDAGGER_HAVE_AVX2)
const KernelTable& avx2_kernels();
#endif
#if defined(EDAGGER_HAVE_NEON)
const KernelTable& neon_kernels();
#endif

void scalar_tanh(const double* x, double* y, std::size_t n);
void scalar_tanh_f32(const float* x, float* y, std::size_t n);

}  // namespace edagger::simd::detail
