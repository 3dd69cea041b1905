#pragma once

// Constants for the tanh kernels. tanh(z) = m / (m + 2) with m = expm1(2z),
// where expm1 uses the reduction 2z = n ln2 + r, |r| <= ln2 / 2, and a Taylor
// polynomial in r.

namespace edagger::simd::detail {

inline constexpr double kLog2e = 1.4426950408889634073599;
// ln2 split so that n * kLn2Hi is exact for |n| < 2^11.
inline constexpr double kLn2Hi = 6.93145751953125E-1;
inline constexpr double kLn2Lo = 1.42860682030941723212E-6;

// 1/k! for k = 2..14, highest first (Horner order).
inline constexpr double kExpm1Coeff[] = {
    1.0 / 87178291200.0, 1.0 / 6227020800.0, 1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0,
    1.0 / 362880.0,      1.0 / 40320.0,      1.0 / 5040.0,      1.0 / 720.0,      1.0 / 120.0,
    1.0 / 24.0,          1.0 / 6.0,          0.5,
};
inline constexpr int kExpm1Terms = sizeof(kExpm1Coeff) / sizeof(kExpm1Coeff[0]);

// tanh(x) rounds to +-1 for |x| above this.
inline constexpr double kTanhSaturate = 22.0;

}  // namespace edagger::simd::detail

namespace edagger::simd::detail {

inline constexpr float kLog2eF = 1.44269504f;
// n * kLn2HiF is exact for |n| < 2^8.
inline constexpr float kLn2HiF = 0.693145752f;
inline constexpr float kLn2LoF = 1.42860677e-6f;

// 1/k! for k = 2..7, highest first.
inline constexpr float kExpm1CoeffF[] = {1.0f / 5040.0f, 1.0f / 720.0f, 1.0f / 120.0f,
                                         1.0f / 24.0f,   1.0f / 6.0f,   0.5f};
inline constexpr int kExpm1TermsF = sizeof(kExpm1CoeffF) / sizeof(kExpm1CoeffF[0]);

// tanh(x) rounds to +-1 in single precision above this.
inline constexpr float kTanhSaturateF = 9.0f;

}  // namespace edagger::simd::detail
