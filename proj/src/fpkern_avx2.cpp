// AVX2 variants of the F_p row kernels. Compiled only on x86-64 (with
// -mavx2); callers must gate on cpu support at runtime. Requires p < 2^15:
// every intermediate c*x+y is then < 2^30 and Barrett reduction with
// m = floor(2^32/p) needs one conditional subtract.

#include <immintrin.h>

#include "hhcap/fpkern.hpp"

namespace hhcap::fpk {

namespace {

// v holds 4 uint64 lanes with values < 2^32; returns lanes reduced mod p.
inline __m256i barrett64(__m256i v, __m256i m, __m256i p64) {
  __m256i q = _mm256_srli_epi64(_mm256_mul_epu32(v, m), 32);
  __m256i r = _mm256_sub_epi64(v, _mm256_mul_epu32(q, p64));
  __m256i lt = _mm256_cmpgt_epi64(p64, r);  // r < p: keep
  return _mm256_sub_epi64(r, _mm256_andnot_si256(lt, p64));
}

void axpy_avx2(std::uint32_t* y, const std::uint32_t* x, std::uint32_t c,
               std::size_t n, std::uint32_t p) {
  if (c == 0) return;
  const std::uint64_t magic = (std::uint64_t(1) << 32) / p;
  const __m256i m = _mm256_set1_epi64x(static_cast<long long>(magic));
  const __m256i p64 = _mm256_set1_epi64x(p);
  const __m256i cv = _mm256_set1_epi32(static_cast<int>(c));
  const __m256i lo32 = _mm256_set1_epi64x(0xffffffffLL);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256i xv = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(x + i));
    __m256i yv = _mm256_loadu_si256(reinterpret_cast<__m256i*>(
        const_cast<std::uint32_t*>(y + i)));
    __m256i pe = _mm256_mul_epu32(xv, cv);
    __m256i po = _mm256_mul_epu32(_mm256_srli_epi64(xv, 32), cv);
    __m256i ve = _mm256_add_epi64(pe, _mm256_and_si256(yv, lo32));
    __m256i vo = _mm256_add_epi64(po, _mm256_srli_epi64(yv, 32));
    __m256i re = barrett64(ve, m, p64);
    __m256i ro = barrett64(vo, m, p64);
    __m256i out = _mm256_or_si256(re, _mm256_slli_epi64(ro, 32));
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(y + i), out);
  }
  for (; i < n; ++i)
    y[i] = static_cast<std::uint32_t>((std::uint64_t(c) * x[i] + y[i]) % p);
}

void scale_avx2(std::uint32_t* y, std::uint32_t c, std::size_t n,
                std::uint32_t p) {
  if (c == 1) return;
  const std::uint64_t magic = (std::uint64_t(1) << 32) / p;
  const __m256i m = _mm256_set1_epi64x(static_cast<long long>(magic));
  const __m256i p64 = _mm256_set1_epi64x(p);
  const __m256i cv = _mm256_set1_epi32(static_cast<int>(c));
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256i yv = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(y + i));
    __m256i ve = _mm256_mul_epu32(yv, cv);
    __m256i vo = _mm256_mul_epu32(_mm256_srli_epi64(yv, 32), cv);
    __m256i re = barrett64(ve, m, p64);
    __m256i ro = barrett64(vo, m, p64);
    __m256i out = _mm256_or_si256(re, _mm256_slli_epi64(ro, 32));
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(y + i), out);
  }
  for (; i < n; ++i)
    y[i] = static_cast<std::uint32_t>(std::uint64_t(c) * y[i] % p);
}

}  // namespace

const Kernels* avx2_kernels_impl() {
  static const Kernels k{"avx2", axpy_avx2, scale_avx2};
  return &k;
}

}  // namespace hhcap::fpk
