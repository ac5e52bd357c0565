// NEON variants of the F_p row kernels, aarch64 only. Same contract as the
// AVX2 translation unit: p < 2^15, Barrett reduction with m = floor(2^32/p).

#include <arm_neon.h>

#include "hhcap/fpkern.hpp"

namespace hhcap::fpk {

namespace {

// v holds 2 uint64 lanes with values < 2^32; returns lanes reduced mod p.
inline uint64x2_t barrett64(uint64x2_t v, uint32x2_t m32, uint32x2_t p32,
                            uint64x2_t p64) {
  uint64x2_t q = vshrq_n_u64(vmull_u32(vmovn_u64(v), m32), 32);
  uint64x2_t r = vsubq_u64(v, vmull_u32(vmovn_u64(q), p32));
  uint64x2_t ge = vcgeq_u64(r, p64);
  return vsubq_u64(r, vandq_u64(ge, p64));
}

void axpy_neon(std::uint32_t* y, const std::uint32_t* x, std::uint32_t c,
               std::size_t n, std::uint32_t p) {
  if (c == 0) return;
  const std::uint32_t magic =
      static_cast<std::uint32_t>((std::uint64_t(1) << 32) / p);
  const uint32x2_t m32 = vdup_n_u32(magic);
  const uint32x2_t p32 = vdup_n_u32(p);
  const uint64x2_t p64 = vdupq_n_u64(p);
  const uint32x2_t cv = vdup_n_u32(c);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    uint32x4_t xv = vld1q_u32(x + i);
    uint32x4_t yv = vld1q_u32(y + i);
    uint64x2_t vlo = vaddw_u32(vmull_u32(vget_low_u32(xv), cv),
                               vget_low_u32(yv));
    uint64x2_t vhi = vaddw_u32(vmull_u32(vget_high_u32(xv), cv),
                               vget_high_u32(yv));
    uint32x2_t rlo = vmovn_u64(barrett64(vlo, m32, p32, p64));
    uint32x2_t rhi = vmovn_u64(barrett64(vhi, m32, p32, p64));
    vst1q_u32(y + i, vcombine_u32(rlo, rhi));
  }
  for (; i < n; ++i)
    y[i] = static_cast<std::uint32_t>((std::uint64_t(c) * x[i] + y[i]) % p);
}

void scale_neon(std::uint32_t* y, std::uint32_t c, std::size_t n,
                std::uint32_t p) {
  if (c == 1) return;
  const std::uint32_t magic =
      static_cast<std::uint32_t>((std::uint64_t(1) << 32) / p);
  const uint32x2_t m32 = vdup_n_u32(magic);
  const uint32x2_t p32 = vdup_n_u32(p);
  const uint64x2_t p64 = vdupq_n_u64(p);
  const uint32x2_t cv = vdup_n_u32(c);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    uint32x4_t yv = vld1q_u32(y + i);
    uint64x2_t vlo = vmull_u32(vget_low_u32(yv), cv);
    uint64x2_t vhi = vmull_u32(vget_high_u32(yv), cv);
    uint32x2_t rlo = vmovn_u64(barrett64(vlo, m32, p32, p64));
    uint32x2_t rhi = vmovn_u64(barrett64(vhi, m32, p32, p64));
    vst1q_u32(y + i, vcombine_u32(rlo, rhi));
  }
  for (; i < n; ++i)
    y[i] = static_cast<std::uint32_t>(std::uint64_t(c) * y[i] % p);
}

}  // namespace

const Kernels* neon_kernels_impl() {
  static const Kernels k{"neon", axpy_neon, scale_neon};
  return &k;
}

}  // namespace hhcap::fpk
