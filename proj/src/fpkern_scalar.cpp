#include "hhcap/fpkern.hpp"

namespace hhcap::fpk {

// Reference kernels: plain 64-bit arithmetic, valid for any p < 2^31.

static void axpy_scalar(std::uint32_t* y, const std::uint32_t* x,
                        std::uint32_t c, std::size_t n, std::uint32_t p) {
  if (c == 0) return;
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<std::uint32_t>(
        (std::uint64_t(c) * x[i] + y[i]) % p);
  }
}

static void scale_scalar(std::uint32_t* y, std::uint32_t c, std::size_t n,
                         std::uint32_t p) {
  if (c == 1) return;
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<std::uint32_t>(std::uint64_t(c) * y[i] % p);
  }
}

const Kernels& scalar_kernels() {
  static const Kernels k{"scalar", axpy_scalar, scale_scalar};
  return k;
}

}  // namespace hhcap::fpk
