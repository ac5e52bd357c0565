#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace hhcap::fpk {

// Dense row kernels for F_p arithmetic (entries are canonical residues
// 0 <= v < p). These are the inner loops of Gaussian elimination and matrix
// multiplication. A scalar reference implementation always exists; SIMD
// variants (AVX2 / NEON) are selected at runtime when the CPU supports them
// and p < 2^15 (so Barrett reduction with a 32-bit magic constant keeps every
// intermediate inside 64-bit lanes).
struct Kernels {
  const char* name;
  // y[i] <- (y[i] + c * x[i]) mod p
  void (*axpy)(std::uint32_t* y, const std::uint32_t* x, std::uint32_t c,
               std::size_t n, std::uint32_t p);
  // y[i] <- (c * y[i]) mod p
  void (*scale)(std::uint32_t* y, std::uint32_t c, std::size_t n,
                std::uint32_t p);
};

const Kernels& scalar_kernels();
// Null when the build target or the running CPU lacks the ISA.
const Kernels* avx2_kernels();
const Kernels* neon_kernels();

// Kernel choice for a given modulus under the current selection policy.
const Kernels& active_kernels(std::uint32_t p);

// Selection override for equivalence tests and diagnostics: "auto" (default),
// "scalar", "avx2", "neon". Returns false if the named kernel is unavailable
// on this machine. Vector kernels still yield to scalar when p >= 2^15.
bool force_kernels(const std::string& name);

// Names of all kernel sets available at runtime (always includes "scalar").
std::vector<std::string> available_kernel_names();

constexpr std::uint32_t kVectorPMax = 1u << 15;

}  // namespace hhcap::fpk
