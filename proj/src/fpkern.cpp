#include "hhcap/fpkern.hpp"

#include <atomic>

namespace hhcap::fpk {

#if defined(HHCAP_HAVE_AVX2_TU)
const Kernels* avx2_kernels_impl();
const Kernels* avx2_kernels() {
  static const Kernels* k =
      __builtin_cpu_supports("avx2") ? avx2_kernels_impl() : nullptr;
  return k;
}
#else
const Kernels* avx2_kernels() { return nullptr; }
#endif

#if defined(HHCAP_HAVE_NEON_TU)
// NEON is baseline on aarch64; no runtime probe needed.
const Kernels* neon_kernels_impl();
const Kernels* neon_kernels() { return neon_kernels_impl(); }
#else
const Kernels* neon_kernels() { return nullptr; }
#endif

namespace {
enum class Mode { kAuto, kScalar, kAvx2, kNeon };
std::atomic<Mode> g_mode{Mode::kAuto};

const Kernels* best_vector() {
  if (const Kernels* k = avx2_kernels()) return k;
  if (const Kernels* k = neon_kernels()) return k;
  return nullptr;
}
}  // namespace

const Kernels& active_kernels(std::uint32_t p) {
  if (p >= kVectorPMax) return scalar_kernels();
  switch (g_mode.load(std::memory_order_relaxed)) {
    case Mode::kScalar:
      return scalar_kernels();
    case Mode::kAvx2:
      return *avx2_kernels();
    case Mode::kNeon:
      return *neon_kernels();
    case Mode::kAuto:
      break;
  }
  const Kernels* k = best_vector();
  return k ? *k : scalar_kernels();
}

bool force_kernels(const std::string& name) {
  if (name == "auto") {
    g_mode.store(Mode::kAuto);
    return true;
  }
  if (name == "scalar") {
    g_mode.store(Mode::kScalar);
    return true;
  }
  if (name == "avx2" && avx2_kernels()) {
    g_mode.store(Mode::kAvx2);
    return true;
  }
  if (name == "neon" && neon_kernels()) {
    g_mode.store(Mode::kNeon);
    return true;
  }
  return false;
}

std::vector<std::string> available_kernel_names() {
  std::vector<std::string> out{"scalar"};
  if (avx2_kernels()) out.push_back("avx2");
  if (neon_kernels()) out.push_back("neon");
  return out;
}

}  // namespace hhcap::fpk
