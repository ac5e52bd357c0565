#include <doctest.h>

#include <random>
#include <vector>

#include "hhcap/fpkern.hpp"

using namespace hhcap;

namespace {

std::vector<std::uint32_t> random_residues(std::mt19937_64& rng, std::size_t n,
                                           std::uint32_t p) {
  std::uniform_int_distribution<std::uint32_t> dist(0, p - 1);
  std::vector<std::uint32_t> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

}  // namespace

TEST_CASE("scalar kernels match plain 64-bit arithmetic") {
  std::mt19937_64 rng(12345);
  const auto& K = fpk::scalar_kernels();
  for (std::uint32_t p : {2u, 3u, 7u, 65521u, 2147483647u}) {
    auto x = random_residues(rng, 100, p);
    auto y = random_residues(rng, 100, p);
    auto y2 = y;
    std::uint32_t c = p > 5 ? p - 2 : 1;
    K.axpy(y.data(), x.data(), c, y.size(), p);
    for (std::size_t i = 0; i < y.size(); ++i)
      CHECK(y[i] == (std::uint64_t(c) * x[i] + y2[i]) % p);
    K.scale(y2.data(), c, y2.size(), p);
    for (std::size_t i = 0; i < y2.size(); ++i)
      CHECK(y2[i] < p);
  }
}

TEST_CASE("vector kernels agree with scalar reference on every prime size") {
  std::mt19937_64 rng(987);
  std::vector<const fpk::Kernels*> vecs;
  if (fpk::avx2_kernels()) vecs.push_back(fpk::avx2_kernels());
  if (fpk::neon_kernels()) vecs.push_back(fpk::neon_kernels());
  if (vecs.empty()) {
    MESSAGE("no vector ISA available; scalar-only machine");
    return;
  }
  const auto& S = fpk::scalar_kernels();
  // Primes across the eligible range, lengths hitting tails and alignment.
  for (std::uint32_t p : {2u, 3u, 5u, 13u, 251u, 4093u, 32749u}) {
    for (std::size_t n : {0u, 1u, 7u, 8u, 9u, 31u, 64u, 1000u}) {
      for (int trial = 0; trial < 4; ++trial) {
        auto x = random_residues(rng, n, p);
        auto y = random_residues(rng, n, p);
        std::uint32_t c =
            std::uniform_int_distribution<std::uint32_t>(0, p - 1)(rng);
        for (const fpk::Kernels* V : vecs) {
          auto ys = y, yv = y;
          S.axpy(ys.data(), x.data(), c, n, p);
          V->axpy(yv.data(), x.data(), c, n, p);
          CHECK(ys == yv);
          auto zs = y, zv = y;
          S.scale(zs.data(), c, n, p);
          V->scale(zv.data(), c, n, p);
          CHECK(zs == zv);
        }
      }
    }
  }
}

TEST_CASE("dispatch honors forcing and falls back above the lane bound") {
  // Large p must always get the scalar kernel, whatever is forced.
  REQUIRE(fpk::force_kernels("scalar"));
  CHECK(std::string(fpk::active_kernels(7).name) == "scalar");
  for (const std::string& name : fpk::available_kernel_names()) {
    REQUIRE(fpk::force_kernels(name));
    CHECK(std::string(fpk::active_kernels(13).name) == name);
    CHECK(std::string(fpk::active_kernels(fpk::kVectorPMax + 2).name) ==
          "scalar");
  }
  CHECK_FALSE(fpk::force_kernels("no-such-isa"));
  REQUIRE(fpk::force_kernels("auto"));
}
