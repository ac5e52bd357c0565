#include "hhcap/field.hpp"

namespace hhcap {

bool is_prime_u32(std::uint32_t n) {
  if (n < 2) return false;
  for (std::uint32_t d : {2u, 3u, 5u, 7u, 11u, 13u, 17u, 19u, 23u, 29u, 31u}) {
    if (n == d) return true;
    if (n % d == 0) return false;
  }
  // Deterministic Miller-Rabin; bases {2,3,5,7} cover all n < 3.2e9.
  std::uint32_t d = n - 1;
  int r = 0;
  while ((d & 1) == 0) d >>= 1, ++r;
  auto powmod = [n](std::uint64_t b, std::uint32_t e) {
    std::uint64_t acc = 1;
    b %= n;
    while (e) {
      if (e & 1) acc = acc * b % n;
      b = b * b % n;
      e >>= 1;
    }
    return static_cast<std::uint32_t>(acc);
  };
  for (std::uint32_t a : {2u, 3u, 5u, 7u}) {
    std::uint64_t x = powmod(a, d);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int i = 1; i < r && composite; ++i) {
      x = x * x % n;
      if (x == n - 1) composite = false;
    }
    if (composite) return false;
  }
  return true;
}

Field Field::Fp(std::uint32_t p) {
  if (p >= (1u << 31))
    throw DimensionError("field characteristic must be < 2^31");
  if (!is_prime_u32(p))
    throw DimensionError("field characteristic " + std::to_string(p) +
                         " is not prime");
  return Field(p);
}

std::string Field::str() const {
  return is_q() ? "Q" : "F" + std::to_string(p_);
}

std::uint32_t fp_inverse(std::uint32_t a, std::uint32_t p) {
  // Extended Euclid on signed 64-bit.
  std::int64_t t = 0, nt = 1, r = p, nr = a % p;
  while (nr != 0) {
    std::int64_t q = r / nr;
    std::int64_t tmp = t - q * nt;
    t = nt;
    nt = tmp;
    tmp = r - q * nr;
    r = nr;
    nr = tmp;
  }
  if (r != 1) throw DimensionError("not invertible mod p");
  if (t < 0) t += p;
  return static_cast<std::uint32_t>(t);
}

std::uint32_t fp_residue(const Rat& x, std::uint32_t p) {
  mpz_class num = x.get_num(), den = x.get_den();
  std::uint32_t n = static_cast<std::uint32_t>(mpz_fdiv_ui(num.get_mpz_t(), p));
  std::uint32_t d = static_cast<std::uint32_t>(mpz_fdiv_ui(den.get_mpz_t(), p));
  if (d == 0)
    throw DimensionError("rational with denominator divisible by " +
                         std::to_string(p));
  if (n == 0) return 0;
  return static_cast<std::uint32_t>(std::uint64_t(n) * fp_inverse(d, p) % p);
}

Rat parse_rational(const std::string& s) {
  if (s.empty()) throw DimensionError("empty rational literal");
  try {
    Rat q(s);
    q.canonicalize();
    return q;
  } catch (const std::invalid_argument&) {
    throw DimensionError("bad rational literal: " + s);
  }
}

std::string rational_str(const Rat& x) {
  return x.get_den() == 1 ? x.get_num().get_str() : x.get_str();
}

}  // namespace hhcap
