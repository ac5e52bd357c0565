#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <gmpxx.h>

namespace hhcap {

// Exact scalar used for all user-facing entries regardless of the coefficient
// field. Over F_p values are canonical residues 0..p-1 with denominator 1.
using Rat = mpq_class;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Shape/field contract violations (caller bug), as opposed to a linear system
// simply having no solution (reported via std::optional).
struct DimensionError : Error {
  using Error::Error;
};
struct FieldMismatchError : Error {
  using Error::Error;
};
// A complex term exceeded the configured size budget.
struct BudgetError : Error {
  using Error::Error;
};
// A degree outside the trusted range of a truncated object was requested.
struct TruncationError : Error {
  using Error::Error;
};
// A chain-level lift or descent problem that the theory guarantees solvable
// turned out not to be (wrong input data), or validation of equivalence data
// failed.
struct LiftError : Error {
  using Error::Error;
};
struct ValidationError : Error {
  using Error::Error;
};
// A module offered as a progenerator failed one of its certificates
// (projectivity splitting or trace-ideal computation).
struct NotProgeneratorError : Error {
  using Error::Error;
};
// Tilting input data violated a precondition (inexact presentation,
// non-projective terms, self-extensions) or a derived construction on it
// could not be completed.
struct TiltingError : Error {
  using Error::Error;
};

bool is_prime_u32(std::uint32_t n);

// Coefficient field: the rationals or a prime field F_p, p < 2^31.
class Field {
 public:
  static Field Q() { return Field(0); }
  static Field Fp(std::uint32_t p);

  bool is_q() const { return p_ == 0; }
  bool is_fp() const { return p_ != 0; }
  std::uint32_t p() const { return p_; }

  bool operator==(const Field&) const = default;

  std::string str() const;

 private:
  explicit Field(std::uint32_t p) : p_(p) {}
  std::uint32_t p_;  // 0 encodes Q
};

// Residue of an exact rational mod p; throws DimensionError if the
// denominator vanishes mod p.
std::uint32_t fp_residue(const Rat& x, std::uint32_t p);

std::uint32_t fp_inverse(std::uint32_t a, std::uint32_t p);

// Parse "n" or "n/d" (optionally signed) into an exact rational.
Rat parse_rational(const std::string& s);

// Canonical short form: "n" if integral else "n/d".
std::string rational_str(const Rat& x);

}  // namespace hhcap
