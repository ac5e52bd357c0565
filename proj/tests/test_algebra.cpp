#include <doctest.h>

#include "hhcap/algebra.hpp"

using namespace hhcap;

namespace {

Matrix basis(const Algebra& a, std::size_t i) {
  return Matrix::basis_col(a.field(), a.dim(), i);
}

}  // namespace

TEST_CASE("dual numbers over Q and F_2 satisfy the axioms") {
  for (Field f : {Field::Q(), Field::Fp(2)}) {
    Algebra a = dual_numbers(f);
    CHECK(a.dim() == 2);
    CHECK(a.label(1) == "x");
    CHECK(validate_algebra(a).ok);
    // x·x = 0, 1·x = x·1 = x
    CHECK(a.mult(basis(a, 1), basis(a, 1)).is_zero());
    CHECK(a.mult(basis(a, 0), basis(a, 1)) == basis(a, 1));
    CHECK(a.mult(basis(a, 1), a.unit()) == basis(a, 1));
  }
}

TEST_CASE("unit axiom violations are reported with the offending index") {
  // e_0·e_0 = e_1 with e_1 declared as the unit: 1·e_0 = 0 ≠ e_0.
  Field f = Field::Q();
  Matrix mu(f, 2, 4);
  mu.set(1, 0, 1);
  Algebra a(f, {"u", "v"}, mu, Matrix::basis_col(f, 2, 1));
  AlgebraReport rep = validate_algebra(a);
  CHECK_FALSE(rep.ok);
  CHECK(rep.detail.find("unit axiom") != std::string::npos);
}

TEST_CASE("associativity violations name the offending triple") {
  // 1 proper unit; x·x = y, x·y = 1, y·x = y·y = 0 is not associative:
  // (x·x)·x = y·x = 0 but x·(x·x) = x·y = 1.
  Field f = Field::Q();
  Matrix mu(f, 3, 9);
  auto set_prod = [&](std::size_t i, std::size_t j, std::size_t k) {
    mu.set(k, i * 3 + j, 1);
  };
  for (std::size_t i = 0; i < 3; ++i) {
    set_prod(0, i, i);
    if (i != 0) set_prod(i, 0, i);
  }
  set_prod(1, 1, 2);  // x·x = y
  set_prod(1, 2, 0);  // x·y = 1
  Algebra a(f, {"1", "x", "y"}, mu, Matrix::basis_col(f, 3, 0));
  AlgebraReport rep = validate_algebra(a);
  CHECK_FALSE(rep.ok);
  CHECK(rep.detail.find("associativity") != std::string::npos);
  CHECK(rep.detail.find("(1, 1, 1)") != std::string::npos);
}

TEST_CASE("path algebra of 1→2 has dimension 3 and function-style composition") {
  Algebra a = path_algebra(Field::Q(), 2, {{1, 2}});
  REQUIRE(a.dim() == 3);
  CHECK(a.labels() == std::vector<std::string>{"e1", "e2", "a1"});
  CHECK(validate_algebra(a).ok);
  // For a: 1→2, e_2·a = a = a·e_1 and the other compositions vanish.
  CHECK(a.mult(basis(a, 1), basis(a, 2)) == basis(a, 2));
  CHECK(a.mult(basis(a, 2), basis(a, 0)) == basis(a, 2));
  CHECK(a.mult(basis(a, 0), basis(a, 2)).is_zero());
  CHECK(a.mult(basis(a, 2), basis(a, 1)).is_zero());
  CHECK(a.mult(basis(a, 2), basis(a, 2)).is_zero());
}

TEST_CASE("path algebra of 1→2→3 contains the composite path") {
  Algebra a = path_algebra(Field::Q(), 3, {{1, 2}, {2, 3}});
  REQUIRE(a.dim() == 6);
  CHECK(a.label(5) == "a2*a1");
  CHECK(validate_algebra(a).ok);
  // a2·a1 = the composite ("first a1, then a2"); a1·a2 = 0.
  CHECK(a.mult(basis(a, 4), basis(a, 3)) == basis(a, 5));
  CHECK(a.mult(basis(a, 3), basis(a, 4)).is_zero());
}

TEST_CASE("cyclic quivers are rejected") {
  CHECK_THROWS_AS(path_algebra(Field::Q(), 2, {{1, 2}, {2, 1}}),
                  ValidationError);
  CHECK_THROWS_AS(path_algebra(Field::Q(), 1, {{1, 1}}), ValidationError);
}

TEST_CASE("matrix algebra units and products") {
  Algebra a = matrix_algebra(Field::Q(), 2);
  REQUIRE(a.dim() == 4);
  CHECK(validate_algebra(a).ok);
  auto idx = [](std::size_t i, std::size_t j) { return i * 2 + j; };
  // E12·E21 = E11 and E21·E12 = E22
  CHECK(a.mult(basis(a, idx(0, 1)), basis(a, idx(1, 0))) ==
        basis(a, idx(0, 0)));
  CHECK(a.mult(basis(a, idx(1, 0)), basis(a, idx(0, 1))) ==
        basis(a, idx(1, 1)));
  CHECK(a.mult(basis(a, idx(0, 1)), basis(a, idx(0, 1))).is_zero());
  CHECK(validate_algebra(matrix_algebra(Field::Fp(5), 3)).ok);
}

TEST_CASE("opposite reverses products and is an involution") {
  Algebra m = matrix_algebra(Field::Q(), 2);
  Algebra mo = opposite(m);
  CHECK(validate_algebra(mo).ok);
  auto idx = [](std::size_t i, std::size_t j) { return i * 2 + j; };
  // In M_2^op, E12 ∘ E21 means E21·E12 = E22.
  CHECK(mo.mult(basis(mo, idx(0, 1)), basis(mo, idx(1, 0))) ==
        basis(mo, idx(1, 1)));
  CHECK(opposite(mo).mu() == m.mu());
}

TEST_CASE("tensor and enveloping algebras") {
  Algebra d = dual_numbers(Field::Q());
  Algebra t = tensor_algebra(d, d);
  REQUIRE(t.dim() == 4);
  CHECK(validate_algebra(t).ok);
  CHECK(t.unit() == d.unit().kron(d.unit()));
  // (x⊗1)·(x⊗1) = 0 and (x⊗1)·(1⊗x) = x⊗x (indices: x⊗1 = 2, 1⊗x = 1, x⊗x = 3)
  CHECK(t.mult(basis(t, 2), basis(t, 2)).is_zero());
  CHECK(t.mult(basis(t, 2), basis(t, 1)) == basis(t, 3));

  Algebra e = enveloping(path_algebra(Field::Q(), 2, {{1, 2}}));
  CHECK(e.dim() == 9);
  CHECK(validate_algebra(e).ok);
  CHECK(validate_algebra(enveloping(matrix_algebra(Field::Fp(3), 2))).ok);
}
