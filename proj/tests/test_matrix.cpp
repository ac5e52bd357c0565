#include <doctest.h>

#include <random>

#include "hhcap/fpkern.hpp"
#include "hhcap/matrix.hpp"

using namespace hhcap;

namespace {

Matrix from_rows(Field f, std::vector<std::vector<Rat>> rows) {
  Matrix m(f, rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m.set(i, j, rows[i][j]);
  return m;
}

Matrix random_matrix(std::mt19937_64& rng, Field f, std::size_t r,
                     std::size_t c, int density_pct = 60) {
  std::uniform_int_distribution<int> val(-4, 4);
  std::uniform_int_distribution<int> pct(0, 99);
  Matrix m(f, r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j)
      if (pct(rng) < density_pct) m.set(i, j, val(rng));
  return m;
}

const Field kFields[] = {Field::Q(), Field::Fp(5), Field::Fp(2),
                         Field::Fp(32749)};

}  // namespace

TEST_CASE("rank of a rank-one matrix over F_5") {
  Matrix a = from_rows(Field::Fp(5), {{1, 2}, {2, 4}});
  CHECK(a.rank() == 1);
}

TEST_CASE("kernel of [[1,2],[2,4]] over Q spans (2,-1)") {
  Matrix a = from_rows(Field::Q(), {{1, 2}, {2, 4}});
  Matrix k = a.kernel_basis();
  REQUIRE(k.cols() == 1);
  CHECK((a * k).is_zero());
  // Proportional to (2,-1).
  CHECK(k.get(0, 0) * Rat(-1) == k.get(1, 0) * Rat(2));
  CHECK(sgn(k.get(0, 0)) != 0);
}

TEST_CASE("solve diag(2,3) x = (1,1) gives (1/2, 1/3)") {
  Matrix a = from_rows(Field::Q(), {{2, 0}, {0, 3}});
  Matrix b = from_rows(Field::Q(), {{1}, {1}});
  auto x = a.solve(b);
  REQUIRE(x.has_value());
  CHECK(x->get(0, 0) == Rat(1, 2));
  CHECK(x->get(1, 0) == Rat(1, 3));
}

TEST_CASE("solve reports no solution without throwing") {
  Matrix a = from_rows(Field::Q(), {{1, 2}, {2, 4}});
  Matrix b = from_rows(Field::Q(), {{1}, {0}});
  CHECK_FALSE(a.solve(b).has_value());
  // Shape mismatch is a contract violation, not a NoSolution.
  Matrix bad(Field::Q(), 3, 1);
  CHECK_THROWS_AS((void)a.solve(bad), DimensionError);
}

TEST_CASE("kron follows the left-major pair index convention") {
  // kron(A,B)[(i*rB+ib),(j*cB+jb)] = A[i,j] B[ib,jb]
  Matrix a = from_rows(Field::Q(), {{1, 2}, {3, 4}});
  Matrix b = from_rows(Field::Q(), {{0, 5}, {6, 0}});
  Matrix k = a.kron(b);
  REQUIRE(k.rows() == 4);
  REQUIRE(k.cols() == 4);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t ib = 0; ib < 2; ++ib)
        for (std::size_t jb = 0; jb < 2; ++jb)
          CHECK(k.get(i * 2 + ib, j * 2 + jb) == a.get(i, j) * b.get(ib, jb));
}

TEST_CASE("kron is strictly associative") {
  std::mt19937_64 rng(7);
  for (Field f : kFields) {
    Matrix a = random_matrix(rng, f, 2, 3);
    Matrix b = random_matrix(rng, f, 3, 2);
    Matrix c = random_matrix(rng, f, 2, 2);
    CHECK(a.kron(b).kron(c) == a.kron(b.kron(c)));
  }
}

TEST_CASE("kron interchanges with composition") {
  std::mt19937_64 rng(8);
  for (Field f : kFields) {
    Matrix a = random_matrix(rng, f, 2, 3), a2 = random_matrix(rng, f, 3, 2);
    Matrix b = random_matrix(rng, f, 3, 2), b2 = random_matrix(rng, f, 2, 3);
    CHECK((a * a2).kron(b * b2) == a.kron(b) * a2.kron(b2));
  }
}

TEST_CASE("rank + nullity = columns, and kernels are kernels") {
  std::mt19937_64 rng(42);
  for (Field f : kFields) {
    for (int trial = 0; trial < 10; ++trial) {
      Matrix a = random_matrix(rng, f, 4, 6);
      Matrix k = a.kernel_basis();
      CHECK(a.rank() + k.cols() == a.cols());
      CHECK((a * k).is_zero());
      CHECK(k.rank() == k.cols());
    }
  }
}

TEST_CASE("solve round-trips constructed systems") {
  std::mt19937_64 rng(43);
  for (Field f : kFields) {
    for (int trial = 0; trial < 10; ++trial) {
      Matrix a = random_matrix(rng, f, 5, 4);
      Matrix x = random_matrix(rng, f, 4, 2);
      Matrix b = a * x;
      auto sol = a.solve(b);
      REQUIRE(sol.has_value());
      CHECK(a * *sol == b);
    }
  }
}

TEST_CASE("inverse works on random invertible matrices") {
  std::mt19937_64 rng(44);
  for (Field f : kFields) {
    for (int trial = 0; trial < 5; ++trial) {
      // Unitriangular product is always invertible.
      Matrix l = Matrix::identity(f, 4), u = Matrix::identity(f, 4);
      std::uniform_int_distribution<int> val(-3, 3);
      for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < i; ++j) {
          l.set(i, j, val(rng));
          u.set(j, i, val(rng));
        }
      Matrix a = l * u;
      auto inv = a.inverse();
      REQUIRE(inv.has_value());
      CHECK(a * *inv == Matrix::identity(f, 4));
      CHECK(*inv * a == Matrix::identity(f, 4));
    }
  }
}

TEST_CASE("singular matrices have no inverse") {
  Matrix a = from_rows(Field::Fp(5), {{1, 2}, {2, 4}});
  CHECK_FALSE(a.inverse().has_value());
}

TEST_CASE("quotient projection kills the span and sections split it") {
  std::mt19937_64 rng(45);
  for (Field f : kFields) {
    for (int trial = 0; trial < 8; ++trial) {
      Matrix s = random_matrix(rng, f, 6, 3);
      auto q = s.quotient();
      CHECK(q.proj.rows() == 6 - s.rank());
      CHECK((q.proj * s).is_zero());
      CHECK(q.proj * q.sect == Matrix::identity(f, q.proj.rows()));
      // proj has full row rank.
      CHECK(q.proj.rank() == q.proj.rows());
    }
  }
}

TEST_CASE("column space basis spans exactly the columns") {
  std::mt19937_64 rng(46);
  for (Field f : kFields) {
    Matrix a = random_matrix(rng, f, 5, 7);
    Matrix basis = a.column_space_basis();
    CHECK(basis.cols() == a.rank());
    RowEchelon e(f, 5);
    for (std::size_t j = 0; j < basis.cols(); ++j) e.insert(basis.col(j));
    for (std::size_t j = 0; j < a.cols(); ++j) CHECK(e.contains(a.col(j)));
    RowEchelon e2(f, 5);
    for (std::size_t j = 0; j < a.cols(); ++j) e2.insert(a.col(j));
    for (std::size_t j = 0; j < basis.cols(); ++j)
      CHECK(e2.contains(basis.col(j)));
  }
}

TEST_CASE("rref is idempotent and exposes pivots") {
  std::mt19937_64 rng(47);
  for (Field f : kFields) {
    Matrix a = random_matrix(rng, f, 4, 5);
    auto r = a.rref();
    auto r2 = r.mat.rref();
    CHECK(r.mat == r2.mat);
    CHECK(r.pivot_cols == r2.pivot_cols);
    for (std::size_t t = 0; t < r.pivot_cols.size(); ++t) {
      CHECK(r.mat.get(t, r.pivot_cols[t]) == Rat(1));
      for (std::size_t i = 0; i < a.rows(); ++i)
        if (i != t) CHECK(r.mat.entry_is_zero(i, r.pivot_cols[t]));
    }
  }
}

TEST_CASE("elimination results are identical under every kernel backend") {
  std::mt19937_64 rng(48);
  Field f = Field::Fp(13);
  Matrix a = random_matrix(rng, f, 8, 12);
  std::vector<Matrix> kernels, rrefs;
  for (const std::string& name : fpk::available_kernel_names()) {
    REQUIRE(fpk::force_kernels(name));
    kernels.push_back(a.kernel_basis());
    rrefs.push_back(a.rref().mat);
  }
  REQUIRE(fpk::force_kernels("auto"));
  for (std::size_t i = 1; i < kernels.size(); ++i) {
    CHECK(kernels[0] == kernels[i]);
    CHECK(rrefs[0] == rrefs[i]);
  }
}

TEST_CASE("sparse matrices mirror dense semantics") {
  std::mt19937_64 rng(49);
  for (Field f : kFields) {
    Matrix a = random_matrix(rng, f, 5, 6, 30);
    Matrix b = random_matrix(rng, f, 6, 4, 30);
    SparseMat sa = SparseMat::from_dense(a), sb = SparseMat::from_dense(b);
    CHECK(sa.to_dense() == a);
    CHECK((sa * sb).to_dense() == a * b);
    CHECK(sa.apply(b) == a * b);
    CHECK(sa.transpose().to_dense() == a.transpose());
    CHECK(sa.kron(sb).to_dense() == a.kron(b));
    CHECK((sa + sa).to_dense() == a + a);
    CHECK(sa.scalar_mul(Rat(-3)).to_dense() == a.scalar_mul(Rat(-3)));
    CHECK(sa.col_rank() == a.rank());
    CHECK((sa - sa).is_zero());
  }
}

TEST_CASE("sparse add_at cancels and accumulates") {
  SparseMat s(Field::Q(), 3, 3);
  s.add_at(1, 1, Rat(1, 2));
  s.add_at(1, 1, Rat(1, 2));
  s.add_at(2, 1, 3);
  s.add_at(2, 1, -3);
  CHECK(s.nnz() == 1);
  CHECK(s.to_dense().get(1, 1) == Rat(1));
}

TEST_CASE("row echelon accumulates rank and answers membership") {
  std::mt19937_64 rng(50);
  for (Field f : kFields) {
    Matrix a = random_matrix(rng, f, 6, 5);
    RowEchelon e(f, 5);
    std::size_t r = 0;
    for (std::size_t i = 0; i < 6; ++i) {
      std::vector<std::pair<std::size_t, Rat>> ent;
      for (std::size_t j = 0; j < 5; ++j)
        if (!a.entry_is_zero(i, j)) ent.emplace_back(j, a.get(i, j));
      if (e.insert_sparse(ent)) ++r;
    }
    CHECK(r == e.rank());
    CHECK(e.rank() == a.rank());
    // Every row of a is in the span; a random extension usually is not.
    for (std::size_t i = 0; i < 6; ++i) {
      Matrix row(f, 1, 5);
      for (std::size_t j = 0; j < 5; ++j) row.set(0, j, a.get(i, j));
      CHECK(e.contains(row));
    }
  }
}

TEST_CASE("field residue arithmetic round-trips rationals") {
  Field f = Field::Fp(7);
  Matrix m(f, 1, 1);
  m.set(0, 0, Rat(1, 2));  // 1/2 = 4 mod 7
  CHECK(m.get(0, 0) == Rat(4));
  m.set(0, 0, Rat(-1));
  CHECK(m.get(0, 0) == Rat(6));
  CHECK_THROWS_AS(m.set(0, 0, Rat(1, 7)), DimensionError);
}

TEST_CASE("field constructors validate primality") {
  CHECK_THROWS_AS(Field::Fp(1), DimensionError);
  CHECK_THROWS_AS(Field::Fp(6), DimensionError);
  CHECK_NOTHROW(Field::Fp(2));
  CHECK_NOTHROW(Field::Fp(2147483647));
  CHECK(Field::Fp(5).str() == "F5");
  CHECK(Field::Q().str() == "Q");
}
