#include <doctest.h>

#include "hhcap/algebra.hpp"
#include "hhcap/complex.hpp"
#include "hhcap/matrix.hpp"

using namespace hhcap;

namespace {

Matrix from_rows(Field f, std::vector<std::vector<Rat>> rows) {
  Matrix m(f, rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m.set(i, j, rows[i][j]);
  return m;
}

SparseMat sp(const Matrix& m) { return SparseMat::from_dense(m); }

// Two-term complex 0 → k² →d k² → 0 with d = e_{01}: H_0 and H_1 are both
// one-dimensional.
Complex two_term(Field f) {
  Matrix d = from_rows(f, {{0, 1}, {0, 0}});
  return Complex(f, 0, {2, 2}, {sp(d)}, TrustedRange{});
}

// The 2-periodic complex A ←x· A ←x· ... ←x· A (n_top + 1 terms) over the
// dual numbers A = k[x]/(x²), with multiplication by x as every
// differential.
Complex dual_periodic(Field f, int n_top) {
  Matrix x = from_rows(f, {{0, 0}, {1, 0}});
  std::vector<std::size_t> dims(static_cast<std::size_t>(n_top) + 1, 2);
  std::vector<SparseMat> diffs(static_cast<std::size_t>(n_top), sp(x));
  return Complex(f, 0, dims, diffs, TrustedRange{-kDegInf, n_top - 1});
}

// Free rank-one complex over the dual numbers, A ←x· A in degrees 0 and 1,
// with the left-action family and one generator per degree.
Complex dual_free_pair(Field f, AlgebraPtr a) {
  Matrix x = Matrix::basis_col(f, 2, 1);
  Complex c(f, 0, {2, 2}, {sp(a->left_mult(x))}, TrustedRange{});
  ActionFamily left;
  left.alg = a;
  for (int n = 0; n <= 1; ++n) {
    std::vector<SparseMat> acts;
    for (std::size_t i = 0; i < 2; ++i) {
      Matrix e = Matrix::basis_col(f, 2, i);
      acts.push_back(sp(a->left_mult(e)));
    }
    left.act[n] = acts;
  }
  c.families["left"] = left;
  c.free_data[0] = {FreeBlock{0, 2, 1, 1}};
  c.free_data[1] = {FreeBlock{0, 2, 1, 1}};
  return c;
}

}  // namespace

TEST_CASE("complex constructor validates differential shapes") {
  Field f = Field::Q();
  Matrix d = from_rows(f, {{0, 1}, {0, 0}});
  CHECK_THROWS_AS(Complex(f, 0, {2, 3}, {sp(d)}, TrustedRange{}),
                  DimensionError);
  CHECK_THROWS_AS(Complex(f, 0, {2, 2}, {}, TrustedRange{}), DimensionError);
  CHECK_THROWS_AS(Complex(f, 0, {2, 2}, {SparseMat(Field::Fp(5), 2, 2)},
                          TrustedRange{}),
                  FieldMismatchError);
}

TEST_CASE("check_differential accepts d^2 = 0 and rejects d^2 != 0") {
  Field f = Field::Q();
  Matrix d = from_rows(f, {{0, 1}, {0, 0}});
  Complex good(f, 0, {2, 2, 2}, {sp(d), sp(d)}, TrustedRange{});
  CHECK_NOTHROW(good.check_differential());
  Matrix id2 = Matrix::identity(f, 2);
  Complex bad(f, 0, {2, 2, 2}, {sp(id2), sp(id2)}, TrustedRange{});
  CHECK_THROWS_AS(bad.check_differential(), ValidationError);
}

TEST_CASE("dim and diff are zero-shaped outside the stored window") {
  Complex c = two_term(Field::Q());
  CHECK(c.dim(-1) == 0);
  CHECK(c.dim(2) == 0);
  CHECK(c.diff(0).rows() == 0);
  CHECK(c.diff(0).cols() == 2);
  CHECK(c.diff(2).rows() == 2);
  CHECK(c.diff(2).cols() == 0);
  CHECK(c.total_dim() == 4);
}

TEST_CASE("homology of the two-term complex, with coordinates mod boundaries") {
  for (Field f : {Field::Q(), Field::Fp(5)}) {
    Complex c = two_term(f);
    HomologySpace h0 = homology(c, 0);
    HomologySpace h1 = homology(c, 1);
    CHECK(h0.dim() == 1);
    CHECK(h1.dim() == 1);
    // The surviving degree-0 class is e_1; e_0 is a boundary.
    Matrix z = Matrix(f, 2, 1);
    z.set(0, 0, 7);
    z.set(1, 0, 1);
    Matrix coords = h0.coords(z);
    CHECK(coords.get(0, 0) == Rat(1));
    Matrix b = Matrix::basis_col(f, 2, 0);
    CHECK(h0.coords(b).is_zero());
    // A non-cycle in degree 1 is rejected.
    CHECK_THROWS_AS((void)h1.coords(Matrix::basis_col(f, 2, 1)),
                    ValidationError);
  }
}

TEST_CASE("periodic dual-numbers complex has homology 1, 0, ..., 0 inside "
          "the trusted range") {
  Complex c = dual_periodic(Field::Q(), 4);
  CHECK(homology(c, 0).dim() == 1);
  for (int n = 1; n <= 3; ++n) CHECK(homology(c, n).dim() == 0);
  CHECK_THROWS_AS((void)homology(c, 4), TruncationError);
  CHECK_THROWS_AS((void)homology(c, 5), TruncationError);
}

TEST_CASE("shift relocates degrees and flips the differential sign when odd") {
  Complex c = two_term(Field::Q());
  Complex s1 = shift(c, 1);
  CHECK(s1.lo() == 1);
  CHECK(s1.dim(1) == 2);
  CHECK(s1.diff(2) == c.diff(1).scalar_mul(Rat(-1)));
  Complex s2 = shift(c, 2);
  CHECK(s2.diff(3) == c.diff(1));
  CHECK(homology(s1, 1).dim() == 1);
  CHECK(homology(s1, 2).dim() == 1);
}

TEST_CASE("chain map validation and identity") {
  ComplexPtr c = share(two_term(Field::Q()));
  ChainMap id = ChainMap::identity(c);
  CHECK(id.is_chain_map());
  // A degree-0 endomap that fails to commute with d.
  std::map<int, SparseMat> comps;
  comps[0] = SparseMat::identity(Field::Q(), 2);
  comps[1] = sp(from_rows(Field::Q(), {{0, 0}, {1, 0}}));
  ChainMap bad(c, c, 0, comps);
  CHECK_FALSE(bad.is_chain_map());
  // Shape violations are contract errors.
  std::map<int, SparseMat> wrong;
  wrong[0] = SparseMat(Field::Q(), 3, 2);
  CHECK_THROWS_AS(ChainMap(c, c, 0, wrong), DimensionError);
}

TEST_CASE("chain map algebra: compose, add, scalar") {
  ComplexPtr c = share(two_term(Field::Q()));
  ChainMap id = ChainMap::identity(c);
  ChainMap z = ChainMap::zero(c, c, 0);
  ChainMap two = id + id;
  CHECK(two.component(0) == id.component(0).scalar_mul(Rat(2)));
  CHECK((two - id.scalar_mul(Rat(2))).component(0).is_zero());
  ChainMap comp = two.compose(id);
  CHECK(comp.component(1) == two.component(1));
  CHECK(z.compose(id).component(0).is_zero());
  Matrix v = Matrix::basis_col(Field::Q(), 2, 1);
  CHECK(two.apply(0, v) == v.scalar_mul(Rat(2)));
}

TEST_CASE("induced map on homology of the identity is the identity") {
  ComplexPtr c = share(dual_periodic(Field::Q(), 3));
  ChainMap id = ChainMap::identity(c);
  Matrix m = induced_on_homology(id, 0);
  CHECK(m == Matrix::identity(Field::Q(), 1));
  CHECK(induced_on_homology(id, 1).rows() == 0);
}

TEST_CASE("is_quasi_iso distinguishes genuine quasi-isomorphisms") {
  Field f = Field::Q();
  // Y: 0 → k →(0,1)ᵀ k² → 0 resolves k via the projection onto the first
  // coordinate.
  Matrix d = from_rows(f, {{0}, {1}});
  ComplexPtr y = share(Complex(f, 0, {2, 1}, {sp(d)}, TrustedRange{}));
  ComplexPtr zk = share(Complex(f, 0, {1}, {}, TrustedRange{}));
  std::map<int, SparseMat> comps;
  comps[0] = sp(from_rows(f, {{1, 0}}));
  ChainMap s(y, zk, 0, comps);
  CHECK(s.is_chain_map());
  CHECK(is_quasi_iso(s));
  // The zero map has matching homology dimensions here but induces the zero
  // map on H_0, so it is not a quasi-isomorphism.
  CHECK_FALSE(is_quasi_iso(ChainMap::zero(y, zk, 0)));
  // Between contractible complexes the zero map is a quasi-isomorphism.
  Matrix did = Matrix::identity(f, 1);
  ComplexPtr contr = share(Complex(f, 0, {1, 1}, {sp(did)}, TrustedRange{}));
  CHECK(is_quasi_iso(ChainMap::zero(contr, contr, 0)));
}

TEST_CASE("homotopic: identity of a contractible complex vs zero") {
  Field f = Field::Q();
  Matrix did = Matrix::identity(f, 1);
  ComplexPtr contr = share(Complex(f, 0, {1, 1}, {sp(did)}, TrustedRange{}));
  ChainMap id = ChainMap::identity(contr);
  ChainMap z = ChainMap::zero(contr, contr, 0);
  CHECK(homotopic(id, z));
  // On k[0] the identity is not null-homotopic.
  ComplexPtr zk = share(Complex(f, 0, {1}, {}, TrustedRange{}));
  CHECK_FALSE(homotopic(ChainMap::identity(zk), ChainMap::zero(zk, zk, 0)));
}

TEST_CASE("check_homotopy verifies an explicit witness") {
  Field f = Field::Q();
  Matrix did = Matrix::identity(f, 1);
  ComplexPtr contr = share(Complex(f, 0, {1, 1}, {sp(did)}, TrustedRange{}));
  ChainMap id = ChainMap::identity(contr);
  ChainMap z = ChainMap::zero(contr, contr, 0);
  Homotopy h{contr, contr, 0, {{0, sp(did)}}};
  CHECK(check_homotopy(id, z, h));
  Homotopy wrong{contr, contr, 0, {{0, sp(did.scalar_mul(Rat(2)))}}};
  CHECK_FALSE(check_homotopy(id, z, wrong));
}

TEST_CASE("free-structure homotopy solving finds a module-linear witness") {
  Field f = Field::Q();
  AlgebraPtr a = share(dual_numbers(f));
  ComplexPtr c = share(dual_free_pair(f, a));
  Matrix x = Matrix::basis_col(f, 2, 1);
  std::map<int, SparseMat> comps;
  comps[0] = sp(a->left_mult(x));
  comps[1] = sp(a->left_mult(x));
  ChainMap px(c, c, 0, comps);
  CHECK(px.is_chain_map());
  ChainMap z = ChainMap::zero(c, c, 0);

  auto h = homotopy_between(px, z);
  REQUIRE(h.has_value());
  CHECK(check_homotopy(px, z, *h));
  // Asking for equivariance over the left family keeps it solvable, and the
  // witness commutes with the action.
  LinearityReq lin;
  lin.families = {"left"};
  auto h2 = homotopy_between(px, z, lin);
  REQUIRE(h2.has_value());
  for (std::size_t i = 0; i < 2; ++i) {
    Matrix e = Matrix::basis_col(f, 2, i);
    SparseMat act = sp(a->left_mult(e));
    CHECK(h2->component(0) * act == act * h2->component(0));
  }
  // The identity endomap is not null-homotopic here (homology is nonzero).
  CHECK_FALSE(homotopy_between(ChainMap::identity(c), z).has_value());
}

TEST_CASE("lift through a quasi-isomorphism, including the failing case") {
  Field f = Field::Q();
  Matrix d = from_rows(f, {{0}, {1}});
  ComplexPtr y = share(Complex(f, 0, {2, 1}, {sp(d)}, TrustedRange{}));
  ComplexPtr zk = share(Complex(f, 0, {1}, {}, TrustedRange{}));
  std::map<int, SparseMat> scomp;
  scomp[0] = sp(from_rows(f, {{1, 0}}));
  ChainMap s(y, zk, 0, scomp);

  ComplexPtr p = share(Complex(f, 0, {1}, {}, TrustedRange{}));
  std::map<int, SparseMat> gcomp;
  gcomp[0] = SparseMat::identity(f, 1);
  ChainMap g(p, zk, 0, gcomp);

  LiftResult lr = lift_through_quasi_iso(g, s, 0);
  CHECK(lr.lift.is_chain_map());
  CHECK(s.compose(lr.lift).component(0) == g.component(0));
  CHECK(lr.homotopy.comps.empty());

  // Lifting through a map that misses the class fails.
  ChainMap s2 = ChainMap::zero(y, zk, 0);
  CHECK_THROWS_AS((void)lift_through_quasi_iso(g, s2, 0), LiftError);
}

TEST_CASE("lift through quasi-iso with a free source uses generator values") {
  Field f = Field::Q();
  AlgebraPtr a = share(dual_numbers(f));
  // P: the free pair A ←x A with left-module structure.
  ComplexPtr p = share(dual_free_pair(f, a));
  // Y: same complex; s: identity (trivial quasi-iso); g: multiplication by
  // x, lifted through the identity must return itself.
  ComplexPtr y = p;
  ChainMap s = ChainMap::identity(y);
  Matrix x = Matrix::basis_col(f, 2, 1);
  std::map<int, SparseMat> comps;
  comps[0] = sp(a->left_mult(x));
  comps[1] = sp(a->left_mult(x));
  ChainMap g(p, y, 0, comps);
  LiftResult lr = lift_through_quasi_iso(g, s, 1);
  CHECK(lr.lift.is_chain_map());
  for (int n = 0; n <= 1; ++n)
    CHECK((s.compose(lr.lift).component(n) - g.component(n) -
           y->diff(n + 1) * lr.homotopy.component(n) -
           lr.homotopy.component(n - 1) * p->diff(n))
              .is_zero());
}

TEST_CASE("tensor over the base field multiplies dimensions and squares to "
          "zero") {
  Field f = Field::Q();
  Matrix did = Matrix::identity(f, 1);
  Complex c(f, 0, {1, 1}, {sp(did)}, TrustedRange{});
  Algebra base = path_algebra(f, 1, {});
  TensorOver t = tensor_over_full(c, c, base);
  CHECK(t.complex.dim(0) == 1);
  CHECK(t.complex.dim(1) == 2);
  CHECK(t.complex.dim(2) == 1);
  t.complex.check_differential();
  // Contractible ⊗ contractible is contractible.
  for (int n = 0; n <= 2; ++n) CHECK(homology(t.complex, n).dim() == 0);
  // Koszul sign: d(x⊗y) on the degree-(1,1) block is dx⊗y − x⊗dy.
  CHECK(t.complex.diff(2).col_entries(0).size() == 2);
  Rat prod = Rat(1);
  for (const auto& [i, v] : t.complex.diff(2).col_entries(0)) prod *= v;
  CHECK(prod == Rat(-1));
}

TEST_CASE("tensor over an algebra contracts the middle actions") {
  Field f = Field::Q();
  AlgebraPtr a = share(dual_numbers(f));
  auto one_term = [&](bool with_left, bool with_right) {
    Complex c(f, 0, {2}, {}, TrustedRange{});
    for (int which = 0; which < 2; ++which) {
      bool want = which == 0 ? with_left : with_right;
      if (!want) continue;
      ActionFamily fam;
      fam.alg = a;
      fam.contravariant = (which == 1);
      std::vector<SparseMat> acts;
      for (std::size_t i = 0; i < 2; ++i) {
        Matrix e = Matrix::basis_col(f, 2, i);
        acts.push_back(
            sp(which == 0 ? a->left_mult(e) : a->right_mult(e)));
      }
      fam.act[0] = acts;
      c.families[which == 0 ? "left" : "right"] = fam;
    }
    return c;
  };
  Complex cl = one_term(true, true);
  Complex cr = one_term(true, true);
  TensorOver t = tensor_over_full(cl, cr, *a);
  // A ⊗_A A ≅ A.
  CHECK(t.complex.dim(0) == 2);
  CHECK(t.proj.at(0).rows() == 2);
  CHECK((t.proj.at(0) * t.sect.at(0)) == SparseMat::identity(f, 2));
  // Carried families: outer left and outer right survive.
  CHECK(t.complex.has_family("left"));
  CHECK(t.complex.has_family("right"));
  // The left action of x on the contracted product is nonzero (it is
  // multiplication by x on A), and it squares to zero.
  const SparseMat& ax = t.complex.family_action("left", 0, 1);
  CHECK_FALSE(ax.is_zero());
  CHECK((ax * ax).is_zero());
}

TEST_CASE("extend_free_map spreads generator values over the free basis") {
  Field f = Field::Q();
  AlgebraPtr a = share(dual_numbers(f));
  Complex c = dual_free_pair(f, a);
  Matrix vals(f, 2, 1);
  vals.set(1, 0, Rat(1));  // generator ↦ x
  SparseMat ext = extend_free_map(c, 0, c, 1, vals);
  // Column 0 (generator itself) is x; column 1 (x · generator) is x·x = 0.
  CHECK(ext.col_entries(0).size() == 1);
  CHECK(ext.col_entries(0)[0].first == 1);
  CHECK(ext.col_entries(1).empty());
}

TEST_CASE("trusted ranges propagate through shift and tensor") {
  Field f = Field::Q();
  Complex c = dual_periodic(f, 4);  // trusted up to 3
  Complex s = shift(c, 2);
  CHECK(s.trusted().hi == 5);
  CHECK_THROWS_AS((void)homology(s, 6), TruncationError);
  Complex m(f, 0, {1}, {}, TrustedRange{});
  Algebra base = path_algebra(f, 1, {});
  Complex t = tensor_over(c, m, base);
  CHECK(t.trusted().hi == 3);
  CHECK(homology(t, 3).dim() == 0);
  CHECK_THROWS_AS((void)homology(t, 4), TruncationError);
}
