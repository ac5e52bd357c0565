// Cup and cap products: chain-level identities, behaviour across
// characteristics, and agreement of cap with its realization on the bar
// resolution.

#include <cstddef>
#include <vector>

#include "doctest.h"
#include "hhcap/algebra.hpp"
#include "hhcap/bartensor.hpp"
#include "hhcap/hochschild.hpp"
#include "hhcap/module.hpp"
#include "hhcap/products.hpp"

using namespace hhcap;

namespace {

constexpr std::size_t kBig = 200000;

AlgebraPtr dual(Field f) { return share(dual_numbers(f)); }
AlgebraPtr pathA2(Field f) { return share(path_algebra(f, 2, {{1, 2}})); }

// Deterministic algebra-valued cochain of tensor degree n with small
// patterned entries; generally not closed.
Matrix patterned(const Algebra& a, int n, int seed) {
  std::size_t w = 1;
  for (int i = 0; i < n; ++i) w *= a.dim();
  Matrix out(a.field(), a.dim(), w);
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < w; ++j)
      out.set(i, j,
              Rat(static_cast<int>((i * 3 + j * 5 + static_cast<std::size_t>(
                                                        seed)) %
                                   7) -
                  3));
  return out;
}

// The derivation x·d/dx on the dual numbers: f(1) = 0, f(x) = x. Closed
// over every field.
Matrix dual_derivation(Field f) {
  Matrix d(f, 2, 2);
  d.set(1, 1, Rat(1));
  return d;
}

// f(1) = 0, f(x) = 1 on the dual numbers; closed exactly in
// characteristic 2, where its cup square generates a nonzero class.
Matrix dual_translation(Field f) {
  Matrix d(f, 2, 2);
  d.set(0, 1, Rat(1));
  return d;
}

}  // namespace

TEST_CASE("cup is unital and associative at chain level") {
  for (AlgebraPtr a : {dual(Field::Q()), pathA2(Field::Q())}) {
    Matrix u = a->unit();
    for (int n = 0; n <= 2; ++n) {
      Matrix g = patterned(*a, n, n + 1);
      CHECK(cup(*a, u, g) == g);
      CHECK(cup(*a, g, u) == g);
    }
    Matrix f = patterned(*a, 1, 2);
    Matrix g = patterned(*a, 1, 3);
    Matrix h = patterned(*a, 2, 4);
    CHECK(cup(*a, cup(*a, f, g), h) == cup(*a, f, cup(*a, g, h)));
  }
}

TEST_CASE("cup obeys the Leibniz rule against the cochain differential") {
  for (AlgebraPtr a :
       {dual(Field::Q()), pathA2(Field::Q()), dual(Field::Fp(3))}) {
    Cochains co = hochschild_cochains(a, regular_bimodule(a), 4, kBig);
    for (int p : {0, 1, 2})
      for (int q : {0, 1}) {
        Matrix f = patterned(*a, p, p + 2 * q + 1);
        Matrix g = patterned(*a, q, 3 * p + q + 2);
        Matrix lhs = cochain_delta(co, cup(*a, f, g));
        Matrix fdg = cup(*a, f, cochain_delta(co, g));
        Matrix rhs = cup(*a, cochain_delta(co, f), g) +
                     (p % 2 ? fdg.scalar_mul(Rat(-1)) : fdg);
        CHECK(lhs == rhs);
      }
  }
}

TEST_CASE("cup squares of degree-one cocycles depend on the characteristic") {
  // Over the rationals the square of the derivation vanishes identically.
  AlgebraPtr aq = dual(Field::Q());
  Cochains coq = hochschild_cochains(aq, regular_bimodule(aq), 4, kBig);
  Matrix der = dual_derivation(Field::Q());
  CHECK(is_cocycle(coq, der));
  CHECK(cup(*aq, der, der).is_zero());
  // The translation cochain is not even closed in characteristic zero.
  CHECK_FALSE(is_cocycle(coq, dual_translation(Field::Q())));

  // In characteristic two it is closed and its square generates a nonzero
  // class in degree two.
  AlgebraPtr a2 = dual(Field::Fp(2));
  Cochains co2 = hochschild_cochains(a2, regular_bimodule(a2), 4, kBig);
  Matrix t = dual_translation(Field::Fp(2));
  CHECK(is_cocycle(co2, t));
  Matrix sq = cup(*a2, t, t);
  CHECK_FALSE(sq.is_zero());
  CHECK(is_cocycle(co2, sq));
  HomologySpace h2 = hochschild_cohomology(co2, 2);
  CHECK(h2.dim() == 2);
  CHECK_FALSE(h2.coords(cochain_to_column(sq)).is_zero());
  // The derivation squares to zero in every characteristic.
  CHECK(cup(*a2, dual_derivation(Field::Fp(2)), dual_derivation(Field::Fp(2)))
            .is_zero());
}

TEST_CASE("cupping a coboundary with a cocycle lands in the coboundaries") {
  AlgebraPtr a = dual(Field::Q());
  Cochains co = hochschild_cochains(a, regular_bimodule(a), 4, kBig);
  Matrix h0 = patterned(*a, 0, 5);
  Matrix c = cochain_delta(co, h0);
  Matrix der = dual_derivation(Field::Q());
  Matrix w = cup(*a, c, der);
  CHECK(is_cocycle(co, w));
  HomologySpace h2 = hochschild_cohomology(co, 2);
  CHECK(h2.coords(cochain_to_column(w)).is_zero());
}

TEST_CASE("cap with the unit cochain is the identity in every degree") {
  for (AlgebraPtr a : {dual(Field::Q()), pathA2(Field::Q())}) {
    Chains ch = hochschild_chains(a, regular_bimodule(a), 4, kBig);
    ChainMap capu = cap_map(ch, a->unit());
    CHECK(capu.degree() == 0);
    for (int n = 0; n <= 4; ++n)
      CHECK(capu.component(n) ==
            SparseMat::identity(a->field(), ch.complex->dim(n)));
  }
}

TEST_CASE("cap acts by right multiplication with the cochain value") {
  AlgebraPtr a = dual(Field::Q());
  Chains ch = hochschild_chains(a, regular_bimodule(a), 4, kBig);
  Matrix der = dual_derivation(Field::Q());
  // der ∩ (1 ⊗ x) = 1·der(x) = x in the degree-zero term.
  Matrix z = Matrix::basis_col(Field::Q(), 4, 1);
  CHECK(cap_chain(ch, der, 1, z) == Matrix::basis_col(Field::Q(), 2, 1));
  // der ∩ (x ⊗ x) = x·x = 0.
  Matrix z2 = Matrix::basis_col(Field::Q(), 4, 3);
  CHECK(cap_chain(ch, der, 1, z2).is_zero());
}

TEST_CASE("cap boundary identity couples the face sum with the cochain "
          "differential") {
  for (AlgebraPtr a :
       {dual(Field::Q()), pathA2(Field::Q()), dual(Field::Fp(3))}) {
    Chains ch = hochschild_chains(a, regular_bimodule(a), 4, kBig);
    Cochains co = hochschild_cochains(a, regular_bimodule(a), 4, kBig);
    for (int m : {0, 1, 2}) {
      Matrix f = patterned(*a, m, m + 1);
      Matrix df = cochain_delta(co, f);
      for (int n = m; n <= 4; ++n) {
        SparseMat lhs = ch.complex->diff(n - m) * cap_matrix(ch, f, n);
        SparseMat rhs = cap_matrix(ch, f, n - 1) * ch.complex->diff(n) -
                        cap_matrix(ch, df, n);
        if (m % 2) rhs = rhs.scalar_mul(Rat(-1));
        CHECK(lhs == rhs);
      }
    }
  }
}

TEST_CASE("cap is a chain map exactly for closed cochains") {
  AlgebraPtr a = dual(Field::Q());
  Chains ch = hochschild_chains(a, regular_bimodule(a), 4, kBig);
  ChainMap capd = cap_map(ch, dual_derivation(Field::Q()));
  CHECK(capd.degree() == -1);
  CHECK(capd.is_chain_map());
  CHECK_THROWS_AS(cap_map(ch, dual_translation(Field::Q())), ValidationError);

  AlgebraPtr a2 = dual(Field::Fp(2));
  Chains ch2 = hochschild_chains(a2, regular_bimodule(a2), 4, kBig);
  ChainMap capt = cap_map(ch2, dual_translation(Field::Fp(2)));
  CHECK(capt.degree() == -1);
  CHECK_FALSE(capt.component(1).is_zero());
}

TEST_CASE("cap makes the chains a module over the cup product at chain "
          "level") {
  for (AlgebraPtr a : {dual(Field::Q()), pathA2(Field::Q())}) {
    Chains ch = hochschild_chains(a, regular_bimodule(a), 4, kBig);
    const std::vector<std::pair<int, int>> degs = {
        {0, 1}, {1, 1}, {1, 2}, {2, 1}};
    for (auto [p, m] : degs) {
      Matrix g = patterned(*a, p, 6 + p);
      Matrix f = patterned(*a, m, 9 + m);
      Matrix gf = cup(*a, g, f);
      for (int n = p + m; n <= 4; ++n)
        CHECK(cap_matrix(ch, gf, n) ==
              cap_matrix(ch, f, n - p) * cap_matrix(ch, g, n));
    }
  }
}

TEST_CASE("cap classes on the dual numbers") {
  AlgebraPtr a = dual(Field::Q());
  Chains ch = hochschild_chains(a, regular_bimodule(a), 4, kBig);
  Cochains co = hochschild_cochains(a, regular_bimodule(a), 4, kBig);
  Matrix der = dual_derivation(Field::Q());

  // The unit acts as the identity on every homology space.
  for (int n = 0; n <= 3; ++n) {
    HomologySpace hn = hochschild_homology(ch, n);
    CHECK(cap_on_homology(ch, a->unit(), n) ==
          Matrix::identity(Field::Q(), hn.dim()));
  }

  // [der] ∩ [1⊗x] = [x] is nonzero in degree zero, while the cap on the
  // degree-two class x⊗x⊗x multiplies two nilpotents and dies.
  CHECK_FALSE(cap_on_homology(ch, der, 1).is_zero());
  CHECK(cap_on_homology(ch, der, 2).is_zero());

  // Capping is insensitive to shifting the cocycle by a coboundary and the
  // cycle by a boundary.
  Matrix fprime = der + cochain_delta(co, patterned(*a, 0, 7));
  CHECK(cap_on_homology(ch, fprime, 1) == cap_on_homology(ch, der, 1));
  HomologySpace h0 = hochschild_homology(ch, 0);
  HomologySpace h1 = hochschild_homology(ch, 1);
  Matrix z = h1.reps().col(0);
  Matrix w = Matrix::basis_col(Field::Q(), 8, 3) +
             Matrix::basis_col(Field::Q(), 8, 5);
  Matrix zshift = z + ch.complex->diff(2).apply(w);
  CHECK(h0.coords(cap_chain(ch, fprime, 1, zshift)) ==
        h0.coords(cap_chain(ch, der, 1, z)));

  // In characteristic two the translation cocycle caps [1⊗x] onto the
  // class of the unit.
  AlgebraPtr a2 = dual(Field::Fp(2));
  Chains ch2 = hochschild_chains(a2, regular_bimodule(a2), 4, kBig);
  CHECK_FALSE(cap_on_homology(ch2, dual_translation(Field::Fp(2)), 1)
                  .is_zero());
}

TEST_CASE("collapsed bar endomorphisms respect the module structure") {
  AlgebraPtr a = pathA2(Field::Q());
  HochschildModel hm = hochschild_model(a, regular_bimodule(a), 4, kBig);

  // The identity collapses to the identity, on both collapse orders.
  ChainMap idbar = ChainMap::identity(hm.bar.complex);
  ChainMap cid = env_collapsed_map(idbar, hm.model, hm.model);
  for (int n = 0; n <= 4; ++n)
    CHECK(cid.component(n) ==
          SparseMat::identity(Field::Q(), hm.model.complex->dim(n)));
  Bimodule reg = regular_bimodule(a);
  EnvTensor vmodel =
      env_tensor_full(*hm.bar.complex, bimodule_complex(reg));
  ChainMap vid = env_collapsed_map(idbar, vmodel, vmodel);
  for (int n = 0; n <= 4; ++n)
    CHECK(vid.component(n) ==
          SparseMat::identity(Field::Q(), vmodel.complex->dim(n)));

  // A merely linear self-map that ignores the side actions is rejected.
  SparseMat proj(Field::Q(), hm.bar.complex->dim(0), hm.bar.complex->dim(0));
  proj.add_at(0, 0, Rat(1));
  ChainMap skew(hm.bar.complex, hm.bar.complex, 0, {{0, proj}});
  CHECK_THROWS_AS(env_collapsed_map(skew, hm.model, hm.model),
                  ValidationError);

  // A lifted cocycle collapses to an honest chain map of the model.
  Matrix f(Field::Q(), 3, 3);
  f.set(2, 2, Rat(1));  // the arrow component of a derivation on the path
  CocycleLift cl = cocycle_to_chain_map(hm.bar, 1, f);
  ChainMap lifted = env_collapsed_map(cl.endo, hm.model, hm.model);
  CHECK(lifted.degree() == -1);
  CHECK(lifted.is_chain_map());
}

TEST_CASE("odd-degree collapsed maps carry the interchange sign") {
  // Collapse against a survivor spread over two degrees, so blocks with the
  // survivor in odd degree meet the sign (−1)^{p·r} of moving an odd-degree
  // map past an odd-degree factor; a wrong sign breaks the chain property.
  AlgebraPtr a = dual(Field::Q());
  Field f = a->field();
  HochschildModel hm = hochschild_model(a, regular_bimodule(a), 4, kBig);
  CocycleLift cl = cocycle_to_chain_map(hm.bar, 1, dual_derivation(f));
  CHECK_FALSE(cl.endo.component(1).is_zero());

  Complex x(f, 0, {2, 2}, {SparseMat::identity(f, 2)}, TrustedRange{});
  ActionFamily lf{a, false, {}}, rf{a, true, {}};
  for (int n = 0; n <= 1; ++n)
    for (std::size_t i = 0; i < 2; ++i) {
      Matrix e = Matrix::basis_col(f, 2, i);
      lf.act[n].push_back(SparseMat::from_dense(a->left_mult(e)));
      rf.act[n].push_back(SparseMat::from_dense(a->right_mult(e)));
    }
  x.families["left"] = lf;
  x.families["right"] = rf;

  EnvTensor wide = env_tensor_full(x, *hm.bar.complex);
  ChainMap lifted = env_collapsed_map(cl.endo, wide, wide);
  CHECK(lifted.degree() == -1);
  CHECK(lifted.is_chain_map());
}

TEST_CASE("cap agrees with the collapsed bar endomorphism on homology") {
  // Dual numbers over the rationals: unit, derivation, a degree-two
  // cohomology basis cocycle, and a coboundary.
  {
    AlgebraPtr a = dual(Field::Q());
    Chains ch = hochschild_chains(a, regular_bimodule(a), 4, kBig);
    Cochains co = hochschild_cochains(a, regular_bimodule(a), 4, kBig);
    HochschildModel hm = hochschild_model(a, regular_bimodule(a), 4, kBig);
    for (int n = 0; n <= 2; ++n)
      CHECK(verify_lemma_square(ch, hm, a->unit(), n));
    Matrix der = dual_derivation(Field::Q());
    for (int n = 1; n <= 3; ++n) CHECK(verify_lemma_square(ch, hm, der, n));
    std::vector<Matrix> b2 = cohomology_basis(co, 2);
    REQUIRE(b2.size() == 1);
    for (int n = 2; n <= 3; ++n) CHECK(verify_lemma_square(ch, hm, b2[0], n));
    Matrix cb = cochain_delta(co, patterned(*a, 0, 11));
    for (int n = 1; n <= 3; ++n) CHECK(verify_lemma_square(ch, hm, cb, n));
  }
  // Characteristic two, where the cohomology is larger.
  {
    AlgebraPtr a = dual(Field::Fp(2));
    Chains ch = hochschild_chains(a, regular_bimodule(a), 4, kBig);
    HochschildModel hm = hochschild_model(a, regular_bimodule(a), 4, kBig);
    Matrix t = dual_translation(Field::Fp(2));
    Matrix der = dual_derivation(Field::Fp(2));
    for (int n = 1; n <= 3; ++n) {
      CHECK(verify_lemma_square(ch, hm, t, n));
      CHECK(verify_lemma_square(ch, hm, der, n));
    }
  }
  // A noncommutative path algebra and a matrix algebra.
  {
    AlgebraPtr a = pathA2(Field::Q());
    Chains ch = hochschild_chains(a, regular_bimodule(a), 4, kBig);
    HochschildModel hm = hochschild_model(a, regular_bimodule(a), 4, kBig);
    CHECK(verify_lemma_square(ch, hm, a->unit(), 0));
    Matrix f(Field::Q(), 3, 3);
    f.set(2, 2, Rat(1));
    for (int n = 1; n <= 2; ++n) CHECK(verify_lemma_square(ch, hm, f, n));
  }
  {
    AlgebraPtr a = share(matrix_algebra(Field::Q(), 2));
    Chains ch = hochschild_chains(a, regular_bimodule(a), 3, 2000000);
    HochschildModel hm = hochschild_model(a, regular_bimodule(a), 3,
                                          2000000);
    for (int n = 0; n <= 1; ++n)
      CHECK(verify_lemma_square(ch, hm, a->unit(), n));
  }
}
