#include "hhcap/hochschild.hpp"

#include <string>
#include <utility>

#include "internal.hpp"

namespace hhcap {

using detail::col_from_map;
using detail::mul_budget;
using detail::sparse_of_dense_col;

Chains hochschild_chains(AlgebraPtr a, const Bimodule& m, int top,
                         std::size_t budget) {
  if (!same_algebra(*m.left_algebra(), *a) ||
      !same_algebra(*m.right_algebra(), *a))
    throw DimensionError("chains need a bimodule over the given algebra");
  if (top < 0) throw DimensionError("chains need a nonnegative top degree");
  Field f = a->field();
  FieldOps ops(f);
  std::size_t dA = a->dim(), dM = m.dim();

  std::vector<std::size_t> pw{1};
  for (int k = 1; k <= top; ++k)
    pw.push_back(mul_budget(pw.back(), dA, budget,
                            "chain term in degree " + std::to_string(k)));
  std::vector<std::size_t> dims;
  for (int n = 0; n <= top; ++n)
    dims.push_back(mul_budget(dM, pw[n], budget,
                              "chain term in degree " + std::to_string(n)));

  std::vector<SparseMat> diffs;
  std::vector<std::size_t> w;
  for (int n = 1; n <= top; ++n) {
    SparseMat d(f, dims[n - 1], dims[n]);
    w.assign(n, 0);
    for (std::size_t col = 0; col < dims[n]; ++col) {
      std::size_t im = col / pw[n], word = col % pw[n];
      std::size_t t = word;
      for (int j = n - 1; j >= 0; --j) {
        w[j] = t % dA;
        t /= dA;
      }
      std::map<std::size_t, Rat> out;
      const Matrix& ra = m.right_action(w[0]);
      for (std::size_t k = 0; k < dM; ++k)
        if (!ra.entry_is_zero(k, im))
          out[k * pw[n - 1] + word % pw[n - 1]] += ra.get(k, im);
      for (int i = 1; i <= n - 1; ++i) {
        Matrix pr = a->basis_product(w[i - 1], w[i]);
        for (std::size_t k = 0; k < dA; ++k) {
          if (pr.entry_is_zero(k, 0)) continue;
          std::size_t w2 = 0;
          for (int j = 0; j < i - 1; ++j) w2 = w2 * dA + w[j];
          w2 = w2 * dA + k;
          for (int j = i + 1; j < n; ++j) w2 = w2 * dA + w[j];
          Rat cv = pr.get(k, 0);
          if (i % 2 != 0) cv = -cv;
          out[im * pw[n - 1] + w2] += cv;
        }
      }
      const Matrix& la = m.left_action(w[n - 1]);
      for (std::size_t k = 0; k < dM; ++k) {
        if (la.entry_is_zero(k, im)) continue;
        Rat cv = la.get(k, im);
        if (n % 2 != 0) cv = -cv;
        out[k * pw[n - 1] + word / dA] += cv;
      }
      d.set_col(col, col_from_map(out, ops));
    }
    diffs.push_back(std::move(d));
  }

  ComplexPtr cx = share(
      Complex(f, 0, dims, std::move(diffs), TrustedRange{-kDegInf, top - 1}));
  return Chains{a, m, std::move(cx), top};
}

Cochains hochschild_cochains(AlgebraPtr a, const Bimodule& m, int top,
                             std::size_t budget) {
  if (!same_algebra(*m.left_algebra(), *a) ||
      !same_algebra(*m.right_algebra(), *a))
    throw DimensionError("cochains need a bimodule over the given algebra");
  if (top < 0) throw DimensionError("cochains need a nonnegative top degree");
  Field f = a->field();
  FieldOps ops(f);
  std::size_t dA = a->dim(), dM = m.dim();

  std::vector<std::size_t> pw{1};
  for (int k = 1; k <= top; ++k)
    pw.push_back(mul_budget(pw.back(), dA, budget,
                            "cochain term in degree " + std::to_string(k)));
  std::vector<std::size_t> wdim(top + 1);
  for (int n = 0; n <= top; ++n)
    wdim[n] = mul_budget(pw[n], dM, budget,
                         "cochain term in degree " + std::to_string(n));

  // delta[n] : Hom(A^{⊗n}, M) → Hom(A^{⊗n+1}, M), assembled by scanning the
  // faces of every target word.
  std::vector<const Matrix*> la_of(dA), ra_of(dA);
  for (std::size_t i = 0; i < dA; ++i) {
    la_of[i] = &m.left_action(i);
    ra_of[i] = &m.right_action(i);
  }
  std::vector<SparseMat> delta;
  std::vector<std::size_t> v;
  for (int n = 0; n + 1 <= top; ++n) {
    std::vector<std::map<std::size_t, Rat>> colacc(wdim[n]);
    v.assign(n + 1, 0);
    for (std::size_t wp = 0; wp < pw[n + 1]; ++wp) {
      std::size_t t = wp;
      for (int j = n; j >= 0; --j) {
        v[j] = t % dA;
        t /= dA;
      }
      const Matrix& la = *la_of[v[0]];
      std::size_t drop0 = wp % pw[n];
      for (std::size_t i = 0; i < dM; ++i)
        for (std::size_t k = 0; k < dM; ++k)
          if (!la.entry_is_zero(k, i))
            colacc[drop0 * dM + i][wp * dM + k] += la.get(k, i);
      for (int j = 1; j <= n; ++j) {
        Matrix pr = a->basis_product(v[j - 1], v[j]);
        for (std::size_t k = 0; k < dA; ++k) {
          if (pr.entry_is_zero(k, 0)) continue;
          std::size_t w2 = 0;
          for (int jj = 0; jj < j - 1; ++jj) w2 = w2 * dA + v[jj];
          w2 = w2 * dA + k;
          for (int jj = j + 1; jj <= n; ++jj) w2 = w2 * dA + v[jj];
          Rat cv = pr.get(k, 0);
          if (j % 2 != 0) cv = -cv;
          for (std::size_t i = 0; i < dM; ++i)
            colacc[w2 * dM + i][wp * dM + i] += cv;
        }
      }
      const Matrix& ra = *ra_of[v[n]];
      std::size_t dropn = wp / dA;
      for (std::size_t i = 0; i < dM; ++i)
        for (std::size_t k = 0; k < dM; ++k) {
          if (ra.entry_is_zero(k, i)) continue;
          Rat cv = ra.get(k, i);
          if ((n + 1) % 2 != 0) cv = -cv;
          colacc[dropn * dM + i][wp * dM + k] += cv;
        }
    }
    SparseMat d(f, wdim[n + 1], wdim[n]);
    for (std::size_t j = 0; j < wdim[n]; ++j)
      d.set_col(j, col_from_map(colacc[j], ops));
    delta.push_back(std::move(d));
  }

  std::vector<std::size_t> dims;
  std::vector<SparseMat> diffs;
  for (int i = 0; i <= top; ++i) dims.push_back(wdim[top - i]);
  for (int i = 0; i + 1 <= top; ++i) diffs.push_back(delta[top - i - 1]);

  Cochains co;
  co.alg = a;
  co.coef_dim = dM;
  co.top = top;
  co.complex = share(Complex(f, -top, dims, std::move(diffs),
                             TrustedRange{1 - top, kDegInf}));
  return co;
}

Matrix cochain_to_column(const Matrix& f) {
  Matrix v(f.field(), f.rows() * f.cols(), 1);
  for (std::size_t j = 0; j < f.cols(); ++j)
    for (std::size_t i = 0; i < f.rows(); ++i)
      if (!f.entry_is_zero(i, j)) v.set(j * f.rows() + i, 0, f.get(i, j));
  return v;
}

Matrix column_to_cochain(std::size_t rows, const Matrix& v) {
  if (rows == 0 || v.rows() % rows != 0 || v.cols() != 1)
    throw DimensionError("column does not flatten a cochain of this height");
  Matrix f(v.field(), rows, v.rows() / rows);
  for (std::size_t idx = 0; idx < v.rows(); ++idx)
    if (!v.entry_is_zero(idx, 0))
      f.set(idx % rows, idx / rows, v.get(idx, 0));
  return f;
}

namespace {

int cochain_degree(const Cochains& co, const Matrix& f) {
  if (f.rows() != co.coef_dim)
    throw DimensionError("cochain height does not match the coefficients");
  std::size_t dA = co.alg->dim(), pw = 1;
  for (int n = 0; n <= co.top; ++n) {
    if (pw == f.cols()) return n;
    pw *= dA;
  }
  throw DimensionError("cochain width is not a stored power of dim(A)");
}

}  // namespace

Matrix cochain_delta(const Cochains& co, const Matrix& f) {
  int n = cochain_degree(co, f);
  if (n + 1 > co.top)
    throw TruncationError("cochain differential beyond the stored top");
  Matrix v = co.complex->diff(-n).apply(cochain_to_column(f));
  return column_to_cochain(co.coef_dim, v);
}

bool is_cocycle(const Cochains& co, const Matrix& f) {
  return cochain_delta(co, f).is_zero();
}

HomologySpace hochschild_homology(const Chains& ch, int n) {
  return homology(*ch.complex, n);
}

HomologySpace hochschild_cohomology(const Cochains& co, int n) {
  return homology(*co.complex, -n);
}

std::vector<Matrix> cohomology_basis(const Cochains& co, int n) {
  HomologySpace hs = hochschild_cohomology(co, n);
  std::vector<Matrix> out;
  for (std::size_t j = 0; j < hs.dim(); ++j)
    out.push_back(column_to_cochain(co.coef_dim, hs.reps().col(j)));
  return out;
}

ChainMap chains_vs_bar_identification(const Chains& ch,
                                      const HochschildModel& hm) {
  const Complex& c = *ch.complex;
  const Complex& m = *hm.model.complex;
  if (!(c.field() == m.field()))
    throw FieldMismatchError("identification over mismatched fields");
  std::map<int, SparseMat> comps;
  for (int n = c.lo(); n <= c.hi(); ++n) {
    if (c.dim(n) != m.dim(n))
      throw DimensionError(
          "chain term and collapsed bar term differ in degree " +
          std::to_string(n));
    comps[n] = SparseMat::identity(c.field(), c.dim(n));
  }
  ChainMap ident(ch.complex, hm.model.complex, 0, std::move(comps));
  // Reject the identification unless the two independently built
  // differentials agree entrywise.
  if (!ident.is_chain_map())
    throw ValidationError(
        "face-formula and collapsed bar differentials disagree");
  return ident;
}

CocycleLift cocycle_to_chain_map(const Resolution& bar, int m,
                                 const Matrix& f) {
  const Complex& B = *bar.complex;
  const Algebra& a = *B.family("left").alg;
  Field fl = B.field();
  int top = B.hi();
  if (m < 0 || m > top - 2)
    throw DimensionError(
        "cocycle degree must leave two bar degrees of headroom");
  std::size_t dA = a.dim();
  std::size_t pw = 1;
  for (int k = 0; k < m; ++k) pw *= dA;
  if (f.rows() != dA || f.cols() != pw)
    throw DimensionError("cocycle matrix does not match Hom(A^{⊗m}, A)");

  std::vector<Matrix> lm, rm;
  for (std::size_t i = 0; i < dA; ++i) {
    Matrix e = Matrix::basis_col(fl, dA, i);
    lm.push_back(a.left_mult(e));
    rm.push_back(a.right_mult(e));
  }
  SparseMat comp(fl, dA, B.dim(m));
  for (std::size_t a0 = 0; a0 < dA; ++a0)
    for (std::size_t w = 0; w < pw; ++w) {
      Matrix mid = lm[a0] * f.col(w);
      for (std::size_t a1 = 0; a1 < dA; ++a1)
        comp.set_col((a0 * pw + w) * dA + a1,
                     sparse_of_dense_col(rm[a1] * mid, 0));
    }

  // The chain property of this map at degree m+1 is the cocycle condition
  // δf = 0, so the check below doubles as the closedness test.
  ChainMap to_base(bar.complex, bar.base, -m, {{m, std::move(comp)}});
  if (!to_base.is_chain_map())
    throw ValidationError("the cochain is not closed");
  LiftResult lr = lift_through_quasi_iso(to_base, bar.aug, top);
  return CocycleLift{std::move(to_base), std::move(lr.lift),
                     std::move(lr.homotopy)};
}

}  // namespace hhcap
