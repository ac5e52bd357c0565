#include "hhcap/products.hpp"

#include <cstddef>
#include <map>
#include <string>
#include <utility>

#include "hhcap/field.hpp"

namespace hhcap {

namespace {

// Tensor degree of a cochain read off its width; the width must be a power
// of the algebra dimension.
int tensor_degree(std::size_t dA, std::size_t cols, const std::string& what) {
  if (dA <= 1) {
    if (cols != 1)
      throw DimensionError(what + " width is not a power of the algebra "
                           "dimension");
    return 0;
  }
  int n = 0;
  std::size_t w = 1;
  while (w < cols) {
    w *= dA;
    ++n;
  }
  if (w != cols)
    throw DimensionError(what + " width is not a power of the algebra "
                         "dimension");
  return n;
}

std::size_t int_pow(std::size_t b, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

}  // namespace

Matrix cup(const Algebra& a, const Matrix& f, const Matrix& g) {
  std::size_t dA = a.dim();
  if (f.rows() != dA || g.rows() != dA)
    throw DimensionError("cup factors must be algebra-valued cochains");
  if (!(f.field() == a.field()) || !(g.field() == a.field()))
    throw FieldMismatchError("cup product over mismatched fields");
  tensor_degree(dA, f.cols(), "cup factor");
  tensor_degree(dA, g.cols(), "cup factor");
  Matrix out(a.field(), dA, f.cols() * g.cols());
  for (std::size_t w1 = 0; w1 < f.cols(); ++w1) {
    Matrix fv = f.col(w1);
    for (std::size_t w2 = 0; w2 < g.cols(); ++w2)
      out.set_block(0, w1 * g.cols() + w2, a.mult(fv, g.col(w2)));
  }
  return out;
}

SparseMat cap_matrix(const Chains& ch, const Matrix& f, int n) {
  const Algebra& a = *ch.alg;
  std::size_t dA = a.dim(), dM = ch.coef.dim();
  Field k = ch.complex->field();
  if (f.rows() != dA)
    throw DimensionError("cap cochain must be algebra-valued");
  if (!(f.field() == k))
    throw FieldMismatchError("cap product over mismatched fields");
  int m = tensor_degree(dA, f.cols(), "cap cochain");
  if (n > ch.top)
    throw TruncationError("cap degree outside the stored window");
  std::size_t src = ch.complex->dim(n);
  SparseMat out(k, ch.complex->dim(n - m), src);
  if (n < m) return out;  // zero map into or out of a zero term

  std::size_t rest = int_pow(dA, n - m);  // dA^{n−m}
  for (std::size_t im = 0; im < dM; ++im)
    for (std::size_t w1 = 0; w1 < f.cols(); ++w1) {
      // m₀ · f(w1) in coordinates, for m₀ the im-th coefficient basis vector.
      Matrix u = ch.coef.right_act(f.col(w1)).col(im);
      SparseVec base;
      for (std::size_t i = 0; i < dM; ++i)
        if (!u.entry_is_zero(i, 0)) base.emplace_back(i, u.get(i, 0));
      if (base.empty()) continue;
      for (std::size_t w2 = 0; w2 < rest; ++w2) {
        SparseVec sv;
        for (const auto& [i, val] : base)
          sv.emplace_back(i * rest + w2, val);
        out.set_col((im * f.cols() + w1) * rest + w2, sv);
      }
    }
  return out;
}

ChainMap cap_map(const Chains& ch, const Matrix& f) {
  int m = tensor_degree(ch.alg->dim(), f.cols(), "cap cochain");
  std::map<int, SparseMat> comps;
  for (int n = m; n <= ch.top; ++n) comps[n] = cap_matrix(ch, f, n);
  ChainMap cap(ch.complex, ch.complex, -m, std::move(comps));
  if (!cap.is_chain_map())
    throw ValidationError("cap by a cochain that is not closed is not a "
                          "chain map");
  return cap;
}

Matrix cap_chain(const Chains& ch, const Matrix& f, int n, const Matrix& z) {
  return cap_matrix(ch, f, n).apply(z);
}

Matrix cap_on_homology(const Chains& ch, const Matrix& f, int n) {
  int m = tensor_degree(ch.alg->dim(), f.cols(), "cap cochain");
  HomologySpace hn = hochschild_homology(ch, n);
  HomologySpace ht = hochschild_homology(ch, n - m);
  Matrix capped = cap_matrix(ch, f, n).apply(hn.reps());
  Matrix out(ch.complex->field(), ht.dim(), hn.dim());
  if (hn.dim() > 0) out = ht.coords(capped);
  return out;
}

bool verify_lemma_square(const Chains& ch, const HochschildModel& hm,
                         const Matrix& f, int n) {
  int m = tensor_degree(ch.alg->dim(), f.cols(), "cap cochain");
  ChainMap ident = chains_vs_bar_identification(ch, hm);
  CocycleLift cl = cocycle_to_chain_map(hm.bar, m, f);
  ChainMap lifted = env_collapsed_map(cl.endo, hm.model, hm.model);
  if (!lifted.is_chain_map())
    throw ValidationError("collapsed bar endomorphism is not a chain map");
  Matrix via_model = induced_on_homology(lifted, n) *
                     induced_on_homology(ident, n);
  Matrix via_cap = induced_on_homology(ident, n - m) *
                   cap_on_homology(ch, f, n);
  return via_model == via_cap;
}

}  // namespace hhcap
