#pragma once

// Small helpers shared by the complex-building translation units; not part
// of the public interface.

#include <map>
#include <string>
#include <vector>

#include "hhcap/algebra.hpp"
#include "hhcap/matrix.hpp"

namespace hhcap::detail {

// Budget-checked product of dimensions.
inline std::size_t mul_budget(std::size_t a, std::size_t b, std::size_t budget,
                              const std::string& what) {
  if (a != 0 && b != 0 && a > budget / b)
    throw BudgetError(what + " exceeds the term budget of " +
                      std::to_string(budget) + " basis elements");
  return a * b;
}

// out += scale · m · v, accumulated by row index.
inline void acc_apply(const SparseMat& m, const SparseVec& v, const Rat& scale,
                      std::map<std::size_t, Rat>& out) {
  for (const auto& [j, c] : v)
    for (const auto& [i, e] : m.col_entries(j)) out[i] += scale * c * e;
}

inline SparseVec col_from_map(const std::map<std::size_t, Rat>& m,
                              const FieldOps& ops) {
  SparseVec v;
  for (const auto& [i, c] : m) {
    Rat cc = ops.canon(c);
    if (cc != 0) v.emplace_back(i, std::move(cc));
  }
  return v;
}

inline SparseVec sparse_of_dense_col(const Matrix& m, std::size_t j) {
  SparseVec v;
  for (std::size_t i = 0; i < m.rows(); ++i)
    if (!m.entry_is_zero(i, j)) v.emplace_back(i, m.get(i, j));
  return v;
}

// Sparse left/right multiplication matrices of all basis elements.
inline std::vector<SparseMat> sparse_mults(const Algebra& a, bool right) {
  std::vector<SparseMat> out;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    Matrix e = Matrix::basis_col(a.field(), a.dim(), i);
    out.push_back(
        SparseMat::from_dense(right ? a.right_mult(e) : a.left_mult(e)));
  }
  return out;
}

}  // namespace hhcap::detail
