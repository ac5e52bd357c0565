#include "hhcap/module.hpp"

#include <sstream>
#include <utility>

namespace hhcap {

namespace {

// Row-major vectorization: entry (r, c) lands at index r·cols + c.
Matrix vec_map(const Matrix& m) {
  Matrix v(m.field(), m.rows() * m.cols(), 1);
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c)
      if (!m.entry_is_zero(r, c)) v.set(r * m.cols() + c, 0, m.get(r, c));
  return v;
}

Matrix unvec_map(const Matrix& v, std::size_t rows, std::size_t cols) {
  Matrix m(v.field(), rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      if (!v.entry_is_zero(r * cols + c, 0)) m.set(r, c, v.get(r * cols + c, 0));
  return m;
}

}  // namespace

Module::Module(AlgebraPtr a, std::size_t dim, std::vector<Matrix> action)
    : alg_(std::move(a)), dim_(dim), action_(std::move(action)) {
  if (!alg_) throw ValidationError("module needs an algebra");
  if (action_.size() != alg_->dim())
    throw DimensionError("module needs one action matrix per algebra basis element");
  for (const Matrix& m : action_) {
    if (m.field() != alg_->field())
      throw FieldMismatchError("module action over a different field");
    if (m.rows() != dim_ || m.cols() != dim_)
      throw DimensionError("module action matrices must be dim × dim");
  }
}

Matrix Module::action_of(const Matrix& x) const {
  if (x.rows() != alg_->dim() || x.cols() != 1)
    throw DimensionError("action_of: x must be an algebra coordinate column");
  Matrix out(x.field(), dim_, dim_);
  for (std::size_t i = 0; i < alg_->dim(); ++i)
    if (!x.entry_is_zero(i, 0)) out = out + action_[i].scalar_mul(x.get(i, 0));
  return out;
}

Matrix Module::act(const Matrix& v, const Matrix& x) const {
  if (v.rows() != dim_) throw DimensionError("act: v must have module dimension");
  if (x.cols() == 1) return action_of(x) * v;
  if (x.cols() != v.cols())
    throw DimensionError("act: column counts must match");
  Matrix out(v.field(), dim_, v.cols());
  for (std::size_t t = 0; t < v.cols(); ++t)
    out.set_block(0, t, action_of(x.col(t)) * v.col(t));
  return out;
}

ModuleReport validate_module(const Module& m) {
  const Algebra& a = *m.algebra();
  if (m.action_of(a.unit()) != Matrix::identity(a.field(), m.dim()))
    return {false, "action of the unit is not the identity"};
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < a.dim(); ++j) {
      const Matrix lhs = m.action(j) * m.action(i);
      if (lhs != m.action_of(a.basis_product(i, j))) {
        std::ostringstream os;
        os << "right action fails contravariance on pair (" << i << ", " << j
           << "): ρ(" << a.label(j) << ")ρ(" << a.label(i) << ") ≠ ρ("
           << a.label(i) << "·" << a.label(j) << ")";
        return {false, os.str()};
      }
    }
  return {true, ""};
}

Module free_module(AlgebraPtr a, std::size_t rank) {
  const std::size_t n = a->dim();
  const Matrix id = Matrix::identity(a->field(), rank);
  std::vector<Matrix> action;
  action.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    action.push_back(id.kron(a->right_mult(Matrix::basis_col(a->field(), n, i))));
  return Module(std::move(a), rank * n, std::move(action));
}

Module direct_sum(const Module& x, const Module& y) {
  if (!same_algebra(*x.algebra(), *y.algebra()))
    throw FieldMismatchError("direct_sum: modules over different algebras");
  const std::size_t n = x.algebra()->dim();
  std::vector<Matrix> action;
  action.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Matrix m(x.action(0).field(), x.dim() + y.dim(), x.dim() + y.dim());
    m.set_block(0, 0, x.action(i));
    m.set_block(x.dim(), x.dim(), y.action(i));
    action.push_back(std::move(m));
  }
  return Module(x.algebra(), x.dim() + y.dim(), std::move(action));
}

std::vector<Matrix> hom_space(const Module& m, const Module& n) {
  if (!same_algebra(*m.algebra(), *n.algebra()))
    throw FieldMismatchError("hom_space: modules over different algebras");
  const Field f = m.action(0).field();
  const std::size_t dm = m.dim(), dn = n.dim(), na = m.algebra()->dim();
  // φ·ρ_m(e_i) = ρ_n(e_i)·φ, vectorized row-major:
  // (kron(I, ρ_m(e_i)ᵀ) − kron(ρ_n(e_i), I))·vec(φ) = 0.
  std::vector<Matrix> blocks;
  blocks.reserve(na);
  const Matrix idn = Matrix::identity(f, dn), idm = Matrix::identity(f, dm);
  for (std::size_t i = 0; i < na; ++i)
    blocks.push_back(idn.kron(m.action(i).transpose()) -
                     n.action(i).kron(idm));
  const Matrix ker = Matrix::vstack(blocks).kernel_basis();
  std::vector<Matrix> out;
  out.reserve(ker.cols());
  for (std::size_t t = 0; t < ker.cols(); ++t)
    out.push_back(unvec_map(ker.col(t), dn, dm));
  return out;
}

Matrix hom_coords(const std::vector<Matrix>& basis, const Matrix& map) {
  if (basis.empty()) throw LiftError("hom_coords: empty basis");
  std::vector<Matrix> cols;
  cols.reserve(basis.size());
  for (const Matrix& b : basis) cols.push_back(vec_map(b));
  auto sol = Matrix::hstack(cols).solve(vec_map(map));
  if (!sol) throw LiftError("hom_coords: map is not in the span of the basis");
  return *sol;
}

Bimodule::Bimodule(AlgebraPtr left, AlgebraPtr right, std::size_t dim,
                   std::vector<Matrix> left_action,
                   std::vector<Matrix> right_action)
    : left_(std::move(left)),
      right_(std::move(right)),
      dim_(dim),
      lact_(std::move(left_action)),
      ract_(std::move(right_action)) {
  if (!left_ || !right_) throw ValidationError("bimodule needs two algebras");
  if (left_->field() != right_->field())
    throw FieldMismatchError("bimodule algebras over different fields");
  if (lact_.size() != left_->dim() || ract_.size() != right_->dim())
    throw DimensionError("bimodule needs one action matrix per basis element");
  for (const Matrix& m : lact_)
    if (m.rows() != dim_ || m.cols() != dim_ || m.field() != left_->field())
      throw DimensionError("bimodule left actions must be dim × dim");
  for (const Matrix& m : ract_)
    if (m.rows() != dim_ || m.cols() != dim_ || m.field() != left_->field())
      throw DimensionError("bimodule right actions must be dim × dim");
}

Matrix Bimodule::left_act(const Matrix& a) const {
  if (a.rows() != left_->dim() || a.cols() != 1)
    throw DimensionError("left_act: coordinate column over the left algebra");
  Matrix out(a.field(), dim_, dim_);
  for (std::size_t i = 0; i < lact_.size(); ++i)
    if (!a.entry_is_zero(i, 0)) out = out + lact_[i].scalar_mul(a.get(i, 0));
  return out;
}

Matrix Bimodule::right_act(const Matrix& b) const {
  if (b.rows() != right_->dim() || b.cols() != 1)
    throw DimensionError("right_act: coordinate column over the right algebra");
  Matrix out(b.field(), dim_, dim_);
  for (std::size_t j = 0; j < ract_.size(); ++j)
    if (!b.entry_is_zero(j, 0)) out = out + ract_[j].scalar_mul(b.get(j, 0));
  return out;
}

ModuleReport validate_bimodule(const Bimodule& m) {
  const Algebra& a = *m.left_algebra();
  const Algebra& b = *m.right_algebra();
  const Matrix id = Matrix::identity(a.field(), m.dim());
  if (m.left_act(a.unit()) != id)
    return {false, "left action of the unit is not the identity"};
  if (m.right_act(b.unit()) != id)
    return {false, "right action of the unit is not the identity"};
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < a.dim(); ++j)
      if (m.left_action(i) * m.left_action(j) !=
          m.left_act(a.basis_product(i, j))) {
        std::ostringstream os;
        os << "left action fails covariance on pair (" << i << ", " << j << ")";
        return {false, os.str()};
      }
  for (std::size_t i = 0; i < b.dim(); ++i)
    for (std::size_t j = 0; j < b.dim(); ++j)
      if (m.right_action(j) * m.right_action(i) !=
          m.right_act(b.basis_product(i, j))) {
        std::ostringstream os;
        os << "right action fails contravariance on pair (" << i << ", " << j
           << ")";
        return {false, os.str()};
      }
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < b.dim(); ++j)
      if (m.left_action(i) * m.right_action(j) !=
          m.right_action(j) * m.left_action(i)) {
        std::ostringstream os;
        os << "actions fail to commute on pair (" << i << ", " << j << ")";
        return {false, os.str()};
      }
  return {true, ""};
}

Bimodule regular_bimodule(AlgebraPtr a) {
  const std::size_t n = a->dim();
  std::vector<Matrix> lact, ract;
  lact.reserve(n);
  ract.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Matrix e = Matrix::basis_col(a->field(), n, i);
    lact.push_back(a->left_mult(e));
    ract.push_back(a->right_mult(e));
  }
  return Bimodule(a, a, n, std::move(lact), std::move(ract));
}

Module to_right_module(const Bimodule& m) {
  AlgebraPtr t =
      share(tensor_algebra(opposite(*m.left_algebra()), *m.right_algebra()));
  const std::size_t na = m.left_algebra()->dim();
  const std::size_t nb = m.right_algebra()->dim();
  std::vector<Matrix> action;
  action.reserve(na * nb);
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t j = 0; j < nb; ++j)
      action.push_back(m.left_action(i) * m.right_action(j));
  return Module(std::move(t), m.dim(), std::move(action));
}

Bimodule from_right_module(const Module& m, AlgebraPtr left, AlgebraPtr right) {
  Algebra expected = tensor_algebra(opposite(*left), *right);
  if (!same_algebra(*m.algebra(), expected))
    throw ValidationError(
        "from_right_module: module ring is not opposite(left) ⊗ right");
  const Field f = left->field();
  const std::size_t na = left->dim(), nb = right->dim();
  std::vector<Matrix> lact, ract;
  for (std::size_t i = 0; i < na; ++i)
    lact.push_back(
        m.action_of(Matrix::basis_col(f, na, i).kron(right->unit())));
  for (std::size_t j = 0; j < nb; ++j)
    ract.push_back(
        m.action_of(left->unit().kron(Matrix::basis_col(f, nb, j))));
  return Bimodule(std::move(left), std::move(right), m.dim(), std::move(lact),
                  std::move(ract));
}

EndData endomorphism_algebra(const Module& m) {
  const Field f = m.action(0).field();
  std::vector<Matrix> maps = hom_space(m, m);
  const std::size_t e = maps.size();
  if (e == 0) throw ValidationError("endomorphism_algebra: zero module");
  std::vector<Matrix> cols;
  cols.reserve(e);
  for (const Matrix& b : maps) cols.push_back(vec_map(b));
  const Matrix bm = Matrix::hstack(cols);

  // Composition is function-style: f·g = f∘g.
  Matrix mu(f, e, e * e);
  for (std::size_t a = 0; a < e; ++a)
    for (std::size_t b = 0; b < e; ++b) {
      auto c = bm.solve(vec_map(maps[a] * maps[b]));
      if (!c)
        throw ValidationError(
            "endomorphism_algebra: composition left the hom space");
      mu.set_block(0, a * e + b, *c);
    }
  auto unit = bm.solve(vec_map(Matrix::identity(f, m.dim())));
  if (!unit)
    throw ValidationError("endomorphism_algebra: identity not in hom space");
  std::vector<std::string> labels(e);
  for (std::size_t a = 0; a < e; ++a) labels[a] = "f" + std::to_string(a + 1);
  AlgebraPtr end =
      share(Algebra(f, std::move(labels), std::move(mu), std::move(*unit)));

  std::vector<Matrix> ract;
  ract.reserve(m.algebra()->dim());
  for (std::size_t i = 0; i < m.algebra()->dim(); ++i)
    ract.push_back(m.action(i));
  Bimodule bimod(end, m.algebra(), m.dim(), maps, std::move(ract));
  return EndData{std::move(end), std::move(maps), std::move(bimod)};
}

}  // namespace hhcap
