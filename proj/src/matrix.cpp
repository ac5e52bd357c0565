#include "hhcap/matrix.hpp"

#include <algorithm>
#include <map>

#include "hhcap/fpkern.hpp"

namespace hhcap {

namespace {

// y += c * x with zero skipping (the elimination workloads are sparse-ish).
void q_axpy(Rat* y, const Rat* x, const Rat& c, std::size_t n) {
  if (sgn(c) == 0) return;
  for (std::size_t i = 0; i < n; ++i)
    if (sgn(x[i]) != 0) y[i] += c * x[i];
}

void q_scale(Rat* y, const Rat& c, std::size_t n) {
  if (c == 1) return;
  for (std::size_t i = 0; i < n; ++i)
    if (sgn(y[i]) != 0) y[i] *= c;
}

// Pivot preference: fewer GMP limbs keeps rational elimination tame.
std::size_t q_weight(const Rat& x) {
  return mpz_size(mpq_numref(x.get_mpq_t())) +
         mpz_size(mpq_denref(x.get_mpq_t()));
}

std::uint32_t fp_neg(std::uint32_t v, std::uint32_t p) {
  return v == 0 ? 0 : p - v;
}

}  // namespace

Matrix::Matrix(Field f, std::size_t rows, std::size_t cols)
    : f_(f), r_(rows), c_(cols) {
  if (f_.is_q())
    q_.assign(r_ * c_, Rat(0));
  else
    m_.assign(r_ * c_, 0);
}

Matrix Matrix::identity(Field f, std::size_t n) {
  Matrix out(f, n, n);
  for (std::size_t i = 0; i < n; ++i) out.set(i, i, 1);
  return out;
}

Matrix Matrix::basis_col(Field f, std::size_t n, std::size_t i) {
  Matrix out(f, n, 1);
  out.set(i, 0, 1);
  return out;
}

Matrix Matrix::hstack(const std::vector<Matrix>& blocks) {
  if (blocks.empty()) throw DimensionError("hstack of nothing");
  std::size_t c = 0;
  for (const Matrix& b : blocks) c += b.cols();
  Matrix out(blocks[0].field(), blocks[0].rows(), c);
  std::size_t j0 = 0;
  for (const Matrix& b : blocks) {
    out.set_block(0, j0, b);
    j0 += b.cols();
  }
  return out;
}

Matrix Matrix::vstack(const std::vector<Matrix>& blocks) {
  if (blocks.empty()) throw DimensionError("vstack of nothing");
  std::size_t r = 0;
  for (const Matrix& b : blocks) r += b.rows();
  Matrix out(blocks[0].field(), r, blocks[0].cols());
  std::size_t i0 = 0;
  for (const Matrix& b : blocks) {
    out.set_block(i0, 0, b);
    i0 += b.rows();
  }
  return out;
}

void Matrix::check_same_field(const Matrix& o) const {
  if (!(f_ == o.f_))
    throw FieldMismatchError("matrices over different fields");
}

Rat Matrix::get(std::size_t i, std::size_t j) const {
  if (i >= r_ || j >= c_) throw DimensionError("matrix index out of range");
  if (f_.is_q()) return q_[i * c_ + j];
  return Rat(m_[i * c_ + j]);
}

void Matrix::set(std::size_t i, std::size_t j, const Rat& v) {
  if (i >= r_ || j >= c_) throw DimensionError("matrix index out of range");
  if (f_.is_q())
    q_[i * c_ + j] = v;
  else
    m_[i * c_ + j] = fp_residue(v, f_.p());
}

void Matrix::add_at(std::size_t i, std::size_t j, const Rat& v) {
  if (i >= r_ || j >= c_) throw DimensionError("matrix index out of range");
  if (f_.is_q()) {
    q_[i * c_ + j] += v;
  } else {
    std::uint64_t s = m_[i * c_ + j] + std::uint64_t(fp_residue(v, f_.p()));
    m_[i * c_ + j] = static_cast<std::uint32_t>(s % f_.p());
  }
}

bool Matrix::entry_is_zero(std::size_t i, std::size_t j) const {
  if (f_.is_q()) return sgn(q_[i * c_ + j]) == 0;
  return m_[i * c_ + j] == 0;
}

bool Matrix::is_zero() const {
  if (f_.is_q()) {
    for (const Rat& x : q_)
      if (sgn(x) != 0) return false;
    return true;
  }
  for (std::uint32_t x : m_)
    if (x != 0) return false;
  return true;
}

bool Matrix::operator==(const Matrix& o) const {
  if (!(f_ == o.f_) || r_ != o.r_ || c_ != o.c_) return false;
  return f_.is_q() ? q_ == o.q_ : m_ == o.m_;
}

Matrix Matrix::operator+(const Matrix& o) const {
  check_same_field(o);
  if (r_ != o.r_ || c_ != o.c_) throw DimensionError("shape mismatch in +");
  Matrix out = *this;
  if (f_.is_q()) {
    for (std::size_t t = 0; t < q_.size(); ++t)
      if (sgn(o.q_[t]) != 0) out.q_[t] += o.q_[t];
  } else {
    for (std::size_t t = 0; t < m_.size(); ++t)
      out.m_[t] = static_cast<std::uint32_t>(
          (std::uint64_t(m_[t]) + o.m_[t]) % f_.p());
  }
  return out;
}

Matrix Matrix::operator-(const Matrix& o) const { return *this + (-o); }

Matrix Matrix::operator-() const {
  Matrix out = *this;
  if (f_.is_q()) {
    for (Rat& x : out.q_)
      if (sgn(x) != 0) x = -x;
  } else {
    for (std::uint32_t& x : out.m_) x = fp_neg(x, f_.p());
  }
  return out;
}

Matrix Matrix::operator*(const Matrix& o) const {
  check_same_field(o);
  if (c_ != o.r_) throw DimensionError("shape mismatch in matrix product");
  Matrix out(f_, r_, o.c_);
  if (f_.is_q()) {
    for (std::size_t i = 0; i < r_; ++i) {
      const Rat* a = q_row(i);
      Rat* dst = out.q_row(i);
      for (std::size_t k = 0; k < c_; ++k)
        if (sgn(a[k]) != 0) q_axpy(dst, o.q_row(k), a[k], o.c_);
    }
  } else {
    const auto& K = fpk::active_kernels(f_.p());
    for (std::size_t i = 0; i < r_; ++i) {
      const std::uint32_t* a = fp_row(i);
      std::uint32_t* dst = out.fp_row(i);
      for (std::size_t k = 0; k < c_; ++k)
        if (a[k] != 0) K.axpy(dst, o.fp_row(k), a[k], o.c_, f_.p());
    }
  }
  return out;
}

Matrix Matrix::scalar_mul(const Rat& c) const {
  Matrix out = *this;
  if (f_.is_q()) {
    q_scale(out.q_.data(), c, out.q_.size());
  } else {
    std::uint32_t cr = fp_residue(c, f_.p());
    fpk::active_kernels(f_.p()).scale(out.m_.data(), cr, out.m_.size(),
                                      f_.p());
  }
  return out;
}

Matrix Matrix::transpose() const {
  Matrix out(f_, c_, r_);
  if (f_.is_q()) {
    for (std::size_t i = 0; i < r_; ++i)
      for (std::size_t j = 0; j < c_; ++j)
        if (sgn(q_[i * c_ + j]) != 0) out.q_[j * r_ + i] = q_[i * c_ + j];
  } else {
    for (std::size_t i = 0; i < r_; ++i)
      for (std::size_t j = 0; j < c_; ++j) out.m_[j * r_ + i] = m_[i * c_ + j];
  }
  return out;
}

Matrix Matrix::kron(const Matrix& o) const {
  check_same_field(o);
  Matrix out(f_, r_ * o.r_, c_ * o.c_);
  for (std::size_t ia = 0; ia < r_; ++ia)
    for (std::size_t ja = 0; ja < c_; ++ja) {
      if (entry_is_zero(ia, ja)) continue;
      if (f_.is_q()) {
        const Rat& a = q_[ia * c_ + ja];
        for (std::size_t ib = 0; ib < o.r_; ++ib)
          for (std::size_t jb = 0; jb < o.c_; ++jb)
            if (sgn(o.q_[ib * o.c_ + jb]) != 0)
              out.q_[(ia * o.r_ + ib) * out.c_ + ja * o.c_ + jb] =
                  a * o.q_[ib * o.c_ + jb];
      } else {
        std::uint64_t a = m_[ia * c_ + ja];
        for (std::size_t ib = 0; ib < o.r_; ++ib)
          for (std::size_t jb = 0; jb < o.c_; ++jb)
            out.m_[(ia * o.r_ + ib) * out.c_ + ja * o.c_ + jb] =
                static_cast<std::uint32_t>(a * o.m_[ib * o.c_ + jb] % f_.p());
      }
    }
  return out;
}

Matrix Matrix::col(std::size_t j) const {
  Matrix out(f_, r_, 1);
  for (std::size_t i = 0; i < r_; ++i)
    if (!entry_is_zero(i, j)) out.set(i, 0, get(i, j));
  return out;
}

Matrix Matrix::submatrix_cols(const std::vector<std::size_t>& js) const {
  Matrix out(f_, r_, js.size());
  for (std::size_t t = 0; t < js.size(); ++t)
    for (std::size_t i = 0; i < r_; ++i)
      if (!entry_is_zero(i, js[t])) out.set(i, t, get(i, js[t]));
  return out;
}

void Matrix::set_block(std::size_t i0, std::size_t j0, const Matrix& m) {
  check_same_field(m);
  if (i0 + m.r_ > r_ || j0 + m.c_ > c_)
    throw DimensionError("block outside matrix bounds");
  for (std::size_t i = 0; i < m.r_; ++i)
    for (std::size_t j = 0; j < m.c_; ++j) {
      if (f_.is_q())
        q_[(i0 + i) * c_ + j0 + j] = m.q_[i * m.c_ + j];
      else
        m_[(i0 + i) * c_ + j0 + j] = m.m_[i * m.c_ + j];
    }
}

std::uint32_t* Matrix::fp_row(std::size_t i) { return m_.data() + i * c_; }
const std::uint32_t* Matrix::fp_row(std::size_t i) const {
  return m_.data() + i * c_;
}
Rat* Matrix::q_row(std::size_t i) { return q_.data() + i * c_; }
const Rat* Matrix::q_row(std::size_t i) const { return q_.data() + i * c_; }

namespace {

// Reduced row echelon core, with pivot search restricted to the first
// `pivot_limit` columns (so solve() can run on augmented matrices).
std::vector<std::size_t> rref_in_place(Matrix& R, std::size_t pivot_limit) {
  const Field f = R.field();
  const std::size_t rows = R.rows(), cols = R.cols();
  std::vector<std::size_t> pivots;
  std::size_t pr = 0;
  if (f.is_q()) {
    for (std::size_t col = 0; col < pivot_limit && pr < rows; ++col) {
      std::size_t best = rows;
      std::size_t best_w = 0;
      for (std::size_t i = pr; i < rows; ++i) {
        const Rat& x = R.q_row(i)[col];
        if (sgn(x) == 0) continue;
        std::size_t w = q_weight(x);
        if (best == rows || w < best_w) best = i, best_w = w;
      }
      if (best == rows) continue;
      if (best != pr)
        for (std::size_t j = col; j < cols; ++j)
          std::swap(R.q_row(pr)[j], R.q_row(best)[j]);
      Rat inv = 1 / R.q_row(pr)[col];
      q_scale(R.q_row(pr) + col, inv, cols - col);
      for (std::size_t i = 0; i < rows; ++i) {
        if (i == pr) continue;
        const Rat& x = R.q_row(i)[col];
        if (sgn(x) == 0) continue;
        Rat c = -x;
        q_axpy(R.q_row(i) + col, R.q_row(pr) + col, c, cols - col);
      }
      pivots.push_back(col);
      ++pr;
    }
  } else {
    const std::uint32_t p = f.p();
    const auto& K = fpk::active_kernels(p);
    for (std::size_t col = 0; col < pivot_limit && pr < rows; ++col) {
      std::size_t best = rows;
      for (std::size_t i = pr; i < rows; ++i)
        if (R.fp_row(i)[col] != 0) {
          best = i;
          break;
        }
      if (best == rows) continue;
      if (best != pr)
        for (std::size_t j = col; j < cols; ++j)
          std::swap(R.fp_row(pr)[j], R.fp_row(best)[j]);
      std::uint32_t inv = fp_inverse(R.fp_row(pr)[col], p);
      K.scale(R.fp_row(pr) + col, inv, cols - col, p);
      for (std::size_t i = 0; i < rows; ++i) {
        if (i == pr) continue;
        std::uint32_t x = R.fp_row(i)[col];
        if (x == 0) continue;
        K.axpy(R.fp_row(i) + col, R.fp_row(pr) + col, fp_neg(x, p), cols - col,
               p);
      }
      pivots.push_back(col);
      ++pr;
    }
  }
  return pivots;
}

}  // namespace

Rref Matrix::rref() const {
  Matrix R = *this;
  std::vector<std::size_t> piv = rref_in_place(R, c_);
  return {std::move(R), std::move(piv)};
}

std::size_t Matrix::rank() const {
  // Feed the narrow orientation into an echelon accumulator.
  if (r_ <= c_) {
    RowEchelon e(f_, c_);
    for (std::size_t i = 0; i < r_; ++i) {
      std::vector<std::pair<std::size_t, Rat>> ent;
      for (std::size_t j = 0; j < c_; ++j)
        if (!entry_is_zero(i, j)) ent.emplace_back(j, get(i, j));
      e.insert_sparse(ent);
      if (e.full()) break;
    }
    return e.rank();
  }
  RowEchelon e(f_, r_);
  for (std::size_t j = 0; j < c_; ++j) {
    std::vector<std::pair<std::size_t, Rat>> ent;
    for (std::size_t i = 0; i < r_; ++i)
      if (!entry_is_zero(i, j)) ent.emplace_back(i, get(i, j));
    e.insert_sparse(ent);
    if (e.full()) break;
  }
  return e.rank();
}

Matrix Matrix::kernel_basis() const {
  Rref R = rref();
  std::vector<bool> is_piv(c_, false);
  for (std::size_t p : R.pivot_cols) is_piv[p] = true;
  std::vector<std::size_t> free_cols;
  for (std::size_t j = 0; j < c_; ++j)
    if (!is_piv[j]) free_cols.push_back(j);
  Matrix out(f_, c_, free_cols.size());
  for (std::size_t t = 0; t < free_cols.size(); ++t) {
    std::size_t fcol = free_cols[t];
    out.set(fcol, t, 1);
    for (std::size_t u = 0; u < R.pivot_cols.size(); ++u) {
      Rat v = R.mat.get(u, fcol);
      if (sgn(v) != 0) out.set(R.pivot_cols[u], t, -v);
    }
  }
  return out;
}

Matrix Matrix::column_space_basis() const {
  RowEchelon e(f_, r_);
  for (std::size_t j = 0; j < c_ && !e.full(); ++j) {
    std::vector<std::pair<std::size_t, Rat>> ent;
    for (std::size_t i = 0; i < r_; ++i)
      if (!entry_is_zero(i, j)) ent.emplace_back(i, get(i, j));
    e.insert_sparse(ent);
  }
  return e.basis_cols();
}

std::optional<Matrix> Matrix::solve(const Matrix& b) const {
  check_same_field(b);
  if (b.rows() != r_) throw DimensionError("solve: rhs row count mismatch");
  Matrix aug = hstack({*this, b});
  std::vector<std::size_t> piv = rref_in_place(aug, c_);
  for (std::size_t i = piv.size(); i < r_; ++i)
    for (std::size_t j = 0; j < b.cols(); ++j)
      if (!aug.entry_is_zero(i, c_ + j)) return std::nullopt;
  Matrix x(f_, c_, b.cols());
  for (std::size_t t = 0; t < piv.size(); ++t)
    for (std::size_t j = 0; j < b.cols(); ++j)
      if (!aug.entry_is_zero(t, c_ + j)) x.set(piv[t], j, aug.get(t, c_ + j));
  return x;
}

std::optional<Matrix> Matrix::inverse() const {
  if (r_ != c_) throw DimensionError("inverse of non-square matrix");
  return solve(identity(f_, r_));
}

Quotient Matrix::quotient() const {
  Rref rt = transpose().rref();
  std::vector<bool> is_piv(r_, false);
  for (std::size_t p : rt.pivot_cols) is_piv[p] = true;
  std::vector<std::size_t> free_idx;
  for (std::size_t i = 0; i < r_; ++i)
    if (!is_piv[i]) free_idx.push_back(i);
  Matrix proj(f_, free_idx.size(), r_);
  Matrix sect(f_, r_, free_idx.size());
  for (std::size_t t = 0; t < free_idx.size(); ++t) {
    proj.set(t, free_idx[t], 1);
    sect.set(free_idx[t], t, 1);
  }
  for (std::size_t u = 0; u < rt.pivot_cols.size(); ++u)
    for (std::size_t t = 0; t < free_idx.size(); ++t) {
      Rat v = rt.mat.get(u, free_idx[t]);
      if (sgn(v) != 0) proj.set(t, rt.pivot_cols[u], -v);
    }
  return {std::move(proj), std::move(sect)};
}

// ---------------------------------------------------------------------------
// SparseMat

SparseMat::SparseMat(Field f, std::size_t rows, std::size_t cols)
    : f_(f), r_(rows), c_(cols) {
  if (f_.is_q())
    q_.resize(c_);
  else
    m_.resize(c_);
}

SparseMat SparseMat::identity(Field f, std::size_t n) {
  SparseMat out(f, n, n);
  for (std::size_t i = 0; i < n; ++i) out.add_at(i, i, 1);
  return out;
}

SparseMat SparseMat::from_dense(const Matrix& m) {
  SparseMat out(m.field(), m.rows(), m.cols());
  for (std::size_t j = 0; j < m.cols(); ++j)
    for (std::size_t i = 0; i < m.rows(); ++i)
      if (!m.entry_is_zero(i, j)) out.add_at(i, j, m.get(i, j));
  return out;
}

std::size_t SparseMat::nnz() const {
  std::size_t n = 0;
  if (f_.is_q())
    for (const auto& col : q_) n += col.size();
  else
    for (const auto& col : m_) n += col.size();
  return n;
}

void SparseMat::add_at(std::size_t i, std::size_t j, const Rat& v) {
  if (i >= r_ || j >= c_) throw DimensionError("sparse index out of range");
  if (sgn(v) == 0) return;
  if (f_.is_q()) {
    auto& col = q_[j];
    auto it = std::lower_bound(
        col.begin(), col.end(), i,
        [](const auto& e, std::size_t k) { return e.first < k; });
    if (it != col.end() && it->first == i) {
      it->second += v;
      if (sgn(it->second) == 0) col.erase(it);
    } else {
      col.insert(it, {i, v});
    }
  } else {
    std::uint32_t res = fp_residue(v, f_.p());
    if (res == 0) return;
    auto& col = m_[j];
    auto it = std::lower_bound(
        col.begin(), col.end(), i,
        [](const auto& e, std::size_t k) { return e.first < k; });
    if (it != col.end() && it->first == i) {
      std::uint32_t s = static_cast<std::uint32_t>(
          (std::uint64_t(it->second) + res) % f_.p());
      if (s == 0)
        col.erase(it);
      else
        it->second = s;
    } else {
      col.insert(it, {i, res});
    }
  }
}

bool SparseMat::is_zero() const { return nnz() == 0; }

bool SparseMat::operator==(const SparseMat& o) const {
  if (!(f_ == o.f_) || r_ != o.r_ || c_ != o.c_) return false;
  return f_.is_q() ? q_ == o.q_ : m_ == o.m_;
}

SparseMat SparseMat::operator+(const SparseMat& o) const {
  if (!(f_ == o.f_) || r_ != o.r_ || c_ != o.c_)
    throw DimensionError("sparse shape mismatch in +");
  SparseMat out = *this;
  for (std::size_t j = 0; j < c_; ++j)
    for (const auto& [i, v] : o.col_entries(j)) out.add_at(i, j, v);
  return out;
}

SparseMat SparseMat::operator-(const SparseMat& o) const {
  return *this + o.scalar_mul(-1);
}

SparseMat SparseMat::scalar_mul(const Rat& c) const {
  SparseMat out(f_, r_, c_);
  if (sgn(c) == 0) return out;
  for (std::size_t j = 0; j < c_; ++j)
    for (const auto& [i, v] : col_entries(j)) out.add_at(i, j, v * c);
  return out;
}

SparseMat SparseMat::operator*(const SparseMat& o) const {
  if (!(f_ == o.f_) || c_ != o.r_)
    throw DimensionError("sparse shape mismatch in product");
  SparseMat out(f_, r_, o.c_);
  for (std::size_t j = 0; j < o.c_; ++j) {
    std::map<std::size_t, Rat> acc;
    for (const auto& [k, v] : o.col_entries(j))
      for (const auto& [i, w] : col_entries(k)) acc[i] += v * w;
    std::vector<std::pair<std::size_t, Rat>> ent;
    for (auto& [i, v] : acc)
      if (sgn(v) != 0) ent.emplace_back(i, v);
    out.set_col(j, std::move(ent));
  }
  return out;
}

SparseMat SparseMat::transpose() const {
  SparseMat out(f_, c_, r_);
  for (std::size_t j = 0; j < c_; ++j)
    for (const auto& [i, v] : col_entries(j)) out.add_at(j, i, v);
  return out;
}

SparseMat SparseMat::kron(const SparseMat& o) const {
  if (!(f_ == o.f_)) throw FieldMismatchError("kron over different fields");
  SparseMat out(f_, r_ * o.r_, c_ * o.c_);
  for (std::size_t ja = 0; ja < c_; ++ja) {
    auto ca = col_entries(ja);
    if (ca.empty()) continue;
    for (std::size_t jb = 0; jb < o.c_; ++jb) {
      auto cb = o.col_entries(jb);
      if (cb.empty()) continue;
      std::vector<std::pair<std::size_t, Rat>> ent;
      ent.reserve(ca.size() * cb.size());
      for (const auto& [ia, va] : ca)
        for (const auto& [ib, vb] : cb)
          ent.emplace_back(ia * o.r_ + ib, va * vb);
      out.set_col(ja * o.c_ + jb, std::move(ent));
    }
  }
  return out;
}

Matrix SparseMat::to_dense() const {
  Matrix out(f_, r_, c_);
  for (std::size_t j = 0; j < c_; ++j)
    for (const auto& [i, v] : col_entries(j)) out.set(i, j, v);
  return out;
}

Matrix SparseMat::apply(const Matrix& x) const {
  if (!(f_ == x.field()) || x.rows() != c_)
    throw DimensionError("sparse apply shape mismatch");
  Matrix out(f_, r_, x.cols());
  if (f_.is_q()) {
    for (std::size_t j = 0; j < c_; ++j)
      for (const auto& [i, v] : q_[j]) q_axpy(out.q_row(i), x.q_row(j), v, x.cols());
  } else {
    const auto& K = fpk::active_kernels(f_.p());
    for (std::size_t j = 0; j < c_; ++j)
      for (const auto& [i, v] : m_[j])
        K.axpy(out.fp_row(i), x.fp_row(j), v, x.cols(), f_.p());
  }
  return out;
}

std::vector<std::pair<std::size_t, Rat>> SparseMat::col_entries(
    std::size_t j) const {
  std::vector<std::pair<std::size_t, Rat>> out;
  if (f_.is_q()) {
    out = q_[j];
  } else {
    out.reserve(m_[j].size());
    for (const auto& [i, v] : m_[j]) out.emplace_back(i, Rat(v));
  }
  return out;
}

void SparseMat::set_col(std::size_t j,
                        std::vector<std::pair<std::size_t, Rat>> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  if (f_.is_q()) {
    q_[j].clear();
    for (auto& [i, v] : entries) {
      if (sgn(v) == 0) continue;
      if (!q_[j].empty() && q_[j].back().first == i)
        throw DimensionError("duplicate row in set_col");
      q_[j].emplace_back(i, std::move(v));
    }
  } else {
    m_[j].clear();
    for (auto& [i, v] : entries) {
      std::uint32_t res = fp_residue(v, f_.p());
      if (res == 0) continue;
      if (!m_[j].empty() && m_[j].back().first == i)
        throw DimensionError("duplicate row in set_col");
      m_[j].emplace_back(i, res);
    }
  }
}

std::size_t SparseMat::col_rank() const {
  RowEchelon e(f_, r_);
  for (std::size_t j = 0; j < c_ && !e.full(); ++j)
    e.insert_sparse(col_entries(j));
  return e.rank();
}

// ---------------------------------------------------------------------------
// RowEchelon

RowEchelon::RowEchelon(Field f, std::size_t ncols) : f_(f), c_(ncols) {}

std::size_t RowEchelon::reduce_q(std::vector<Rat>& v) const {
  std::size_t lead = 0;
  while (lead < c_ && sgn(v[lead]) == 0) ++lead;
  std::size_t t = 0;
  while (lead < c_ && t < lead_.size()) {
    if (lead_[t] < lead) {
      ++t;
      continue;
    }
    if (lead_[t] > lead) break;
    Rat c = -v[lead];
    q_axpy(v.data() + lead, qrows_[t].data() + lead, c, c_ - lead);
    while (lead < c_ && sgn(v[lead]) == 0) ++lead;
    ++t;
  }
  return lead;
}

std::size_t RowEchelon::reduce_f(std::vector<std::uint32_t>& v) const {
  const std::uint32_t p = f_.p();
  const auto& K = fpk::active_kernels(p);
  std::size_t lead = 0;
  while (lead < c_ && v[lead] == 0) ++lead;
  std::size_t t = 0;
  while (lead < c_ && t < lead_.size()) {
    if (lead_[t] < lead) {
      ++t;
      continue;
    }
    if (lead_[t] > lead) break;
    K.axpy(v.data() + lead, frows_[t].data() + lead, fp_neg(v[lead], p),
           c_ - lead, p);
    while (lead < c_ && v[lead] == 0) ++lead;
    ++t;
  }
  return lead;
}

bool RowEchelon::insert_sparse(
    const std::vector<std::pair<std::size_t, Rat>>& entries) {
  if (f_.is_q()) {
    std::vector<Rat> v(c_, Rat(0));
    for (const auto& [i, x] : entries) v[i] = x;
    std::size_t lead = reduce_q(v);
    if (lead == c_) return false;
    Rat inv = 1 / v[lead];
    q_scale(v.data() + lead, inv, c_ - lead);
    auto pos = std::lower_bound(lead_.begin(), lead_.end(), lead);
    std::size_t idx = static_cast<std::size_t>(pos - lead_.begin());
    lead_.insert(pos, lead);
    qrows_.insert(qrows_.begin() + idx, std::move(v));
    return true;
  }
  const std::uint32_t p = f_.p();
  std::vector<std::uint32_t> v(c_, 0);
  for (const auto& [i, x] : entries) v[i] = fp_residue(x, p);
  std::size_t lead = reduce_f(v);
  if (lead == c_) return false;
  fpk::active_kernels(p).scale(v.data() + lead, fp_inverse(v[lead], p),
                               c_ - lead, p);
  auto pos = std::lower_bound(lead_.begin(), lead_.end(), lead);
  std::size_t idx = static_cast<std::size_t>(pos - lead_.begin());
  lead_.insert(pos, lead);
  frows_.insert(frows_.begin() + idx, std::move(v));
  return true;
}

bool RowEchelon::insert(const Matrix& row_vec) {
  std::vector<std::pair<std::size_t, Rat>> ent;
  if (row_vec.rows() == 1 && row_vec.cols() == c_) {
    for (std::size_t j = 0; j < c_; ++j)
      if (!row_vec.entry_is_zero(0, j)) ent.emplace_back(j, row_vec.get(0, j));
  } else if (row_vec.cols() == 1 && row_vec.rows() == c_) {
    for (std::size_t i = 0; i < c_; ++i)
      if (!row_vec.entry_is_zero(i, 0)) ent.emplace_back(i, row_vec.get(i, 0));
  } else {
    throw DimensionError("echelon insert expects a vector of matching length");
  }
  return insert_sparse(ent);
}

bool RowEchelon::contains(const Matrix& row_vec) const {
  std::vector<std::pair<std::size_t, Rat>> ent;
  if (row_vec.cols() == 1 && row_vec.rows() == c_) {
    for (std::size_t i = 0; i < c_; ++i)
      if (!row_vec.entry_is_zero(i, 0)) ent.emplace_back(i, row_vec.get(i, 0));
  } else if (row_vec.rows() == 1 && row_vec.cols() == c_) {
    for (std::size_t j = 0; j < c_; ++j)
      if (!row_vec.entry_is_zero(0, j)) ent.emplace_back(j, row_vec.get(0, j));
  } else {
    throw DimensionError("echelon contains expects a vector");
  }
  if (f_.is_q()) {
    std::vector<Rat> v(c_, Rat(0));
    for (const auto& [i, x] : ent) v[i] = x;
    return reduce_q(v) == c_;
  }
  std::vector<std::uint32_t> v(c_, 0);
  for (const auto& [i, x] : ent) v[i] = fp_residue(x, f_.p());
  return reduce_f(v) == c_;
}

Matrix RowEchelon::basis_cols() const {
  Matrix out(f_, c_, lead_.size());
  for (std::size_t t = 0; t < lead_.size(); ++t) {
    if (f_.is_q()) {
      for (std::size_t i = 0; i < c_; ++i)
        if (sgn(qrows_[t][i]) != 0) out.set(i, t, qrows_[t][i]);
    } else {
      for (std::size_t i = 0; i < c_; ++i)
        if (frows_[t][i] != 0) out.set(i, t, Rat(frows_[t][i]));
    }
  }
  return out;
}


Rat FieldOps::canon(const Rat& a) const {
  if (f.is_q()) return a;
  return Rat(fp_residue(a, f.p()));
}

Rat FieldOps::mul(const Rat& a, const Rat& b) const {
  if (f.is_q()) return a * b;
  return Rat(fp_residue(a * b, f.p()));
}

Rat FieldOps::neg(const Rat& a) const {
  if (f.is_q()) return -a;
  return Rat(fp_residue(-a, f.p()));
}

Rat FieldOps::inv(const Rat& a) const {
  if (f.is_q()) {
    if (sgn(a) == 0) throw DimensionError("inverse of zero");
    return 1 / a;
  }
  return Rat(fp_inverse(fp_residue(a, f.p()), f.p()));
}

void sparse_axpy(SparseVec& y, const Rat& c, const SparseVec& x,
                 const FieldOps& ops) {
  if (sgn(c) == 0 || x.empty()) return;
  SparseVec out;
  out.reserve(y.size() + x.size());
  std::size_t i = 0, j = 0;
  while (i < y.size() || j < x.size()) {
    if (j >= x.size() || (i < y.size() && y[i].first < x[j].first)) {
      out.push_back(y[i++]);
    } else if (i >= y.size() || x[j].first < y[i].first) {
      Rat v = ops.mul(c, x[j].second);
      if (sgn(v) != 0) out.emplace_back(x[j].first, std::move(v));
      ++j;
    } else {
      Rat v = ops.canon(y[i].second + ops.mul(c, x[j].second));
      if (sgn(v) != 0) out.emplace_back(y[i].first, std::move(v));
      ++i;
      ++j;
    }
  }
  y = std::move(out);
}

SparseSolver::SparseSolver(Field f, std::size_t height, bool history,
                           bool full_reduce)
    : ops_(f), h_(height), hist_(history), full_(full_reduce) {}

void SparseSolver::reduce(SparseVec& v, SparseVec* combo) const {
  // Entries only ever appear at indices ≥ the one being eliminated, so a
  // single ascending sweep with re-examination terminates.
  std::size_t i = 0;
  while (i < v.size()) {
    auto it = rows_.find(v[i].first);
    if (it == rows_.end()) {
      ++i;
      continue;
    }
    Rat c = ops_.neg(v[i].second);
    sparse_axpy(v, c, it->second.v, ops_);
    if (combo) sparse_axpy(*combo, c, it->second.combo, ops_);
  }
}

bool SparseSolver::add_col(const SparseVec& col, std::size_t id) {
  SparseVec v;
  v.reserve(col.size());
  for (const auto& [i, x] : col) {
    if (i >= h_) throw DimensionError("sparse column index out of range");
    Rat c = ops_.canon(x);
    if (sgn(c) != 0) v.emplace_back(i, std::move(c));
  }
  SparseVec combo;
  if (hist_ && id != npos) combo.emplace_back(id, Rat(1));
  reduce(v, hist_ ? &combo : nullptr);
  if (v.empty()) return false;
  const Rat s = ops_.inv(v.front().second);
  for (auto& [i, x] : v) x = ops_.mul(s, x);
  for (auto& [i, x] : combo) x = ops_.mul(s, x);
  const std::size_t lead = v.front().first;
  if (full_) {
    for (auto& [l, row] : rows_) {
      (void)l;
      auto pos = std::lower_bound(
          row.v.begin(), row.v.end(), lead,
          [](const auto& e, std::size_t k) { return e.first < k; });
      if (pos == row.v.end() || pos->first != lead) continue;
      Rat c = ops_.neg(pos->second);
      sparse_axpy(row.v, c, v, ops_);
      if (hist_) sparse_axpy(row.combo, c, combo, ops_);
    }
  }
  rows_.emplace(lead, Row{std::move(v), std::move(combo)});
  return true;
}

bool SparseSolver::contains(const SparseVec& b) const {
  SparseVec v;
  for (const auto& [i, x] : b) {
    Rat c = ops_.canon(x);
    if (sgn(c) != 0) v.emplace_back(i, std::move(c));
  }
  reduce(v, nullptr);
  return v.empty();
}

std::optional<SparseVec> SparseSolver::solve(const SparseVec& b) const {
  SparseVec v, acc;
  for (const auto& [i, x] : b) {
    Rat c = ops_.canon(x);
    if (sgn(c) != 0) v.emplace_back(i, std::move(c));
  }
  // reduce() subtracts c·row and adds c·row.combo into acc via the same call
  // pattern; acc ends up with b ≡ Σ acc_t · col_t modulo untracked columns.
  std::size_t i = 0;
  while (i < v.size()) {
    auto it = rows_.find(v[i].first);
    if (it == rows_.end()) {
      ++i;
      continue;
    }
    Rat c = v[i].second;
    sparse_axpy(v, ops_.neg(c), it->second.v, ops_);
    sparse_axpy(acc, c, it->second.combo, ops_);
  }
  if (!v.empty()) return std::nullopt;
  return acc;
}

std::vector<std::size_t> SparseSolver::pivots() const {
  std::vector<std::size_t> out;
  out.reserve(rows_.size());
  for (const auto& [l, r] : rows_) {
    (void)r;
    out.push_back(l);
  }
  return out;
}

const SparseVec* SparseSolver::row_with_lead(std::size_t i) const {
  auto it = rows_.find(i);
  return it == rows_.end() ? nullptr : &it->second.v;
}

SparseVec sparse_col(const Matrix& m, std::size_t j) {
  SparseVec out;
  for (std::size_t i = 0; i < m.rows(); ++i)
    if (!m.entry_is_zero(i, j)) out.emplace_back(i, m.get(i, j));
  return out;
}

Matrix dense_col(Field f, std::size_t n, const SparseVec& v) {
  Matrix out(f, n, 1);
  for (const auto& [i, x] : v) out.set(i, 0, x);
  return out;
}

}  // namespace hhcap
