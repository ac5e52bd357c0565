#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "hhcap/field.hpp"

namespace hhcap {

struct Rref;
struct Quotient;

// Dense matrix over Q or F_p with exact arithmetic. Storage is row-major:
// rationals are GMP mpq values, F_p entries are canonical residues in
// uint32. All public entry access goes through exact rationals; over F_p the
// value stored is the residue of the rational mod p.
//
// Conventions (global to the project): vectors are columns, matrices act on
// the left, composition is matrix product. kron(A,B) indexes pairs (i,j) as
// i * rows(B) + j, i.e. the left factor is the major index.
class Matrix {
 public:
  Matrix() : Matrix(Field::Q(), 0, 0) {}
  Matrix(Field f, std::size_t rows, std::size_t cols);

  static Matrix identity(Field f, std::size_t n);
  // Standard basis column e_i in k^n.
  static Matrix basis_col(Field f, std::size_t n, std::size_t i);
  static Matrix hstack(const std::vector<Matrix>& blocks);
  static Matrix vstack(const std::vector<Matrix>& blocks);

  Field field() const { return f_; }
  std::size_t rows() const { return r_; }
  std::size_t cols() const { return c_; }

  Rat get(std::size_t i, std::size_t j) const;
  void set(std::size_t i, std::size_t j, const Rat& v);
  void add_at(std::size_t i, std::size_t j, const Rat& v);
  bool entry_is_zero(std::size_t i, std::size_t j) const;

  bool is_zero() const;
  bool operator==(const Matrix& o) const;

  Matrix operator+(const Matrix& o) const;
  Matrix operator-(const Matrix& o) const;
  Matrix operator-() const;
  Matrix operator*(const Matrix& o) const;
  Matrix scalar_mul(const Rat& c) const;
  Matrix transpose() const;

  // Tensor (Kronecker) product under the global pair-index convention.
  Matrix kron(const Matrix& o) const;

  Matrix col(std::size_t j) const;
  Matrix submatrix_cols(const std::vector<std::size_t>& js) const;
  void set_block(std::size_t i0, std::size_t j0, const Matrix& m);

  // Reduced row echelon form.
  Rref rref() const;

  std::size_t rank() const;
  // Columns form a basis of { x : A x = 0 }, ordered by free column index.
  Matrix kernel_basis() const;
  // Columns form a basis of the column space (echelon-normalized,
  // deterministic).
  Matrix column_space_basis() const;
  // Solution X of A X = B with free variables set to zero, or nullopt when
  // some column of B is not in the column space. Shape mismatches throw
  // DimensionError (a malformed call, not an unsolvable system).
  std::optional<Matrix> solve(const Matrix& b) const;
  std::optional<Matrix> inverse() const;

  // Data of the quotient of k^rows by the span of this matrix's columns:
  // proj is a (rows - rank) x rows surjection with kernel exactly the span,
  // sect a right inverse picking the non-pivot coordinates. Deterministic.
  Quotient quotient() const;

  // Internal fast row views (residues) — only valid over F_p.
  std::uint32_t* fp_row(std::size_t i);
  const std::uint32_t* fp_row(std::size_t i) const;
  Rat* q_row(std::size_t i);
  const Rat* q_row(std::size_t i) const;

 private:
  Field f_;
  std::size_t r_, c_;
  std::vector<Rat> q_;           // row-major when f_ is Q
  std::vector<std::uint32_t> m_; // row-major when f_ is F_p
  void check_same_field(const Matrix& o) const;
};

struct Rref {
  Matrix mat;
  std::vector<std::size_t> pivot_cols;
};

struct Quotient {
  Matrix proj;
  Matrix sect;
};

// Column-sparse matrix used for complex differentials and chain-map
// components, whose ambient dimensions can reach ~10^4 while columns carry a
// handful of entries. Entries over F_p are canonical residues.
class SparseMat {
 public:
  SparseMat() : SparseMat(Field::Q(), 0, 0) {}
  SparseMat(Field f, std::size_t rows, std::size_t cols);

  static SparseMat identity(Field f, std::size_t n);
  static SparseMat from_dense(const Matrix& m);

  Field field() const { return f_; }
  std::size_t rows() const { return r_; }
  std::size_t cols() const { return c_; }
  std::size_t nnz() const;

  void add_at(std::size_t i, std::size_t j, const Rat& v);
  bool is_zero() const;
  bool operator==(const SparseMat& o) const;

  SparseMat operator+(const SparseMat& o) const;
  SparseMat operator-(const SparseMat& o) const;
  SparseMat scalar_mul(const Rat& c) const;
  // Composition this * o (apply o first).
  SparseMat operator*(const SparseMat& o) const;
  SparseMat transpose() const;
  SparseMat kron(const SparseMat& o) const;

  Matrix to_dense() const;
  // this * dense (columns of x are vectors).
  Matrix apply(const Matrix& x) const;

  // Sorted (row, value) entries of column j; values are exact rationals
  // (residues over F_p).
  std::vector<std::pair<std::size_t, Rat>> col_entries(std::size_t j) const;
  void set_col(std::size_t j,
               std::vector<std::pair<std::size_t, Rat>> entries);

  std::size_t col_rank() const;

 private:
  Field f_;
  std::size_t r_, c_;
  // Per column, sorted by row index.
  std::vector<std::vector<std::pair<std::size_t, Rat>>> q_;
  std::vector<std::vector<std::pair<std::size_t, std::uint32_t>>> m_;
};

// Incremental row-echelon accumulator: feed rows (dense or sparse), it keeps
// a normalized echelon basis of their span. Used for column-space bases,
// ranks of wide sparse maps, and membership tests, without materializing
// dense copies of large matrices.
class RowEchelon {
 public:
  RowEchelon(Field f, std::size_t ncols);

  // Reduces the row against the basis; inserts the normalized remainder if
  // nonzero. Returns true when the rank grew.
  bool insert(const Matrix& row_vec);
  bool insert_sparse(const std::vector<std::pair<std::size_t, Rat>>& entries);

  // True iff the row lies in the current span.
  bool contains(const Matrix& row_vec) const;

  std::size_t rank() const { return lead_.size(); }
  std::size_t ncols() const { return c_; }
  bool full() const { return lead_.size() == c_; }

  // Basis rows as columns of a dense matrix (insertion order).
  Matrix basis_cols() const;

 private:
  Field f_;
  std::size_t c_;
  std::vector<std::vector<Rat>> qrows_;
  std::vector<std::vector<std::uint32_t>> frows_;
  std::vector<std::size_t> lead_;  // leading column of each stored row
  // Reduce a scratch row in place; returns leading index or c_ if zero.
  std::size_t reduce_q(std::vector<Rat>& v) const;
  std::size_t reduce_f(std::vector<std::uint32_t>& v) const;
  friend class Matrix;
};

// Exact scalar arithmetic that is field-aware: over F_p every result is
// canonicalized to its residue, over ℚ it is plain rational arithmetic.
struct FieldOps {
  Field f;
  explicit FieldOps(Field ff) : f(ff) {}
  Rat canon(const Rat& a) const;
  Rat mul(const Rat& a, const Rat& b) const;
  Rat neg(const Rat& a) const;
  Rat inv(const Rat& a) const;
};

// Sparse vector: (index, value) pairs sorted by index, no zero values.
using SparseVec = std::vector<std::pair<std::size_t, Rat>>;

// y += c·x on sorted sparse vectors; cancelled entries are dropped.
void sparse_axpy(SparseVec& y, const Rat& c, const SparseVec& x,
                 const FieldOps& ops);

// Incremental exact elimination over a stream of sparse columns. Maintains a
// normalized sparse echelon basis of their span keyed by leading index.
// With `history`, each basis vector remembers its decomposition over the
// tracked inserted columns, so span membership becomes a linear solve whose
// answer is expressed over those columns (columns inserted with id = npos
// contribute to the span but not to the answer — "solve modulo them").
// With `full_reduce`, the basis is kept fully reduced (needed to read off
// quotient projections).
class SparseSolver {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  SparseSolver(Field f, std::size_t height, bool history = false,
               bool full_reduce = false);

  // Inserts a column; returns true when it enlarged the span.
  bool add_col(const SparseVec& col, std::size_t id = npos);

  std::size_t height() const { return h_; }
  std::size_t rank() const { return rows_.size(); }
  bool contains(const SparseVec& v) const;
  // Coordinates of b over the tracked columns, modulo the untracked ones;
  // nullopt iff b is outside the span of all inserted columns.
  std::optional<SparseVec> solve(const SparseVec& b) const;
  std::vector<std::size_t> pivots() const;
  // Fully reduced basis vector with the given leading index, or nullptr.
  const SparseVec* row_with_lead(std::size_t i) const;

 private:
  struct Row {
    SparseVec v;
    SparseVec combo;
  };
  FieldOps ops_;
  std::size_t h_;
  bool hist_, full_;
  std::map<std::size_t, Row> rows_;
  // Eliminates every pivot-position entry of v, accumulating combo.
  void reduce(SparseVec& v, SparseVec* combo) const;
};

// Sparse column of a dense matrix (canonical residues over F_p).
SparseVec sparse_col(const Matrix& m, std::size_t j);
// Dense single column from a sparse vector.
Matrix dense_col(Field f, std::size_t n, const SparseVec& v);

}  // namespace hhcap
