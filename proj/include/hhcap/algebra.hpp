#pragma once
// Finite-dimensional associative unital algebras presented by structure
// constants, with the standard constructions: dual numbers, path algebras of
// acyclic quivers, matrix algebras, opposites, tensor and enveloping algebras.

#include <cstddef>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "hhcap/field.hpp"
#include "hhcap/matrix.hpp"

namespace hhcap {

// Result of validate_algebra: either ok, or a description of the first
// violated axiom including the offending basis indices.
struct AlgebraReport {
  bool ok = true;
  std::string detail;
};

// A finite-dimensional associative unital algebra over an exact field.
// Multiplication is stored as a dim × dim² matrix whose column i·dim + j
// holds the coordinates of e_i · e_j; the unit is a coordinate column.
class Algebra {
 public:
  Algebra(Field f, std::vector<std::string> labels, Matrix mu, Matrix unit);

  const Field& field() const { return field_; }
  std::size_t dim() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(std::size_t i) const { return labels_.at(i); }
  const Matrix& mu() const { return mu_; }
  const Matrix& unit() const { return unit_; }

  // Columnwise product of coordinate vectors (dim × k each).
  Matrix mult(const Matrix& x, const Matrix& y) const;
  // Coordinates of e_i · e_j.
  Matrix basis_product(std::size_t i, std::size_t j) const;
  // Matrix of y ↦ x·y (resp. y ↦ y·x) for a coordinate column x.
  Matrix left_mult(const Matrix& x) const;
  Matrix right_mult(const Matrix& x) const;

 private:
  Field field_;
  std::vector<std::string> labels_;
  Matrix mu_;    // dim × dim²
  Matrix unit_;  // dim × 1
};

// Checks associativity on all basis triples and both unit axioms; reports the
// first violation found.
AlgebraReport validate_algebra(const Algebra& a);

// k[x]/(x²) with basis {1, x}.
Algebra dual_numbers(Field f);

// Path algebra of a finite acyclic quiver on vertices 1..num_vertices.
// Arrows are (source, target) pairs, optionally named (defaults a1, a2, ...).
// Basis: trivial paths e_v first, then paths ordered by length and arrow
// sequence. Composition is function-style: for an arrow a: 1→2, both e_2·a
// and a·e_1 equal a, and p·q means "first q, then p".
// Throws ValidationError if the quiver has an oriented cycle.
Algebra path_algebra(
    Field f, std::size_t num_vertices,
    const std::vector<std::pair<std::size_t, std::size_t>>& arrows,
    std::vector<std::string> arrow_names = {});

// Full algebra of n×n matrices, basis E_{ij} in row-major order.
Algebra matrix_algebra(Field f, std::size_t n);

// The same space with reversed multiplication.
Algebra opposite(const Algebra& a);

// a ⊗_k b with basis pairs ordered left-factor-major.
Algebra tensor_algebra(const Algebra& a, const Algebra& b);

// a ⊗_k a^op, over which bimodules are right modules.
Algebra enveloping(const Algebra& a);

// Algebras are shared immutably between modules and complexes.
using AlgebraPtr = std::shared_ptr<const Algebra>;
inline AlgebraPtr share(Algebra a) {
  return std::make_shared<const Algebra>(std::move(a));
}

// Structural sameness (field, multiplication table, unit); labels are
// presentation only.
bool same_algebra(const Algebra& x, const Algebra& y);

}  // namespace hhcap
