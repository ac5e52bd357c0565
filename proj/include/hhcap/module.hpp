#pragma once
// Right modules and bimodules over finite-dimensional algebras, with hom-space
// and endomorphism-algebra computations. An (A,B)-bimodule is interchangeable
// with a right module over opposite(A) ⊗ B.

#include <cstddef>
#include <string>
#include <vector>

#include "hhcap/algebra.hpp"

namespace hhcap {

struct ModuleReport {
  bool ok = true;
  std::string detail;
};

// A finite-dimensional right module: action[i] is the matrix of v ↦ v·e_i.
// Contravariance: ρ(e_j)·ρ(e_i) = Σ_k c_{ij}^k ρ(e_k) where e_i e_j = Σ c e_k.
class Module {
 public:
  Module(AlgebraPtr a, std::size_t dim, std::vector<Matrix> action);

  const AlgebraPtr& algebra() const { return alg_; }
  std::size_t dim() const { return dim_; }
  const Matrix& action(std::size_t i) const { return action_.at(i); }
  // Matrix of v ↦ v·x for a coordinate column x over the algebra.
  Matrix action_of(const Matrix& x) const;
  // Columnwise v·x for matching column counts.
  Matrix act(const Matrix& v, const Matrix& x) const;

 private:
  AlgebraPtr alg_;
  std::size_t dim_;
  std::vector<Matrix> action_;
};

// Checks ρ(unit) = id and the contravariance identity on all basis pairs.
ModuleReport validate_module(const Module& m);

// A^rank with the right regular action; coordinates are copy-major
// (copy index · dim A + algebra index).
Module free_module(AlgebraPtr a, std::size_t rank);

Module direct_sum(const Module& x, const Module& y);

// Basis of the space of right-module maps m → n, as dim(n) × dim(m) matrices
// (deterministic order from the kernel computation).
std::vector<Matrix> hom_space(const Module& m, const Module& n);

// Coordinates of a map in a hom-space basis; throws LiftError if absent.
Matrix hom_coords(const std::vector<Matrix>& basis, const Matrix& map);

// A two-sided structure: commuting left and right actions.
class Bimodule {
 public:
  Bimodule(AlgebraPtr left, AlgebraPtr right, std::size_t dim,
           std::vector<Matrix> left_action, std::vector<Matrix> right_action);

  const AlgebraPtr& left_algebra() const { return left_; }
  const AlgebraPtr& right_algebra() const { return right_; }
  std::size_t dim() const { return dim_; }
  const Matrix& left_action(std::size_t i) const { return lact_.at(i); }
  const Matrix& right_action(std::size_t j) const { return ract_.at(j); }
  // Matrix of v ↦ a·v (resp. v ↦ v·b) for coordinate columns.
  Matrix left_act(const Matrix& a) const;
  Matrix right_act(const Matrix& b) const;

 private:
  AlgebraPtr left_;
  AlgebraPtr right_;
  std::size_t dim_;
  std::vector<Matrix> lact_;
  std::vector<Matrix> ract_;
};

// Checks unit axioms, left covariance, right contravariance, and that the two
// actions commute on all basis pairs.
ModuleReport validate_bimodule(const Bimodule& m);

// A as an (A,A)-bimodule.
Bimodule regular_bimodule(AlgebraPtr a);

// Re-encode an (A,B)-bimodule as a right module over opposite(A) ⊗ B, and
// back. The round trip is lossless.
Module to_right_module(const Bimodule& m);
Bimodule from_right_module(const Module& m, AlgebraPtr left, AlgebraPtr right);

// hom_space(m, m) with its composition algebra; m becomes an (End, A)-bimodule.
struct EndData {
  AlgebraPtr algebra;         // End_A(m), labels f1, f2, ...
  std::vector<Matrix> maps;   // basis of endomorphisms, aligned with algebra
  Bimodule bimodule;          // m as an (End_A(m), A)-bimodule
};
EndData endomorphism_algebra(const Module& m);

}  // namespace hhcap
