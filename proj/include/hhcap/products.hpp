#pragma once

// Chain-level cup and cap products on the standard Hochschild complexes,
// plus the comparison of cap with its realization on the bar resolution.

#include "hhcap/algebra.hpp"
#include "hhcap/bartensor.hpp"
#include "hhcap/hochschild.hpp"
#include "hhcap/matrix.hpp"

namespace hhcap {

// Cup product of algebra-valued cochains: for f of tensor degree p and g of
// tensor degree q (both dim(A) × dim(A)^deg matrices),
//   (f ∪ g)(a_1⊗…⊗a_{p+q}) = f(a_1⊗…⊗a_p) · g(a_{p+1}⊗…⊗a_{p+q}),
// with no extra signs. It is associative and unital on the nose and obeys
// the Leibniz rule δ(f ∪ g) = δf ∪ g + (−1)^p f ∪ δg, so it descends to an
// associative product on HH^*(A, A).
Matrix cup(const Algebra& a, const Matrix& f, const Matrix& g);

// Cap product against an algebra-valued m-cochain f, as a matrix
// M ⊗ A^{⊗n} → M ⊗ A^{⊗(n−m)} in the bases of `hochschild_chains`:
//   f ∩ (m₀⊗a_1⊗…⊗a_n) = (m₀ · f(a_1⊗…⊗a_m)) ⊗ a_{m+1}⊗…⊗a_n.
// f need not be closed; the boundary interaction is
//   b(f ∩ z) = (−1)^m ( f ∩ b(z) − (δf) ∩ z ).
// For n < m the result is the zero map into the zero term.
SparseMat cap_matrix(const Chains& ch, const Matrix& f, int n);

// The cap components n = m..top assembled into a degree −m chain map (under
// the d∘F = (−1)^{deg F} F∘d convention); by the boundary identity above
// this is a chain map exactly when f is closed, and a ValidationError is
// thrown otherwise. Together with `cup` it makes HH_*(A, M) a module over
// HH^*(A, A): (g ∪ f) ∩ z = f ∩ (g ∩ z) already at chain level.
ChainMap cap_map(const Chains& ch, const Matrix& f);

// f ∩ z for dense chain columns z in degree n.
Matrix cap_chain(const Chains& ch, const Matrix& f, int n, const Matrix& z);

// Matrix of [z] ↦ [f ∩ z] : HH_n(A, M) → HH_{n−m}(A, M) in the stored
// homology bases; f must be closed (coordinates of a non-cycle throw).
Matrix cap_on_homology(const Chains& ch, const Matrix& f, int n);

// Checks on HH_n that capping with the closed cochain f agrees with the
// endomorphism of the collapsed bar model induced by realizing f as a
// degree −m chain self-map f̃ of the bar resolution: with L the degreewise
// identification of the face-formula chains with the collapsed model,
//   H_{n}(id ⊗ f̃) ∘ H_n(L) == H_{n−m}(L) ∘ (f ∩ −).
// Throws ValidationError if the collapsed endomorphism fails to be a chain
// map; returns whether the square commutes.
bool verify_lemma_square(const Chains& ch, const HochschildModel& hm,
                         const Matrix& f, int n);

}  // namespace hhcap
