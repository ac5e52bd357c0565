#pragma once

#include <cstddef>
#include <vector>

#include "hhcap/bartensor.hpp"
#include "hhcap/complex.hpp"
#include "hhcap/module.hpp"

namespace hhcap {

// Chain complex M ⊗ A^{⊗n} in degrees 0..top with the face-sum boundary
//   b(m⊗a_1…a_n) = m·a_1 ⊗ a_2…a_n
//     + Σ_{i=1}^{n−1} (−1)^i m ⊗ …(a_i a_{i+1})…
//     + (−1)^n a_n·m ⊗ a_1…a_{n−1}.
// Basis index i_m·dim(A)^n + word, words left-major. Homology in degree n
// is trusted for n ≤ top − 1.
struct Chains {
  AlgebraPtr alg;
  Bimodule coef;
  ComplexPtr complex;
  int top = 0;
};
Chains hochschild_chains(AlgebraPtr a, const Bimodule& m, int top,
                         std::size_t budget);

// Cochain complex Hom_k(A^{⊗n}, M) in degrees 0..top; a degree-n cochain
// is a dim(M) × dim(A)^n matrix and
//   (δf)(a_1…a_{n+1}) = a_1·f(a_2…a_{n+1})
//     + Σ_{i=1}^{n} (−1)^i f(…(a_i a_{i+1})…)
//     + (−1)^{n+1} f(a_1…a_n)·a_{n+1}.
// Stored as a chain complex holding the n-cochains in homological degree
// −n, so the homology machinery applies unchanged; HH^n is trusted for
// n ≤ top − 1.
struct Cochains {
  AlgebraPtr alg;
  std::size_t coef_dim = 0;
  ComplexPtr complex;
  int top = 0;
};
Cochains hochschild_cochains(AlgebraPtr a, const Bimodule& m, int top,
                             std::size_t budget);

// Matrix-form cochains flattened to columns (word-major: entry (i, w) at
// flat index w·rows + i) and back.
Matrix cochain_to_column(const Matrix& f);
Matrix column_to_cochain(std::size_t rows, const Matrix& v);

// δf as a dim(M) × dim(A)^{n+1} matrix; the degree n is read off the width
// of f. Throws TruncationError at the stored top.
Matrix cochain_delta(const Cochains& co, const Matrix& f);
bool is_cocycle(const Cochains& co, const Matrix& f);

// HH_n(A, M) with explicit cycle representatives.
HomologySpace hochschild_homology(const Chains& ch, int n);
// HH^n(A, M); representative columns flatten matrix cochains.
HomologySpace hochschild_cohomology(const Cochains& co, int n);
// Cocycles spanning HH^n in matrix form.
std::vector<Matrix> cohomology_basis(const Cochains& co, int n);

// Degreewise identification of the face-formula chains with the collapsed
// tensor model assembled from the bar resolution. In the layouts used here
// the identification is the identity in every degree; construction fails
// unless it intertwines the two independently built differentials.
ChainMap chains_vs_bar_identification(const Chains& ch,
                                      const HochschildModel& hm);

// A closed m-cochain f with coefficients in the algebra itself, realized on
// the bar resolution:
//  - to_base is the degree −m chain map Bar(A) → A with the single
//    component a_0⊗a_1⊗…⊗a_m⊗a_{m+1} ↦ a_0·f(a_1⊗…⊗a_m)·a_{m+1} in
//    degree m (its chain property is exactly δf = 0);
//  - endo is a degree −m lift f̃ : Bar(A) → Bar(A) with aug∘f̃ ≃ to_base,
//    witnessed by aug_htpy.
// Requires m ≤ top − 2 so at least one degree of the lift is verifiable.
struct CocycleLift {
  ChainMap to_base;
  ChainMap endo;
  Homotopy aug_htpy;
};
CocycleLift cocycle_to_chain_map(const Resolution& bar, int m,
                                 const Matrix& f);

}  // namespace hhcap
