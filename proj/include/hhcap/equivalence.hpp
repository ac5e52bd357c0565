#pragma once
// Derived-equivalence data between two finite-dimensional algebras A and B:
// an invertible two-sided complex X of (A,B)-bimodules with inverse X^∨,
// together with unit and counit chain maps relating the sandwich models of
// X ⊗_B X^∨ and X^∨ ⊗_A X to the regular bimodules, validated through the
// triangle identities. Constructors cover the identity equivalence, Morita
// contexts built from progenerators, and classical one-step tilting modules.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "hhcap/algebra.hpp"
#include "hhcap/bartensor.hpp"
#include "hhcap/complex.hpp"
#include "hhcap/module.hpp"

namespace hhcap {

// Functorial map of sandwich complexes induced by degree-0 chain maps of the
// outer factors, blockwise fc ⊗ id ⊗ fd with the middle words fixed. Both
// maps must be equivariant for the side actions the middle words consume
// (fc for the "right" family of the left factor, fd for the "left" family
// of the right factor); this is verified on the full basis and a
// ValidationError is thrown otherwise. The result is checked to be a chain
// map.
ChainMap sandwich_outer_map(const ChainMap& fc, const ChainMap& fd,
                            const Sandwich& src, const Sandwich& dst);

// Collapse of a sandwich whose left (resp. right) outer factor is the
// regular bimodule strip onto the other factor: l⊗w⊗y ↦ (l·w)·y, resp.
// y⊗w⊗r ↦ y·(w·r). Verified to be a chain map; a quasi-isomorphism on the
// trusted range.
ChainMap sandwich_collapse_left(const Sandwich& s);
ChainMap sandwich_collapse_right(const Sandwich& s);

// Pure index reshuffle between the two bracketings of a five-factor tensor,
//   (C ⊗ Bar(S) ⊗ D) ⊗ Bar(R) ⊗ E  →  C ⊗ Bar(S) ⊗ (D ⊗ Bar(R) ⊗ E),
// where `src` is a sandwich whose left factor is `src_inner.complex` and
// `dst` one whose right factor is `dst_inner.complex`, over the same five
// factors in the same order. No signs arise (the factor order is unchanged);
// the result is verified to be a chain map.
ChainMap sandwich_reassociate(const Sandwich& src, const Sandwich& src_inner,
                              const Sandwich& dst, const Sandwich& dst_inner);

// Certificate that a right module is projective: the canonical surjection
// from the free module on its basis together with an explicit module-map
// section of it (so section precomposed with onto is an idempotent on the
// free module splitting off the module). Empty when no section exists.
struct ProjectivityCertificate {
  Matrix onto;     // free_module(a, dim m) → m, generator i ↦ basis vector i
  Matrix section;  // m → free module, with onto · section = id
};
std::optional<ProjectivityCertificate> projectivity_certificate(
    const Module& m);

// Whether the trace ideal Σ_{f : m → A} im f is all of A, decided by a rank
// computation over the hom space.
bool is_generator(const Module& m);

// A projective presentation 0 → ker → cover → t → 0: incl is a module map
// ker → cover, proj a module map cover → t.
struct Presentation {
  Module ker, cover;
  Matrix incl;
  Matrix proj;
};

// Derived-equivalence data. X carries A as its "left" family and B as its
// "right" family; Xv the other way around. xx and vx are the sandwich
// models of X ⊗_B Bar(B) ⊗_B X^∨ (an (A,A)-complex) and of
// X^∨ ⊗_A Bar(A) ⊗_A X (a (B,B)-complex). eta realizes the unit A → X⊗X^∨
// on the bar replacement of A, eps the counit X^∨⊗X → B, and alpha the
// counit of the opposite direction X⊗X^∨ → A (used to read the equivalence
// backwards). All three are degree-0 chain maps and quasi-isomorphisms on
// the trusted range.
struct TiltingDatum {
  AlgebraPtr A, B;
  ComplexPtr X;
  ComplexPtr Xv;
  Sandwich xx;
  Sandwich vx;
  Resolution barA;
  ChainMap eta;    // barA.complex → xx.complex
  ChainMap eps;    // vx.complex → B placed in degree 0
  ChainMap alpha;  // xx.complex → A placed in degree 0
  int top = 0;
  std::size_t budget = 0;
  // Tilting data asserts, without verifying, that the input module has the
  // right number of indecomposable summands; reported, never silently used.
  bool summands_asserted = false;
};

// Pass/fail record from validate_datum. `detail` names the first failure.
struct DatumReport {
  bool eta_quasi_iso = false;
  bool eps_quasi_iso = false;
  bool triangle1 = false;
  bool triangle2 = false;
  bool h0_algebra_iso = false;
  bool summands_asserted = false;
  std::string detail;
  bool ok() const {
    return eta_quasi_iso && eps_quasi_iso && triangle1 && triangle2 &&
           h0_algebra_iso;
  }
};

// The identity equivalence: B = A and both X and X^∨ are the regular
// bimodule in degree 0; the models reduce to the bar resolution.
TiltingDatum identity_datum(AlgebraPtr a, int top, std::size_t budget);

// Morita equivalence from a progenerator p: B = End_A(p), X^∨ = p as a
// (B,A)-bimodule, X = Hom_A(p, A) as an (A,B)-bimodule, eps the evaluation
// p ⊗ Hom_A(p,A) → B and eta solved by lifting through the opposite
// evaluation. Throws NotProgeneratorError when a certificate fails, naming
// it.
TiltingDatum morita_datum(AlgebraPtr a, const Module& p, int top,
                          std::size_t budget);

// Classical tilting equivalence from a tilting module t with the given
// projective presentation: B = End_A(t), X^∨ = t in degree 0 and X the dual
// two-term complex [Hom_A(cover, A) → Hom_A(ker, A)] in degrees {0, −1},
// with B acting through endomorphism lifts along the presentation. The
// presentation is checked exact with projective terms, and Ext¹(t,t) = 0 is
// checked by extending every map ker → t across incl; failures throw
// TiltingError. eps is solved as an equivariant chain map normalized on the
// cycle representing the identity of t, then eta is solved jointly with the
// first triangle identity; the second triangle is checked, not assumed.
TiltingDatum tilting_datum(AlgebraPtr a, const Module& t,
                           const Presentation& pres, int top,
                           std::size_t budget);

// Checks the whole datum: eta and eps are quasi-isomorphisms, both triangle
// identities hold up to bimodule homotopy on the sandwich models, and eps
// induces an algebra isomorphism H_0(vx) ≅ B (unit hit by the distinguished
// cycle, B-action classes spanning). Reports, never throws on failure.
DatumReport validate_datum(const TiltingDatum& d);

// The same equivalence read in the other direction: A and B, X and X^∨
// exchanged, the models swapped, and the unit over B re-solved by lifting
// the bar augmentation of B through eps.
TiltingDatum swap_datum(const TiltingDatum& d);

// Damaged copy for negative controls: eta is post-composed with the left
// action of the given element of A on the model of X ⊗ X^∨. Any element
// other than the unit breaks the first triangle identity.
TiltingDatum corrupt_eta(TiltingDatum d, const Matrix& elt);

}  // namespace hhcap
