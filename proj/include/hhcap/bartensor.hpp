#pragma once
// Bar-type free bimodule resolutions, tensor products collapsed against them
// over an enveloping ring, and three-layer C ⊗_R Bar(R) ⊗_R D sandwich
// complexes. These are the workhorses behind the Hochschild chain models and
// the comparison maps between them.

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "hhcap/algebra.hpp"
#include "hhcap/complex.hpp"
#include "hhcap/module.hpp"

namespace hhcap {

// A bimodule placed in degree 0, its two actions exposed as the "left" and
// "right" families. Trusted everywhere (the object is complete).
Complex bimodule_complex(const Bimodule& m);

// A free bimodule replacement: `complex` resolves `base` (the replaced
// bimodule in degree 0) through the degree-0 augmentation `aug`, a
// quasi-isomorphism on the stored range.
struct Resolution {
  ComplexPtr complex;
  ComplexPtr base;
  ChainMap aug;
};

// Bar resolution of the regular bimodule: degree n holds words of length
// n + 2 over the algebra's basis, free on the inner words with the outer two
// letters as the (left, right) ring factors. Stored up to degree `top`,
// trusted up to top − 1; the augmentation is multiplication. Throws
// BudgetError when a term would exceed `budget` basis elements.
Resolution bar_resolution(AlgebraPtr a, int top, std::size_t budget);

// Free replacement of an arbitrary bimodule M: degree n is
// ⊕_{p+q=n} A ⊗ A^{⊗p} ⊗ M ⊗ A^{⊗q} ⊗ A with the two-sided simplicial
// differential, laid out left-ring-major so each degree is one free block.
// The regular bimodule shortcuts to bar_resolution.
Resolution two_sided_bar_replacement(AlgebraPtr a, const Bimodule& m, int top,
                                     std::size_t budget);

// Tensor product of two complexes of bimodules over the enveloping ring of
// A, collapsed along a free factor: V ⊗ C modulo (a·v·b) ⊗ c = v ⊗ (b·c·a).
// If C is free (its free blocks tile every degree), each result term is
// V_p ⊗ generators(C_q) and the relation is folded into the differential
// through V's `vleft`/`vright` action families; otherwise V must be free and
// the roles swap, acting through C's "left"/"right" families. Blocks are
// ordered by ascending V-degree p; the in-block index is i_v·G_q + i_g on a
// collapsed C side and i_g·dim(C_q) + i_c on a collapsed V side.
//
// Families: the surviving (non-collapsed) factor's families other than the
// consumed pair are carried degree-wise under their original names (a name
// collision or a family on the collapsed factor throws). Afterwards, if the
// result lacks a "left" family but carries "r.left", that family is renamed
// to "left", and likewise "l.right" to "right" — so collapsing the A-actions
// out of an (A,B)-style mixed factor leaves an honest B-bimodule complex.
struct EnvTensor {
  ComplexPtr complex;
  ComplexPtr vfac, cfac;  // the two factors as validated
  std::map<int, std::vector<TensorBlock>> blocks;  // p = V-degree, q = C-degree
  bool v_side = false;   // true when V supplied the free structure
  std::string vleft, vright;  // family names consumed on the V factor
};
EnvTensor env_tensor_full(const Complex& v, const Complex& c,
                          const std::string& vleft = "left",
                          const std::string& vright = "right");
ComplexPtr env_tensor(const Complex& v, const Complex& c,
                      const std::string& vleft = "left",
                      const std::string& vright = "right");

// Map induced on collapsed tensor products by a chain map of the surviving
// factor (the free factor and its generators are fixed): blockwise f_p ⊗ id
// when the C side is collapsed, id ⊗ f_q when the V side is. Both envelopes
// must be collapsed on the same side.
ChainMap env_tensor_map(const ChainMap& f, const EnvTensor& src,
                        const EnvTensor& dst);

// Map induced on collapsed tensor products by a chain map of the free
// collapsed factor, which must be equivariant for the side actions the
// collapse consumes (verified on the full basis; ValidationError
// otherwise). Writing r for the degree of the map, the induced map sends
// v⊗c ↦ (−1)^{deg(v)·r} v⊗f(c) when the C side is collapsed and
// v⊗c ↦ f(v)⊗c when the V side is; both envelopes must be collapsed on the
// same side and share the surviving factor.
ChainMap env_collapsed_map(const ChainMap& f, const EnvTensor& src,
                           const EnvTensor& dst);

// Hochschild chain model of a bimodule: M[0] collapsed against the bar
// resolution. Degree n is literally M ⊗ A^{⊗n} carrying the cyclic face
// differential.
struct HochschildModel {
  Resolution bar;
  EnvTensor model;
};
HochschildModel hochschild_model(AlgebraPtr a, const Bimodule& m, int top,
                                 std::size_t budget);

// Three-layer sandwich C ⊗_R Bar(R) ⊗_R D: degree n is
// ⊕_{s+t+u=n} C_s ⊗ R^{⊗t} ⊗ D_u (blocks ordered s ascending then t
// ascending, in-block index (i_c·dim(R)^t + word)·dim(D_u) + i_d), with
// differential d_C ⊗ 1 ⊗ 1 + (−1)^s (bar faces) + (−1)^{s+t} 1 ⊗ 1 ⊗ d_D.
// The bar faces consume C's "right" and D's "left" families; C's "left" and
// D's "right" are carried under those names, other families with "l."/"r."
// prefixes. When an outer factor is the regular bimodule in degree 0 the
// result receives the matching free-block structure. Stored up to degree
// `top`; each degree's dimension is checked against `budget`.
struct SandwichBlock {
  int s, t, u;
  std::size_t offset, dim;
};
struct Sandwich {
  ComplexPtr complex;
  std::map<int, std::vector<SandwichBlock>> blocks;
  AlgebraPtr ring;          // the ring the middle words run over
  ComplexPtr left, right;   // copies of the outer factors
};
Sandwich sandwich(const Complex& c, AlgebraPtr r, const Complex& d, int top,
                  std::size_t budget);

}  // namespace hhcap
