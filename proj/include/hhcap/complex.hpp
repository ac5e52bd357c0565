#pragma once
// Bounded complexes with exact homology, chain maps and homotopies, shifts,
// tensor products over an intermediate algebra, quasi-isomorphism testing,
// and lifting through quasi-isomorphisms.
//
// Global sign conventions:
//   - homological grading: d_n : C_n → C_{n−1};
//   - a ChainMap of degree r satisfies d ∘ f = (−1)^r f ∘ d;
//   - a Homotopy h between f and g of degree r satisfies
//     f − g = d∘h + (−1)^r h∘d, with components h_n : C_n → D_{n+r+1};
//   - shift(c, m) multiplies the differential by (−1)^m;
//   - on a tensor product, d(x⊗y) = dx⊗y + (−1)^{|x|} x⊗dy.

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hhcap/module.hpp"

namespace hhcap {

// Saturating degree bound used for "honestly complete in this direction".
constexpr int kDegInf = 1 << 20;
int deg_add(int a, int b);

// Degrees where a complex's homology agrees with the untruncated object it
// models; operations propagate this pessimistically and homology refuses to
// answer outside it.
struct TrustedRange {
  int lo = -kDegInf;
  int hi = kDegInf;
  bool contains(int n) const { return lo <= n && n <= hi; }
};
TrustedRange intersect(TrustedRange a, TrustedRange b);

// One block of degreewise free structure: starting at `offset`, the basis
// factors as (left ring basis) × (generators) × (right ring basis), index
// offset + (l·gens + g)·right + r. A factor of extent 1 means "no factor on
// that side". The acting rings are the complex's "left"/"right" families. A
// degree may carry several blocks; together they must tile the whole term
// for the generator-parameterized solvers to apply.
struct FreeBlock {
  std::size_t offset = 0;
  std::size_t left = 1;
  std::size_t gens = 0;
  std::size_t right = 1;
  std::size_t dim() const { return left * gens * right; }
};

// A family of commuting actions on the terms of a complex, one sparse matrix
// per algebra basis element per degree. Right-style actions are
// contravariant: act(x)·act(y) = act(y·x).
struct ActionFamily {
  AlgebraPtr alg;
  bool contravariant = false;
  std::map<int, std::vector<SparseMat>> act;
};

class Complex {
 public:
  Complex() = default;
  // dims[i] is the dimension in degree lo+i; diffs[i] maps degree lo+i+1 to
  // degree lo+i (so diffs.size() == dims.size() − 1 when nonempty).
  Complex(Field f, int lo, std::vector<std::size_t> dims,
          std::vector<SparseMat> diffs, TrustedRange trusted);

  Field field() const { return f_; }
  int lo() const { return lo_; }
  int hi() const { return lo_ + static_cast<int>(dims_.size()) - 1; }
  std::size_t dim(int n) const;
  // d_n : C_n → C_{n−1}; zero-shaped outside the stored window.
  SparseMat diff(int n) const;
  const TrustedRange& trusted() const { return tr_; }
  void restrict_trusted(TrustedRange t) { tr_ = intersect(tr_, t); }
  // Throws ValidationError unless every composable pair satisfies d² = 0.
  void check_differential() const;
  std::size_t total_dim() const;

  // Optional metadata, populated by constructors and then left frozen.
  std::map<int, std::vector<FreeBlock>> free_data;
  std::map<std::string, ActionFamily> families;

  bool has_family(const std::string& name) const;
  const ActionFamily& family(const std::string& name) const;
  // Action of the basis element `i` of the family's algebra on degree n.
  const SparseMat& family_action(const std::string& name, int n,
                                 std::size_t i) const;

 private:
  Field f_ = Field::Q();
  int lo_ = 0;
  std::vector<std::size_t> dims_;
  std::vector<SparseMat> diffs_;
  TrustedRange tr_;
};

using ComplexPtr = std::shared_ptr<const Complex>;
ComplexPtr share(Complex c);

// Degree-r map of complexes with sparse components f_n : C_n → D_{n+r}.
class ChainMap {
 public:
  ChainMap(ComplexPtr src, ComplexPtr dst, int degree,
           std::map<int, SparseMat> comps);
  static ChainMap identity(ComplexPtr c);
  static ChainMap zero(ComplexPtr src, ComplexPtr dst, int degree);

  const ComplexPtr& src() const { return src_; }
  const ComplexPtr& dst() const { return dst_; }
  int degree() const { return deg_; }
  SparseMat component(int n) const;  // zero-shaped when absent
  bool has_component(int n) const { return comps_.count(n) != 0; }

  // d ∘ f = (−1)^r f ∘ d on every stored degree.
  bool is_chain_map() const;
  // this ∘ inner (inner first); degrees add.
  ChainMap compose(const ChainMap& inner) const;
  ChainMap operator+(const ChainMap& o) const;
  ChainMap operator-(const ChainMap& o) const;
  ChainMap scalar_mul(const Rat& c) const;
  // Component applied to dense columns at degree n.
  Matrix apply(int n, const Matrix& v) const;

 private:
  ComplexPtr src_, dst_;
  int deg_ = 0;
  std::map<int, SparseMat> comps_;
};

struct Homotopy {
  ComplexPtr src, dst;
  int map_degree = 0;  // the degree r of the maps it compares
  std::map<int, SparseMat> comps;  // h_n : C_n → D_{n+r+1}
  SparseMat component(int n) const;
};

// Exact check of f − g = d∘h + (−1)^r h∘d.
bool check_homotopy(const ChainMap& f, const ChainMap& g, const Homotopy& h);

// Homology with cycle representatives and coordinate computation. The
// representatives extend an echelon basis of the boundary space, so
// coordinates are computed modulo boundaries by sparse elimination.
class HomologySpace {
 public:
  int degree() const { return degree_; }
  std::size_t dim() const { return dim_; }
  // term-dim × dim cycle representatives.
  const Matrix& reps() const { return reps_; }
  // dim × k coordinates of cycle columns; ValidationError on a non-cycle.
  Matrix coords(const Matrix& cycles) const;

 private:
  int degree_ = 0;
  std::size_t dim_ = 0;
  Matrix reps_;
  std::shared_ptr<SparseSolver> solver_;
  Field field_ = Field::Q();
  std::size_t term_dim_ = 0;
  friend HomologySpace homology(const Complex& c, int n);
};

// Throws TruncationError outside the trusted range.
HomologySpace homology(const Complex& c, int n);

// c[m]: degree n holds c's degree n−m; differential scaled by (−1)^m.
Complex shift(const Complex& c, int m);

// Matrix of H_n(src) → H_{n+r}(dst).
Matrix induced_on_homology(const ChainMap& f, int n);

// Induced map invertible in every degree that is trusted on both sides and
// meets either support.
bool is_quasi_iso(const ChainMap& f);

// Options for solving homotopy problems. With `use_free`, degrees carrying
// free structure are parameterized by generator values and the defining
// equations are imposed on generator columns only — sound when the inputs
// and differentials are equivariant for the tied families (always verified
// on the full basis afterwards). `families` lists extra action families the
// solved homotopy must additionally commute with.
struct LinearityReq {
  bool use_free = true;
  std::vector<std::string> families;
};

// Solve f − g = d∘h + (−1)^r h∘d for h.
std::optional<Homotopy> homotopy_between(const ChainMap& f, const ChainMap& g,
                                         const LinearityReq& lin = {});
// Existence of an unconstrained homotopy (full basis, no equivariance).
bool homotopic(const ChainMap& f, const ChainMap& g);

struct LiftResult {
  ChainMap lift;      // u : P → Y with s ∘ u ≃ g
  Homotopy homotopy;  // witness for s∘u − g
};

// Lift g : P → Z through the degree-0 quasi-isomorphism s : Y → Z, solving
// degree by degree from P.lo() to `up_to` over P's free structure. Throws
// LiftError when a degree is unsolvable (e.g. outside the trusted margin).
LiftResult lift_through_quasi_iso(const ChainMap& g, const ChainMap& s,
                                  int up_to);

// Extends generator values to the full component using the source's free
// structure and the destination's "left"/"right" families. The columns of
// `vals` run over all generators, blocks in order.
SparseMat extend_free_map(const Complex& p, int n, const Complex& y,
                          int y_deg, const Matrix& vals);
// Total number of free generators of p in degree n (its full dimension when
// the degree has no free structure).
std::size_t free_gens(const Complex& p, int n);

// Coordinates of the generator 1 ⊗ g_t ⊗ 1 (global generator index t, blocks
// in order) inside the degree-n term of a complex with free structure there.
SparseVec free_generator_column(const Complex& p, int n, std::size_t t);

// Decomposition of a basis index of a free degree into (left ring basis,
// global generator, right ring basis).
struct FreeSplit {
  std::size_t l = 0, gen = 0, r = 0;
};
FreeSplit free_split(const Complex& p, int n, std::size_t idx);

// Highest / lowest degree whose stored term is honest (agrees with the
// untruncated object); kDegInf-valued trusted bounds mean "complete on that
// side". Used to propagate trusted ranges through tensor-like constructions:
// a result term is honest when every contributing factor term is, and
// homology is trusted one degree inside the honest-term window.
int term_trust_hi(const Complex& x);
int term_trust_lo(const Complex& x);
TrustedRange tensor_trusted_range(const Complex& c, const Complex& d);

// Tensor product over an intermediate algebra r: contracts c's "right"
// family with d's "left" family (both over r) blockwise and totalizes; when
// r is the base field (dim 1) nothing is contracted. Result families: "left"
// from c, "right" from d, all other input families carried with "l."/"r."
// prefixes. Blocks are ordered by ascending c-degree.
struct TensorBlock {
  int p, q;            // source degrees (c-degree, d-degree)
  std::size_t offset;  // offset of the block in the stacked pre-quotient term
  std::size_t dim;     // block dimension before the quotient
};
struct TensorOver {
  Complex complex;
  std::map<int, std::vector<TensorBlock>> blocks;
  std::map<int, SparseMat> proj;  // stacked term → quotient term
  std::map<int, SparseMat> sect;  // right inverse of proj
};
TensorOver tensor_over_full(const Complex& c, const Complex& d,
                            const Algebra& r);
Complex tensor_over(const Complex& c, const Complex& d, const Algebra& r);

}  // namespace hhcap
