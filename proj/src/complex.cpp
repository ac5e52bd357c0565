#include "hhcap/complex.hpp"

#include <algorithm>
#include <tuple>
#include <utility>

namespace hhcap {

int deg_add(int a, int b) {
  long long s = static_cast<long long>(a) + static_cast<long long>(b);
  if (s >= kDegInf) return kDegInf;
  if (s <= -kDegInf) return -kDegInf;
  return static_cast<int>(s);
}

TrustedRange intersect(TrustedRange a, TrustedRange b) {
  return TrustedRange{std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
}

namespace {

bool same_shape(const Complex& a, const Complex& b) {
  if (!(a.field() == b.field())) return false;
  int lo = std::min(a.lo(), b.lo());
  int hi = std::max(a.hi(), b.hi());
  for (int n = lo; n <= hi; ++n)
    if (a.dim(n) != b.dim(n)) return false;
  return true;
}

// m applied to a sparse vector.
SparseVec mat_apply_sv(const SparseMat& m, const SparseVec& v,
                       const FieldOps& ops) {
  SparseVec out;
  for (const auto& [j, c] : v) {
    const SparseVec col = m.col_entries(j);
    sparse_axpy(out, c, col, ops);
  }
  return out;
}

void add_block(SparseMat& m, std::size_t i0, std::size_t j0, const SparseMat& b,
               const Rat& scale) {
  for (std::size_t j = 0; j < b.cols(); ++j)
    for (const auto& [i, v] : b.col_entries(j))
      m.add_at(i0 + i, j0 + j, v * scale);
}

// Side actions for extending maps off generators: extent 1 means the side is
// trivial and contributes an identity.
std::vector<SparseMat> side_acts(const Complex& y, int y_deg, const char* name,
                                 std::size_t extent, Field f,
                                 std::size_t ydim) {
  if (extent <= 1) return {SparseMat::identity(f, ydim)};
  const ActionFamily& fam = y.family(name);
  if (fam.alg->dim() != extent)
    throw DimensionError(std::string("free structure expects the '") + name +
                         "' family algebra to have dimension " +
                         std::to_string(extent) + ", found " +
                         std::to_string(fam.alg->dim()));
  auto it = fam.act.find(y_deg);
  if (it == fam.act.end())
    throw DimensionError(std::string("family '") + name +
                         "' has no actions in degree " + std::to_string(y_deg));
  return it->second;
}

// Resolved free shape of one degree: a block list covering the whole term,
// falling back to the trivial one-block shape (every basis vector its own
// generator) when no usable free data is present.
struct FreeShape {
  std::vector<FreeBlock> blocks;
  std::size_t gens = 0;
  bool param = false;
};

FreeShape shape_of(const Complex& s, int n, bool use_free) {
  FreeShape out;
  auto it = s.free_data.find(n);
  if (use_free && it != s.free_data.end() && !it->second.empty()) {
    std::size_t covered = 0;
    for (const FreeBlock& b : it->second) {
      out.gens += b.gens;
      covered += b.dim();
    }
    if (covered == s.dim(n) && out.gens > 0) {
      out.blocks = it->second;
      out.param = true;
      return out;
    }
    out.gens = 0;
  }
  out.blocks = {FreeBlock{0, 1, s.dim(n), 1}};
  out.gens = s.dim(n);
  out.param = false;
  return out;
}

// (block index, local generator index) of a global generator.
std::pair<std::size_t, std::size_t> locate_gen(const FreeShape& sh,
                                               std::size_t t) {
  std::size_t bi = 0;
  while (t >= sh.blocks[bi].gens) {
    t -= sh.blocks[bi].gens;
    ++bi;
  }
  return {bi, t};
}

// (block index, left, local generator, right) of a basis index.
struct FreeIndex {
  std::size_t block, l, g, r;
};
FreeIndex locate_basis(const FreeShape& sh, std::size_t idx) {
  for (std::size_t bi = 0; bi < sh.blocks.size(); ++bi) {
    const FreeBlock& b = sh.blocks[bi];
    if (idx < b.offset || idx >= b.offset + b.dim()) continue;
    std::size_t local = idx - b.offset;
    std::size_t r = local % b.right;
    std::size_t rest = local / b.right;
    return FreeIndex{bi, rest / b.gens, rest % b.gens, r};
  }
  throw DimensionError("basis index " + std::to_string(idx) +
                       " is not covered by the free structure");
}

// Extension of generator values to the full free term, block by block.
SparseMat extend_with(const std::vector<FreeBlock>& blocks, std::size_t pdim,
                      const Complex& y, int y_deg, const Matrix& vals,
                      Field f) {
  std::size_t D = y.dim(y_deg);
  std::size_t G = 0, covered = 0;
  for (const FreeBlock& b : blocks) {
    G += b.gens;
    covered += b.dim();
  }
  if (vals.rows() != D || vals.cols() != G)
    throw DimensionError("generator value matrix has shape " +
                         std::to_string(vals.rows()) + "x" +
                         std::to_string(vals.cols()) + ", expected " +
                         std::to_string(D) + "x" + std::to_string(G));
  if (covered != pdim)
    throw DimensionError("free structure does not tile the source term");
  SparseMat out(f, D, pdim);
  if (D == 0) return out;
  std::size_t goff = 0;
  for (const FreeBlock& b : blocks) {
    std::vector<SparseMat> L = side_acts(y, y_deg, "left", b.left, f, D);
    std::vector<SparseMat> R = side_acts(y, y_deg, "right", b.right, f, D);
    for (std::size_t g = 0; g < b.gens; ++g) {
      Matrix vg = vals.col(goff + g);
      for (std::size_t r2 = 0; r2 < b.right; ++r2) {
        Matrix rv = R[r2].apply(vg);
        for (std::size_t l = 0; l < b.left; ++l) {
          Matrix lv = L[l].apply(rv);
          out.set_col(b.offset + (l * b.gens + g) * b.right + r2,
                      sparse_col(lv, 0));
        }
      }
    }
    goff += b.gens;
  }
  return out;
}

// Coordinates of the generator 1⊗g⊗1 of one free block: unit coordinates of
// the side rings spread over the (left, g, right) index range.
SparseVec free_gencol(const Complex& p, const FreeBlock& b, std::size_t g,
                      const FieldOps& ops) {
  SparseVec uL{{0, Rat(1)}}, uR{{0, Rat(1)}};
  if (b.left > 1) {
    uL.clear();
    Matrix u = p.family("left").alg->unit();
    for (std::size_t i = 0; i < u.rows(); ++i)
      if (!u.entry_is_zero(i, 0)) uL.emplace_back(i, u.get(i, 0));
  }
  if (b.right > 1) {
    uR.clear();
    Matrix u = p.family("right").alg->unit();
    for (std::size_t i = 0; i < u.rows(); ++i)
      if (!u.entry_is_zero(i, 0)) uR.emplace_back(i, u.get(i, 0));
  }
  SparseVec v;
  for (const auto& [l, lv] : uL)
    for (const auto& [r2, rv] : uR)
      v.emplace_back(b.offset + (l * b.gens + g) * b.right + r2,
                     ops.canon(lv * rv));
  return v;
}

SparseVec shape_gencol(const Complex& p, const FreeShape& sh, std::size_t t,
                       const FieldOps& ops) {
  auto [bi, g] = locate_gen(sh, t);
  return free_gencol(p, sh.blocks[bi], g, ops);
}

}  // namespace

Complex::Complex(Field f, int lo, std::vector<std::size_t> dims,
                 std::vector<SparseMat> diffs, TrustedRange trusted)
    : f_(f), lo_(lo), dims_(std::move(dims)), diffs_(std::move(diffs)),
      tr_(trusted) {
  std::size_t want = dims_.empty() ? 0 : dims_.size() - 1;
  if (diffs_.size() != want)
    throw DimensionError("complex with " + std::to_string(dims_.size()) +
                         " terms needs " + std::to_string(want) +
                         " differentials, got " +
                         std::to_string(diffs_.size()));
  for (std::size_t i = 0; i < diffs_.size(); ++i) {
    const SparseMat& d = diffs_[i];
    if (!(d.field() == f_))
      throw FieldMismatchError("complex differential over a different field");
    if (d.rows() != dims_[i] || d.cols() != dims_[i + 1])
      throw DimensionError(
          "differential into degree " + std::to_string(lo_ + static_cast<int>(i)) +
          " has shape " + std::to_string(d.rows()) + "x" +
          std::to_string(d.cols()) + ", expected " + std::to_string(dims_[i]) +
          "x" + std::to_string(dims_[i + 1]));
  }
}

std::size_t Complex::dim(int n) const {
  if (n < lo_ || n > hi()) return 0;
  return dims_[static_cast<std::size_t>(n - lo_)];
}

SparseMat Complex::diff(int n) const {
  if (n >= lo_ + 1 && n <= hi())
    return diffs_[static_cast<std::size_t>(n - lo_ - 1)];
  return SparseMat(f_, dim(n - 1), dim(n));
}

void Complex::check_differential() const {
  for (int n = lo_ + 2; n <= hi(); ++n) {
    if (!(diff(n - 1) * diff(n)).is_zero())
      throw ValidationError("differential does not square to zero from degree " +
                            std::to_string(n));
  }
}

std::size_t Complex::total_dim() const {
  std::size_t t = 0;
  for (std::size_t d : dims_) t += d;
  return t;
}

bool Complex::has_family(const std::string& name) const {
  return families.count(name) != 0;
}

const ActionFamily& Complex::family(const std::string& name) const {
  auto it = families.find(name);
  if (it == families.end())
    throw DimensionError("complex has no action family '" + name + "'");
  return it->second;
}

const SparseMat& Complex::family_action(const std::string& name, int n,
                                        std::size_t i) const {
  const ActionFamily& fam = family(name);
  auto it = fam.act.find(n);
  if (it == fam.act.end())
    throw DimensionError("family '" + name + "' has no actions in degree " +
                         std::to_string(n));
  if (i >= it->second.size())
    throw DimensionError("family '" + name + "' has no basis action " +
                         std::to_string(i));
  return it->second[i];
}

ComplexPtr share(Complex c) {
  return std::make_shared<const Complex>(std::move(c));
}

ChainMap::ChainMap(ComplexPtr src, ComplexPtr dst, int degree,
                   std::map<int, SparseMat> comps)
    : src_(std::move(src)), dst_(std::move(dst)), deg_(degree),
      comps_(std::move(comps)) {
  if (!src_ || !dst_)
    throw DimensionError("chain map endpoints must be non-null");
  if (!(src_->field() == dst_->field()))
    throw FieldMismatchError("chain map between complexes over different fields");
  for (const auto& [n, m] : comps_) {
    if (!(m.field() == src_->field()))
      throw FieldMismatchError("chain map component over a different field");
    if (m.rows() != dst_->dim(n + deg_) || m.cols() != src_->dim(n))
      throw DimensionError(
          "chain map component at degree " + std::to_string(n) +
          " has shape " + std::to_string(m.rows()) + "x" +
          std::to_string(m.cols()) + ", expected " +
          std::to_string(dst_->dim(n + deg_)) + "x" +
          std::to_string(src_->dim(n)));
  }
}

ChainMap ChainMap::identity(ComplexPtr c) {
  std::map<int, SparseMat> comps;
  for (int n = c->lo(); n <= c->hi(); ++n)
    if (c->dim(n) > 0)
      comps.emplace(n, SparseMat::identity(c->field(), c->dim(n)));
  ComplexPtr d = c;
  return ChainMap(std::move(c), std::move(d), 0, std::move(comps));
}

ChainMap ChainMap::zero(ComplexPtr src, ComplexPtr dst, int degree) {
  return ChainMap(std::move(src), std::move(dst), degree, {});
}

SparseMat ChainMap::component(int n) const {
  auto it = comps_.find(n);
  if (it != comps_.end()) return it->second;
  return SparseMat(src_->field(), dst_->dim(n + deg_), src_->dim(n));
}

bool ChainMap::is_chain_map() const {
  for (int n = src_->lo(); n <= src_->hi(); ++n) {
    SparseMat lhs = dst_->diff(n + deg_) * component(n);
    SparseMat rhs = component(n - 1) * src_->diff(n);
    if (deg_ % 2 != 0) rhs = rhs.scalar_mul(Rat(-1));
    if (!(lhs == rhs)) return false;
  }
  return true;
}

ChainMap ChainMap::compose(const ChainMap& inner) const {
  if (!same_shape(*src_, *inner.dst_))
    throw DimensionError("composition of chain maps with mismatched middle");
  std::map<int, SparseMat> comps;
  for (int n = inner.src_->lo(); n <= inner.src_->hi(); ++n) {
    if (inner.src_->dim(n) == 0) continue;
    SparseMat prod = component(n + inner.deg_) * inner.component(n);
    if (!prod.is_zero()) comps.emplace(n, std::move(prod));
  }
  return ChainMap(inner.src_, dst_, deg_ + inner.deg_, std::move(comps));
}

ChainMap ChainMap::operator+(const ChainMap& o) const {
  if (deg_ != o.deg_)
    throw DimensionError("sum of chain maps of different degrees");
  if (!same_shape(*src_, *o.src_) || !same_shape(*dst_, *o.dst_))
    throw DimensionError("sum of chain maps with mismatched endpoints");
  std::map<int, SparseMat> comps;
  for (int n = src_->lo(); n <= src_->hi(); ++n) {
    if (src_->dim(n) == 0) continue;
    SparseMat s = component(n) + o.component(n);
    if (!s.is_zero()) comps.emplace(n, std::move(s));
  }
  return ChainMap(src_, dst_, deg_, std::move(comps));
}

ChainMap ChainMap::operator-(const ChainMap& o) const {
  return *this + o.scalar_mul(Rat(-1));
}

ChainMap ChainMap::scalar_mul(const Rat& c) const {
  std::map<int, SparseMat> comps;
  for (const auto& [n, m] : comps_) {
    SparseMat s = m.scalar_mul(c);
    if (!s.is_zero()) comps.emplace(n, std::move(s));
  }
  return ChainMap(src_, dst_, deg_, std::move(comps));
}

Matrix ChainMap::apply(int n, const Matrix& v) const {
  return component(n).apply(v);
}

SparseMat Homotopy::component(int n) const {
  auto it = comps.find(n);
  if (it != comps.end()) return it->second;
  return SparseMat(src->field(), dst->dim(n + map_degree + 1), src->dim(n));
}

bool check_homotopy(const ChainMap& f, const ChainMap& g, const Homotopy& h) {
  if (f.degree() != g.degree() || f.degree() != h.map_degree)
    throw DimensionError("homotopy check with mismatched degrees");
  if (!same_shape(*f.src(), *g.src()) || !same_shape(*f.dst(), *g.dst()) ||
      !same_shape(*f.src(), *h.src) || !same_shape(*f.dst(), *h.dst))
    throw DimensionError("homotopy check with mismatched endpoints");
  int r = f.degree();
  const Complex& S = *f.src();
  const Complex& D = *f.dst();
  for (int n = S.lo(); n <= S.hi(); ++n) {
    SparseMat lhs = f.component(n) - g.component(n);
    SparseMat rhs = D.diff(n + r + 1) * h.component(n);
    SparseMat hd = h.component(n - 1) * S.diff(n);
    if (r % 2 != 0) hd = hd.scalar_mul(Rat(-1));
    rhs = rhs + hd;
    if (!(lhs == rhs)) return false;
  }
  return true;
}

HomologySpace homology(const Complex& c, int n) {
  if (!c.trusted().contains(n))
    throw TruncationError(
        "homology requested in degree " + std::to_string(n) +
        ", outside the trusted range of a truncated complex");
  Field f = c.field();
  FieldOps ops(f);
  std::size_t dn = c.dim(n);
  auto solver = std::make_shared<SparseSolver>(f, dn, /*history=*/true);
  SparseMat bdry = c.diff(n + 1);
  for (std::size_t j = 0; j < bdry.cols(); ++j)
    solver->add_col(bdry.col_entries(j));
  std::size_t brank = solver->rank();

  // Lazy kernel enumeration of d_n: a column dependent on its predecessors
  // yields the kernel vector e_j − Σ c_i e_i.
  SparseMat dmat = c.diff(n);
  SparseSolver ker(f, c.dim(n - 1), /*history=*/true);
  std::vector<SparseVec> reps;
  for (std::size_t j = 0; j < dn; ++j) {
    SparseVec col = dmat.col_entries(j);
    auto combo = ker.solve(col);
    if (!combo) {
      ker.add_col(col, j);
      continue;
    }
    SparseVec z;
    for (const auto& [i, ci] : *combo) z.emplace_back(i, ops.neg(ci));
    z.emplace_back(j, Rat(1));
    if (solver->add_col(z, reps.size())) reps.push_back(std::move(z));
  }
  if (reps.size() + brank + ker.rank() != dn)
    throw ValidationError(
        "homology bookkeeping failed in degree " + std::to_string(n) +
        "; the boundary of degree " + std::to_string(n + 1) +
        " does not land in the kernel");

  Matrix R(f, dn, reps.size());
  for (std::size_t t = 0; t < reps.size(); ++t)
    for (const auto& [i, v] : reps[t]) R.set(i, t, v);
  HomologySpace hs;
  hs.degree_ = n;
  hs.dim_ = reps.size();
  hs.reps_ = std::move(R);
  hs.solver_ = std::move(solver);
  hs.field_ = f;
  hs.term_dim_ = dn;
  return hs;
}

Matrix HomologySpace::coords(const Matrix& cycles) const {
  if (cycles.rows() != term_dim_)
    throw DimensionError("coords input lives in a " +
                         std::to_string(cycles.rows()) +
                         "-dimensional space, expected " +
                         std::to_string(term_dim_));
  if (!(cycles.field() == field_))
    throw FieldMismatchError("coords input over a different field");
  Matrix out(field_, dim_, cycles.cols());
  for (std::size_t j = 0; j < cycles.cols(); ++j) {
    auto sol = solver_->solve(sparse_col(cycles, j));
    if (!sol)
      throw ValidationError("column " + std::to_string(j) +
                            " is not a cycle in degree " +
                            std::to_string(degree_));
    for (const auto& [t, v] : *sol) out.set(t, j, v);
  }
  return out;
}

Complex shift(const Complex& c, int m) {
  std::vector<std::size_t> dims;
  std::vector<SparseMat> diffs;
  for (int n = c.lo(); n <= c.hi(); ++n) dims.push_back(c.dim(n));
  for (int n = c.lo() + 1; n <= c.hi(); ++n) {
    SparseMat d = c.diff(n);
    diffs.push_back(m % 2 == 0 ? d : d.scalar_mul(Rat(-1)));
  }
  TrustedRange t{deg_add(c.trusted().lo, m), deg_add(c.trusted().hi, m)};
  Complex out(c.field(), c.lo() + m, std::move(dims), std::move(diffs), t);
  for (const auto& [n, fd] : c.free_data) out.free_data[n + m] = fd;
  for (const auto& [name, fam] : c.families) {
    ActionFamily nf;
    nf.alg = fam.alg;
    nf.contravariant = fam.contravariant;
    for (const auto& [n, acts] : fam.act) nf.act[n + m] = acts;
    out.families[name] = std::move(nf);
  }
  return out;
}

Matrix induced_on_homology(const ChainMap& f, int n) {
  HomologySpace hs = homology(*f.src(), n);
  HomologySpace hd = homology(*f.dst(), n + f.degree());
  if (hs.dim() == 0)
    return Matrix(f.src()->field(), hd.dim(), 0);
  return hd.coords(f.apply(n, hs.reps()));
}

bool is_quasi_iso(const ChainMap& f) {
  const Complex& s = *f.src();
  const Complex& d = *f.dst();
  int r = f.degree();
  int lo = std::min(s.lo(), deg_add(d.lo(), -r));
  int hi = std::max(s.hi(), deg_add(d.hi(), -r));
  lo = std::max(lo, std::max(s.trusted().lo, deg_add(d.trusted().lo, -r)));
  hi = std::min(hi, std::min(s.trusted().hi, deg_add(d.trusted().hi, -r)));
  for (int n = lo; n <= hi; ++n) {
    HomologySpace hs = homology(s, n);
    HomologySpace hd = homology(d, n + r);
    if (hs.dim() != hd.dim()) return false;
    if (hs.dim() == 0) continue;
    Matrix m = hd.coords(f.apply(n, hs.reps()));
    if (!m.inverse()) return false;
  }
  return true;
}

SparseMat extend_free_map(const Complex& p, int n, const Complex& y, int y_deg,
                          const Matrix& vals) {
  auto it = p.free_data.find(n);
  if (it == p.free_data.end())
    throw DimensionError("no free structure in degree " + std::to_string(n));
  return extend_with(it->second, p.dim(n), y, y_deg, vals, p.field());
}

std::size_t free_gens(const Complex& p, int n) {
  auto it = p.free_data.find(n);
  if (it == p.free_data.end())
    throw DimensionError("no free structure in degree " + std::to_string(n));
  std::size_t g = 0;
  for (const FreeBlock& b : it->second) g += b.gens;
  return g;
}

SparseVec free_generator_column(const Complex& p, int n, std::size_t t) {
  auto it = p.free_data.find(n);
  if (it == p.free_data.end() || it->second.empty())
    throw DimensionError("no free structure in degree " + std::to_string(n));
  std::size_t bi = 0;
  while (bi < it->second.size() && t >= it->second[bi].gens) {
    t -= it->second[bi].gens;
    ++bi;
  }
  if (bi == it->second.size())
    throw DimensionError("free generator index out of range");
  return free_gencol(p, it->second[bi], t, FieldOps(p.field()));
}

FreeSplit free_split(const Complex& p, int n, std::size_t idx) {
  auto it = p.free_data.find(n);
  if (it == p.free_data.end() || it->second.empty())
    throw DimensionError("no free structure in degree " + std::to_string(n));
  std::size_t goff = 0;
  for (const FreeBlock& b : it->second) {
    if (idx >= b.offset && idx < b.offset + b.dim()) {
      std::size_t local = idx - b.offset;
      std::size_t r = local % b.right;
      std::size_t rest = local / b.right;
      return FreeSplit{rest / b.gens, goff + rest % b.gens, r};
    }
    goff += b.gens;
  }
  throw DimensionError("basis index " + std::to_string(idx) +
                       " is not covered by the free structure");
}

int term_trust_hi(const Complex& x) {
  if (x.trusted().hi >= kDegInf) return kDegInf;
  return std::min(x.hi(), x.trusted().hi + 1);
}

int term_trust_lo(const Complex& x) {
  if (x.trusted().lo <= -kDegInf) return -kDegInf;
  return std::max(x.lo(), x.trusted().lo - 1);
}

TrustedRange tensor_trusted_range(const Complex& c, const Complex& d) {
  int th =
      std::min(deg_add(term_trust_hi(c), d.lo()), deg_add(term_trust_hi(d), c.lo()));
  int tl =
      std::max(deg_add(term_trust_lo(c), d.hi()), deg_add(term_trust_lo(d), c.hi()));
  return TrustedRange{tl <= -kDegInf ? -kDegInf : deg_add(tl, 1),
                      th >= kDegInf ? kDegInf : deg_add(th, -1)};
}

namespace {

// Per-degree unknown block for homotopy solving: h_n is parameterized by a
// d1 × gens value matrix (trivial free shape = full component).
struct UnknownBlock {
  std::size_t off = 0;
  std::size_t gens = 0;
  std::size_t d1 = 0;
  FreeShape sh;
  std::vector<std::size_t> goff;  // generator column offset per free block
};

}  // namespace

std::optional<Homotopy> homotopy_between(const ChainMap& f, const ChainMap& g,
                                         const LinearityReq& lin) {
  if (f.degree() != g.degree())
    throw DimensionError("homotopy between maps of different degrees");
  if (!same_shape(*f.src(), *g.src()) || !same_shape(*f.dst(), *g.dst()))
    throw DimensionError("homotopy between maps with mismatched endpoints");
  const ComplexPtr& sp = f.src();
  const ComplexPtr& dp = f.dst();
  const Complex& S = *sp;
  const Complex& D = *dp;
  int r = f.degree();
  Rat sgn = (r % 2 == 0) ? Rat(1) : Rat(-1);
  Field fl = S.field();
  FieldOps ops(fl);

  std::map<int, UnknownBlock> blocks;
  std::size_t total_u = 0;
  for (int n = S.lo(); n <= S.hi(); ++n) {
    std::size_t sd = S.dim(n), d1 = D.dim(n + r + 1);
    if (sd == 0 || d1 == 0) continue;
    UnknownBlock b;
    b.sh = shape_of(S, n, lin.use_free);
    b.gens = b.sh.gens;
    b.goff.resize(b.sh.blocks.size());
    std::size_t acc = 0;
    for (std::size_t bi = 0; bi < b.sh.blocks.size(); ++bi) {
      b.goff[bi] = acc;
      acc += b.sh.blocks[bi].gens;
    }
    b.d1 = d1;
    b.off = total_u;
    total_u += b.gens * d1;
    blocks[n] = b;
  }

  // Destination side-action matrices at each unknown (degree, free block),
  // and cached products L_l · R_r there.
  std::map<std::pair<int, std::size_t>, std::vector<SparseMat>> Ln, Rn;
  for (const auto& [n, b] : blocks)
    for (std::size_t bi = 0; bi < b.sh.blocks.size(); ++bi) {
      Ln[{n, bi}] =
          side_acts(D, n + r + 1, "left", b.sh.blocks[bi].left, fl, b.d1);
      Rn[{n, bi}] =
          side_acts(D, n + r + 1, "right", b.sh.blocks[bi].right, fl, b.d1);
    }
  std::map<std::tuple<int, std::size_t, std::size_t, std::size_t>, SparseMat>
      lr_cache;
  auto lrprod = [&](int n, std::size_t bi, std::size_t l,
                    std::size_t r2) -> const SparseMat& {
    auto key = std::make_tuple(n, bi, l, r2);
    auto it = lr_cache.find(key);
    if (it == lr_cache.end())
      it = lr_cache.emplace(key, Ln[{n, bi}][l] * Rn[{n, bi}][r2]).first;
    return it->second;
  };

  // h_n(v) as a linear function of the degree-n unknowns: one d1 × d1
  // coefficient matrix per generator (column i = coefficient of V(i, g)).
  auto hn_coeff = [&](int n, const SparseVec& v) {
    const UnknownBlock& b = blocks.at(n);
    std::vector<SparseMat> out(b.gens, SparseMat(fl, b.d1, b.d1));
    for (const auto& [idx, val] : v) {
      FreeIndex fi = locate_basis(b.sh, idx);
      std::size_t gi = b.goff[fi.block] + fi.g;
      out[gi] = out[gi] + lrprod(n, fi.block, fi.l, fi.r).scalar_mul(val);
    }
    return out;
  };

  std::vector<SparseVec> cols(total_u);
  SparseVec rhs;
  std::size_t row_off = 0;
  auto emit = [&](std::size_t uoff, std::size_t d1, std::size_t gi,
                  const SparseMat& m, const Rat& scale) {
    for (std::size_t j = 0; j < d1; ++j) {
      SparseVec add;
      for (const auto& [i, v] : m.col_entries(j))
        add.emplace_back(row_off + i, v);
      sparse_axpy(cols[uoff + gi * d1 + j], scale, add, ops);
    }
  };

  // Main homotopy equations, one block per (degree, test vector).
  for (int n = S.lo(); n <= S.hi(); ++n) {
    std::size_t sd = S.dim(n);
    std::size_t eq_h = D.dim(n + r);
    if (sd == 0 || eq_h == 0) continue;
    FreeShape sh = shape_of(S, n, lin.use_free);
    SparseMat fg = f.component(n) - g.component(n);
    SparseMat dS = S.diff(n);
    SparseMat dD = D.diff(n + r + 1);
    for (std::size_t t = 0; t < sh.gens; ++t) {
      SparseVec v = shape_gencol(S, sh, t, ops);
      if (blocks.count(n)) {
        const UnknownBlock& b = blocks.at(n);
        auto coeff = hn_coeff(n, v);
        for (std::size_t gi = 0; gi < b.gens; ++gi) {
          if (coeff[gi].is_zero()) continue;
          emit(b.off, b.d1, gi, dD * coeff[gi], Rat(1));
        }
      }
      SparseVec w = mat_apply_sv(dS, v, ops);
      if (!w.empty() && blocks.count(n - 1)) {
        const UnknownBlock& b = blocks.at(n - 1);
        auto coeff = hn_coeff(n - 1, w);
        for (std::size_t gi = 0; gi < b.gens; ++gi) {
          if (coeff[gi].is_zero()) continue;
          emit(b.off, b.d1, gi, coeff[gi], sgn);
        }
      }
      SparseVec c0 = mat_apply_sv(fg, v, ops);
      SparseVec shifted;
      for (const auto& [i, vv] : c0) shifted.emplace_back(row_off + i, vv);
      sparse_axpy(rhs, Rat(1), shifted, ops);
      row_off += eq_h;
    }
  }

  // Extra equivariance constraints on the solved homotopy.
  for (const std::string& name : lin.families) {
    const ActionFamily& fs = S.family(name);
    for (const auto& [n, b] : blocks) {
      for (std::size_t i = 0; i < fs.alg->dim(); ++i) {
        const SparseMat& As = S.family_action(name, n, i);
        const SparseMat& Ad = D.family_action(name, n + r + 1, i);
        for (std::size_t t = 0; t < b.gens; ++t) {
          SparseVec v = shape_gencol(S, b.sh, t, ops);
          SparseVec av = mat_apply_sv(As, v, ops);
          auto ca = hn_coeff(n, av);
          auto cv = hn_coeff(n, v);
          for (std::size_t gi = 0; gi < b.gens; ++gi) {
            if (!ca[gi].is_zero()) emit(b.off, b.d1, gi, ca[gi], Rat(1));
            if (!cv[gi].is_zero())
              emit(b.off, b.d1, gi, Ad * cv[gi], Rat(-1));
          }
          row_off += b.d1;
        }
      }
    }
  }

  SparseSolver solver(fl, row_off, /*history=*/true);
  for (std::size_t k = 0; k < total_u; ++k) solver.add_col(cols[k], k);
  auto sol = solver.solve(rhs);
  if (!sol) return std::nullopt;

  // Reassemble per-degree value matrices and extend them.
  std::map<int, Matrix> vals;
  for (const auto& [n, b] : blocks)
    vals.emplace(n, Matrix(fl, b.d1, b.gens));
  for (const auto& [k, v] : *sol) {
    auto it = blocks.begin();
    auto best = blocks.end();
    for (; it != blocks.end(); ++it)
      if (it->second.off <= k) best = it;
    const UnknownBlock& b = best->second;
    std::size_t local = k - b.off;
    vals.at(best->first).set(local % b.d1, local / b.d1, v);
  }
  std::map<int, SparseMat> comps;
  for (const auto& [n, b] : blocks) {
    SparseMat m =
        extend_with(b.sh.blocks, S.dim(n), D, n + r + 1, vals.at(n), fl);
    if (!m.is_zero()) comps.emplace(n, std::move(m));
  }
  Homotopy h{sp, dp, r, std::move(comps)};
  if (!check_homotopy(f, g, h))
    throw ValidationError(
        "homotopy solved on generators fails on the full basis; the inputs "
        "are not equivariant for the free structure");
  return h;
}

bool homotopic(const ChainMap& f, const ChainMap& g) {
  LinearityReq lin;
  lin.use_free = false;
  return homotopy_between(f, g, lin).has_value();
}

LiftResult lift_through_quasi_iso(const ChainMap& g, const ChainMap& s,
                                  int up_to) {
  if (s.degree() != 0)
    throw DimensionError("lifting expects a degree-0 comparison map");
  if (!same_shape(*g.dst(), *s.dst()))
    throw DimensionError("lifting expects g to land in the target of s");
  const ComplexPtr& P = g.src();
  const ComplexPtr& Y = s.src();
  const ComplexPtr& Z = s.dst();
  int r = g.degree();
  Rat sgn = (r % 2 == 0) ? Rat(1) : Rat(-1);
  Field fl = P->field();
  FieldOps ops(fl);

  std::map<int, SparseMat> ucomps, hcomps;
  auto comp_or_zero = [&](const std::map<int, SparseMat>& m, int n,
                          std::size_t rows, std::size_t ncols) {
    auto it = m.find(n);
    if (it != m.end()) return it->second;
    return SparseMat(fl, rows, ncols);
  };

  int top = std::min(P->hi(), up_to);
  for (int n = P->lo(); n <= top; ++n) {
    std::size_t pd = P->dim(n);
    if (pd == 0) continue;
    FreeShape sh = shape_of(*P, n, /*use_free=*/true);
    std::size_t G = sh.gens;
    std::size_t dy = Y->dim(n + r), dz = Z->dim(n + r + 1);
    std::size_t dy0 = Y->dim(n + r - 1), dz0 = Z->dim(n + r);

    SparseMat dP = P->diff(n);
    SparseMat uprev =
        comp_or_zero(ucomps, n - 1, Y->dim(n - 1 + r), P->dim(n - 1));
    SparseMat hprev =
        comp_or_zero(hcomps, n - 1, Z->dim(n + r), P->dim(n - 1));
    SparseMat gc = g.component(n);

    Matrix rhs1(fl, dy0, G), rhs2(fl, dz0, G);
    for (std::size_t t = 0; t < G; ++t) {
      SparseVec v = shape_gencol(*P, sh, t, ops);
      SparseVec w = mat_apply_sv(dP, v, ops);
      for (const auto& [i, vv] : mat_apply_sv(uprev, w, ops))
        rhs1.set(i, t, ops.canon(sgn * vv));
      SparseVec r2 = mat_apply_sv(gc, v, ops);
      sparse_axpy(r2, sgn, mat_apply_sv(hprev, w, ops), ops);
      for (const auto& [i, vv] : r2) rhs2.set(i, t, vv);
    }

    // Joint unknowns (u_n(g), h_n(g)) solved as one block system
    //   [ d_Y   0   ] [a]   [rhs1]
    //   [ s    −d_Z ] [b] = [rhs2]
    Matrix blockM(fl, dy0 + dz0, dy + dz);
    blockM.set_block(0, 0, Y->diff(n + r).to_dense());
    blockM.set_block(dy0, 0, s.component(n + r).to_dense());
    blockM.set_block(dy0, dy,
                     Z->diff(n + r + 1).to_dense().scalar_mul(Rat(-1)));
    auto sol = blockM.solve(Matrix::vstack({rhs1, rhs2}));
    if (!sol)
      throw LiftError("no lift through the quasi-isomorphism in degree " +
                      std::to_string(n));
    Matrix A(fl, dy, G), B(fl, dz, G);
    for (std::size_t i = 0; i < dy; ++i)
      for (std::size_t t = 0; t < G; ++t)
        if (!sol->entry_is_zero(i, t)) A.set(i, t, sol->get(i, t));
    for (std::size_t i = 0; i < dz; ++i)
      for (std::size_t t = 0; t < G; ++t)
        if (!sol->entry_is_zero(dy + i, t)) B.set(i, t, sol->get(dy + i, t));
    SparseMat un = extend_with(sh.blocks, pd, *Y, n + r, A, fl);
    if (!un.is_zero()) ucomps.emplace(n, std::move(un));
    SparseMat hn = extend_with(sh.blocks, pd, *Z, n + r + 1, B, fl);
    if (!hn.is_zero()) hcomps.emplace(n, std::move(hn));
  }

  ChainMap u(P, Y, r, ucomps);
  Homotopy h{P, Z, r, hcomps};
  // Verify on the full basis up to the lifted degree.
  ChainMap su = s.compose(u);
  for (int n = P->lo(); n <= top; ++n) {
    SparseMat lhs = Y->diff(n + r) * u.component(n);
    SparseMat rhs = u.component(n - 1) * P->diff(n);
    if (r % 2 != 0) rhs = rhs.scalar_mul(Rat(-1));
    if (!(lhs == rhs))
      throw ValidationError(
          "lift solved on generators is not a chain map in degree " +
          std::to_string(n) + "; the inputs are not equivariant");
    SparseMat l2 = su.component(n) - g.component(n);
    SparseMat r2 = Z->diff(n + r + 1) * h.component(n);
    SparseMat hd = h.component(n - 1) * P->diff(n);
    if (r % 2 != 0) hd = hd.scalar_mul(Rat(-1));
    if (!(l2 == r2 + hd))
      throw ValidationError(
          "lift homotopy solved on generators fails on the full basis in "
          "degree " + std::to_string(n));
  }
  return LiftResult{std::move(u), std::move(h)};
}

TensorOver tensor_over_full(const Complex& c, const Complex& d,
                            const Algebra& rA) {
  Field fl = c.field();
  FieldOps ops(fl);
  if (!(d.field() == fl) || !(rA.field() == fl))
    throw FieldMismatchError("tensor product over mismatched fields");
  bool contract = rA.dim() > 1;
  const ActionFamily* cr = nullptr;
  const ActionFamily* dl = nullptr;
  if (contract) {
    cr = &c.family("right");
    dl = &d.family("left");
    if (!same_algebra(*cr->alg, rA) || !same_algebra(*dl->alg, rA))
      throw DimensionError(
          "middle action families are not over the contraction algebra");
  }

  int lo = c.lo() + d.lo();
  int hi = c.hi() + d.hi();
  TensorOver out;
  std::map<int, std::size_t> pre_dim;
  for (int n = lo; n <= hi; ++n) {
    std::size_t off = 0;
    std::vector<TensorBlock> bl;
    int pmin = std::max(c.lo(), n - d.hi());
    int pmax = std::min(c.hi(), n - d.lo());
    for (int p = pmin; p <= pmax; ++p) {
      int q = n - p;
      std::size_t dim = c.dim(p) * d.dim(q);
      if (dim == 0) continue;
      bl.push_back(TensorBlock{p, q, off, dim});
      off += dim;
    }
    out.blocks[n] = std::move(bl);
    pre_dim[n] = off;
  }

  // Per-degree quotient by the middle relations (x·e_t)⊗y − x⊗(e_t·y); the
  // relations stay inside one (p, q) block, so the quotient is blockwise.
  std::map<int, std::size_t> qdim;
  for (int n = lo; n <= hi; ++n) {
    std::size_t pd = pre_dim[n];
    if (!contract) {
      out.proj[n] = SparseMat::identity(fl, pd);
      out.sect[n] = SparseMat::identity(fl, pd);
      qdim[n] = pd;
      continue;
    }
    std::vector<SparseMat> lproj, lsect;
    std::size_t qtot = 0;
    std::vector<std::size_t> qoffs;
    for (const TensorBlock& b : out.blocks[n]) {
      std::size_t dc = c.dim(b.p), dd = d.dim(b.q);
      SparseSolver S(fl, b.dim, /*history=*/false, /*full_reduce=*/true);
      for (std::size_t t = 0; t < rA.dim(); ++t) {
        const SparseMat& Rc = cr->act.at(b.p)[t];
        const SparseMat& Ld = dl->act.at(b.q)[t];
        for (std::size_t jc = 0; jc < dc; ++jc) {
          SparseVec rcj = Rc.col_entries(jc);
          for (std::size_t jd = 0; jd < dd; ++jd) {
            SparseVec rel;
            for (const auto& [i, v] : rcj) rel.emplace_back(i * dd + jd, v);
            SparseVec sub;
            for (const auto& [i2, v2] : Ld.col_entries(jd))
              sub.emplace_back(jc * dd + i2, v2);
            sparse_axpy(rel, Rat(-1), sub, ops);
            S.add_col(rel);
          }
        }
      }
      std::vector<std::size_t> piv = S.pivots();
      std::vector<std::size_t> freeIdx;
      std::map<std::size_t, std::size_t> freepos;
      {
        std::size_t pi = 0;
        for (std::size_t j = 0; j < b.dim; ++j) {
          if (pi < piv.size() && piv[pi] == j) {
            ++pi;
            continue;
          }
          freepos[j] = freeIdx.size();
          freeIdx.push_back(j);
        }
      }
      SparseMat bp(fl, freeIdx.size(), b.dim);
      SparseMat bs(fl, b.dim, freeIdx.size());
      for (std::size_t k = 0; k < freeIdx.size(); ++k)
        bs.add_at(freeIdx[k], k, Rat(1));
      for (std::size_t j = 0; j < b.dim; ++j) {
        auto fp = freepos.find(j);
        if (fp != freepos.end()) {
          bp.add_at(fp->second, j, Rat(1));
          continue;
        }
        const SparseVec* row = S.row_with_lead(j);
        for (const auto& [i, v] : *row)
          if (i != j) bp.add_at(freepos.at(i), j, ops.neg(v));
      }
      lproj.push_back(std::move(bp));
      lsect.push_back(std::move(bs));
      qoffs.push_back(qtot);
      qtot += freeIdx.size();
    }
    SparseMat Pm(fl, qtot, pd), Sm(fl, pd, qtot);
    for (std::size_t k = 0; k < lproj.size(); ++k) {
      add_block(Pm, qoffs[k], out.blocks[n][k].offset, lproj[k], Rat(1));
      add_block(Sm, out.blocks[n][k].offset, qoffs[k], lsect[k], Rat(1));
    }
    out.proj[n] = std::move(Pm);
    out.sect[n] = std::move(Sm);
    qdim[n] = qtot;
  }

  // Pre-quotient differential d(x⊗y) = dx⊗y + (−1)^p x⊗dy, then descend.
  auto block_offset = [&](int n, int p, int q) -> std::optional<std::size_t> {
    for (const TensorBlock& b : out.blocks[n])
      if (b.p == p && b.q == q) return b.offset;
    return std::nullopt;
  };
  std::vector<std::size_t> dims;
  std::vector<SparseMat> diffs;
  for (int n = lo; n <= hi; ++n) dims.push_back(qdim[n]);
  for (int n = lo + 1; n <= hi; ++n) {
    SparseMat Dn(fl, pre_dim[n - 1], pre_dim[n]);
    for (const TensorBlock& b : out.blocks[n]) {
      std::size_t dd = d.dim(b.q);
      SparseMat dcp = c.diff(b.p);
      SparseMat ddq = d.diff(b.q);
      if (auto o1 = block_offset(n - 1, b.p - 1, b.q)) {
        for (std::size_t jc = 0; jc < c.dim(b.p); ++jc)
          for (const auto& [i, v] : dcp.col_entries(jc))
            for (std::size_t jd = 0; jd < dd; ++jd)
              Dn.add_at(*o1 + i * dd + jd, b.offset + jc * dd + jd, v);
      }
      if (auto o2 = block_offset(n - 1, b.p, b.q - 1)) {
        Rat sgn = (b.p % 2 == 0) ? Rat(1) : Rat(-1);
        std::size_t dd1 = d.dim(b.q - 1);
        for (std::size_t jd = 0; jd < dd; ++jd)
          for (const auto& [i2, v2] : ddq.col_entries(jd)) {
            Rat sv = ops.canon(sgn * v2);
            for (std::size_t jc = 0; jc < c.dim(b.p); ++jc)
              Dn.add_at(*o2 + jc * dd1 + i2, b.offset + jc * dd + jd, sv);
          }
      }
    }
    diffs.push_back(out.proj.at(n - 1) * Dn * out.sect.at(n));
  }

  TrustedRange tr = tensor_trusted_range(c, d);

  Complex res(fl, lo, std::move(dims), std::move(diffs), tr);

  // Families: "left" comes from c, "right" from d; everything else is
  // carried with an "l."/"r." prefix; the contracted pair is consumed.
  auto lift_family = [&](const ActionFamily& fam, bool from_c) {
    ActionFamily nf;
    nf.alg = fam.alg;
    nf.contravariant = fam.contravariant;
    for (int n = lo; n <= hi; ++n) {
      std::vector<SparseMat> acts;
      for (std::size_t i = 0; i < fam.alg->dim(); ++i) {
        SparseMat m(fl, pre_dim[n], pre_dim[n]);
        for (const TensorBlock& b : out.blocks[n]) {
          std::size_t dd = d.dim(b.q);
          if (from_c) {
            const SparseMat& a = fam.act.at(b.p)[i];
            for (std::size_t jc = 0; jc < c.dim(b.p); ++jc)
              for (const auto& [ic, v] : a.col_entries(jc))
                for (std::size_t jd = 0; jd < dd; ++jd)
                  m.add_at(b.offset + ic * dd + jd,
                           b.offset + jc * dd + jd, v);
          } else {
            const SparseMat& a = fam.act.at(b.q)[i];
            for (std::size_t jd = 0; jd < dd; ++jd)
              for (const auto& [id2, v] : a.col_entries(jd))
                for (std::size_t jc = 0; jc < c.dim(b.p); ++jc)
                  m.add_at(b.offset + jc * dd + id2,
                           b.offset + jc * dd + jd, v);
          }
        }
        acts.push_back(out.proj.at(n) * m * out.sect.at(n));
      }
      nf.act[n] = std::move(acts);
    }
    return nf;
  };
  for (const auto& [name, fam] : c.families) {
    if (name == "left") res.families["left"] = lift_family(fam, true);
    else if (name == "right" && contract) continue;
    else res.families["l." + name] = lift_family(fam, true);
  }
  for (const auto& [name, fam] : d.families) {
    if (name == "right") res.families["right"] = lift_family(fam, false);
    else if (name == "left" && contract) continue;
    else res.families["r." + name] = lift_family(fam, false);
  }

  out.complex = std::move(res);
  return out;
}

Complex tensor_over(const Complex& c, const Complex& d, const Algebra& r) {
  return tensor_over_full(c, d, r).complex;
}

}  // namespace hhcap
