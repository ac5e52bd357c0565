#include "hhcap/bartensor.hpp"

#include <algorithm>
#include <string>
#include <tuple>
#include <utility>

#include "internal.hpp"

namespace hhcap {

using detail::acc_apply;
using detail::col_from_map;
using detail::mul_budget;
using detail::sparse_mults;

Complex bimodule_complex(const Bimodule& m) {
  Field f = m.left_algebra()->field();
  Complex c(f, 0, {m.dim()}, {}, TrustedRange{});
  ActionFamily lf{m.left_algebra(), false, {}};
  ActionFamily rf{m.right_algebra(), true, {}};
  for (std::size_t i = 0; i < m.left_algebra()->dim(); ++i)
    lf.act[0].push_back(SparseMat::from_dense(m.left_action(i)));
  for (std::size_t i = 0; i < m.right_algebra()->dim(); ++i)
    rf.act[0].push_back(SparseMat::from_dense(m.right_action(i)));
  c.families["left"] = std::move(lf);
  c.families["right"] = std::move(rf);
  return c;
}

Resolution bar_resolution(AlgebraPtr a, int top, std::size_t budget) {
  if (top < 0)
    throw DimensionError("bar resolution needs a nonnegative top degree");
  Field f = a->field();
  FieldOps ops(f);
  std::size_t dA = a->dim();

  std::vector<std::size_t> pw{1};  // pw[k] = dA^k
  for (int k = 1; k <= top + 2; ++k)
    pw.push_back(mul_budget(pw.back(), dA, budget,
                            "bar term in degree " + std::to_string(k - 2)));
  std::vector<std::size_t> dims;
  for (int n = 0; n <= top; ++n) dims.push_back(pw[n + 2]);

  std::vector<SparseMat> diffs;
  for (int n = 1; n <= top; ++n) {
    int L = n + 2;
    SparseMat d(f, pw[L - 1], pw[L]);
    std::vector<std::size_t> w(L);
    for (std::size_t col = 0; col < pw[L]; ++col) {
      std::size_t t = col;
      for (int j = L - 1; j >= 0; --j) {
        w[j] = t % dA;
        t /= dA;
      }
      std::map<std::size_t, Rat> out;
      for (int i = 0; i <= n; ++i) {
        std::size_t base = 0;
        for (int j = 0; j < i; ++j) base = base * dA + w[j];
        std::size_t tail = 0;
        for (int j = i + 2; j < L; ++j) tail = tail * dA + w[j];
        Matrix prod = a->basis_product(w[i], w[i + 1]);
        for (std::size_t k = 0; k < dA; ++k) {
          if (prod.entry_is_zero(k, 0)) continue;
          std::size_t row = (base * dA + k) * pw[L - 2 - i] + tail;
          Rat cv = prod.get(k, 0);
          if (i % 2 != 0) cv = -cv;
          out[row] += cv;
        }
      }
      d.set_col(col, col_from_map(out, ops));
    }
    diffs.push_back(std::move(d));
  }

  Complex cx(f, 0, dims, std::move(diffs), TrustedRange{-kDegInf, top - 1});
  std::vector<SparseMat> lm = sparse_mults(*a, false);
  std::vector<SparseMat> rm = sparse_mults(*a, true);
  ActionFamily lf{a, false, {}};
  ActionFamily rf{a, true, {}};
  for (int n = 0; n <= top; ++n) {
    SparseMat idn = SparseMat::identity(f, pw[n + 1]);
    for (std::size_t i = 0; i < dA; ++i) {
      lf.act[n].push_back(lm[i].kron(idn));
      rf.act[n].push_back(idn.kron(rm[i]));
    }
    cx.free_data[n] = {FreeBlock{0, dA, pw[n], dA}};
  }
  cx.families["left"] = std::move(lf);
  cx.families["right"] = std::move(rf);

  ComplexPtr base = share(bimodule_complex(regular_bimodule(a)));
  ComplexPtr bp = share(std::move(cx));
  std::map<int, SparseMat> comps{{0, SparseMat::from_dense(a->mu())}};
  return Resolution{bp, base, ChainMap(bp, base, 0, std::move(comps))};
}

namespace {

bool is_regular_bimodule_of(const Algebra& a, const Bimodule& m) {
  if (m.dim() != a.dim()) return false;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    Matrix e = Matrix::basis_col(a.field(), a.dim(), i);
    if (!(m.left_action(i) == a.left_mult(e))) return false;
    if (!(m.right_action(i) == a.right_mult(e))) return false;
  }
  return true;
}

}  // namespace

Resolution two_sided_bar_replacement(AlgebraPtr a, const Bimodule& m, int top,
                                     std::size_t budget) {
  if (!same_algebra(*m.left_algebra(), *a) ||
      !same_algebra(*m.right_algebra(), *a))
    throw DimensionError(
        "two-sided replacement needs a bimodule over the given algebra");
  if (is_regular_bimodule_of(*a, m)) return bar_resolution(a, top, budget);
  if (top < 0)
    throw DimensionError("replacement needs a nonnegative top degree");
  Field f = a->field();
  FieldOps ops(f);
  std::size_t dA = a->dim(), dM = m.dim();

  std::vector<std::size_t> pw{1};
  for (int k = 1; k <= top; ++k)
    pw.push_back(mul_budget(pw.back(), dA, budget, "replacement inner word"));
  std::vector<std::size_t> G(top + 1), dims(top + 1);
  for (int n = 0; n <= top; ++n) {
    std::string what = "replacement term in degree " + std::to_string(n);
    G[n] = mul_budget(
        mul_budget(static_cast<std::size_t>(n + 1), pw[n], budget, what), dM,
        budget, what);
    dims[n] = mul_budget(mul_budget(G[n], dA, budget, what), dA, budget, what);
  }

  // Degree n basis: (l, block p, inner word u of length p, module index,
  // inner word v of length q = n − p, r), flattened left-ring-major as
  // (l·G[n] + g)·dA + r with g = p·pw[n]·dM + (u·dM + i_m)·pw[q] + v.
  auto word_val = [&](const std::vector<std::size_t>& ds, int from, int to,
                      std::size_t merged, int skip) {
    // value of the digit word ds[from..to) with positions skip, skip+1
    // replaced by the single digit `merged` (skip < from disables merging)
    std::size_t wv = 0;
    for (int j = from; j < to; ++j) {
      if (j == skip) {
        wv = wv * dA + merged;
        ++j;
      } else {
        wv = wv * dA + ds[j];
      }
    }
    return wv;
  };

  std::vector<SparseMat> diffs;
  for (int n = 1; n <= top; ++n) {
    SparseMat d(f, dims[n - 1], dims[n]);
    std::size_t gStride = pw[n] * dM;      // generators per block at degree n
    std::size_t gStrideT = pw[n - 1] * dM; // per block at degree n − 1
    for (std::size_t col = 0; col < dims[n]; ++col) {
      std::size_t r = col % dA;
      std::size_t t1 = col / dA;
      std::size_t g = t1 % G[n];
      std::size_t l = t1 / G[n];
      int p = static_cast<int>(g / gStride);
      int q = n - p;
      std::size_t rest = g % gStride;
      std::size_t vw = rest % pw[q];
      std::size_t uim = rest / pw[q];
      std::size_t im = uim % dM;
      std::size_t uw = uim / dM;
      std::vector<std::size_t> ud(p), vd(q);
      {
        std::size_t tt = uw;
        for (int j = p - 1; j >= 0; --j) {
          ud[j] = tt % dA;
          tt /= dA;
        }
        tt = vw;
        for (int j = q - 1; j >= 0; --j) {
          vd[j] = tt % dA;
          tt /= dA;
        }
      }
      std::map<std::size_t, Rat> out;
      auto place = [&](int p2, std::size_t l2, std::size_t uw2,
                       std::size_t im2, std::size_t vw2, std::size_t r2,
                       const Rat& cv) {
        std::size_t g2 = static_cast<std::size_t>(p2) * gStrideT +
                         (uw2 * dM + im2) * pw[n - 1 - p2] + vw2;
        out[(l2 * G[n - 1] + g2) * dA + r2] += cv;
      };
      if (p >= 1) {
        // face 0: l · u_1
        Matrix prod = a->basis_product(l, ud[0]);
        std::size_t uw2 = word_val(ud, 1, p, 0, -1);
        for (std::size_t k = 0; k < dA; ++k)
          if (!prod.entry_is_zero(k, 0))
            place(p - 1, k, uw2, im, vw, r, prod.get(k, 0));
        // middle faces i = 1..p−1: merge u_i u_{i+1}
        for (int i = 1; i <= p - 1; ++i) {
          Matrix pr = a->basis_product(ud[i - 1], ud[i]);
          for (std::size_t k = 0; k < dA; ++k) {
            if (pr.entry_is_zero(k, 0)) continue;
            Rat cv = pr.get(k, 0);
            if (i % 2 != 0) cv = -cv;
            place(p - 1, l, word_val(ud, 0, p, k, i - 1), im, vw, r, cv);
          }
        }
        // face p: u_p acts on the module from the left
        {
          const Matrix& la = m.left_action(ud[p - 1]);
          std::size_t uw2 = word_val(ud, 0, p - 1, 0, -1);
          for (std::size_t k = 0; k < dM; ++k) {
            if (la.entry_is_zero(k, im)) continue;
            Rat cv = la.get(k, im);
            if (p % 2 != 0) cv = -cv;
            place(p - 1, l, uw2, k, vw, r, cv);
          }
        }
      }
      if (q >= 1) {
        Rat sp = (p % 2 == 0) ? Rat(1) : Rat(-1);
        // face 0: the module meets v_1 from the right
        {
          const Matrix& ra = m.right_action(vd[0]);
          std::size_t vw2 = word_val(vd, 1, q, 0, -1);
          for (std::size_t k = 0; k < dM; ++k)
            if (!ra.entry_is_zero(k, im))
              place(p, l, uw, k, vw2, r, sp * ra.get(k, im));
        }
        // middle faces j = 1..q−1: merge v_j v_{j+1}
        for (int j = 1; j <= q - 1; ++j) {
          Matrix pr = a->basis_product(vd[j - 1], vd[j]);
          for (std::size_t k = 0; k < dA; ++k) {
            if (pr.entry_is_zero(k, 0)) continue;
            Rat cv = sp * pr.get(k, 0);
            if (j % 2 != 0) cv = -cv;
            place(p, l, uw, im, word_val(vd, 0, q, k, j - 1), r, cv);
          }
        }
        // face q: v_q · r
        {
          Matrix pr = a->basis_product(vd[q - 1], r);
          std::size_t vw2 = word_val(vd, 0, q - 1, 0, -1);
          for (std::size_t k = 0; k < dA; ++k) {
            if (pr.entry_is_zero(k, 0)) continue;
            Rat cv = sp * pr.get(k, 0);
            if (q % 2 != 0) cv = -cv;
            place(p, l, uw, im, vw2, k, cv);
          }
        }
      }
      d.set_col(col, col_from_map(out, ops));
    }
    diffs.push_back(std::move(d));
  }

  Complex cx(f, 0, dims, std::move(diffs), TrustedRange{-kDegInf, top - 1});
  std::vector<SparseMat> lm = sparse_mults(*a, false);
  std::vector<SparseMat> rm = sparse_mults(*a, true);
  ActionFamily lf{a, false, {}};
  ActionFamily rf{a, true, {}};
  for (int n = 0; n <= top; ++n) {
    SparseMat idl = SparseMat::identity(f, G[n] * dA);
    SparseMat idr = SparseMat::identity(f, dA * G[n]);
    for (std::size_t i = 0; i < dA; ++i) {
      lf.act[n].push_back(lm[i].kron(idl));
      rf.act[n].push_back(idr.kron(rm[i]));
    }
    cx.free_data[n] = {FreeBlock{0, dA, G[n], dA}};
  }
  cx.families["left"] = std::move(lf);
  cx.families["right"] = std::move(rf);

  // Augmentation l ⊗ m ⊗ r ↦ l·m·r on the degree-0 block.
  SparseMat aug(f, dM, dims[0]);
  for (std::size_t l = 0; l < dA; ++l)
    for (std::size_t im = 0; im < dM; ++im)
      for (std::size_t r = 0; r < dA; ++r) {
        Matrix colv = m.right_action(r) * m.left_action(l).col(im);
        SparseVec sv;
        for (std::size_t i = 0; i < dM; ++i)
          if (!colv.entry_is_zero(i, 0)) sv.emplace_back(i, colv.get(i, 0));
        aug.set_col((l * dM + im) * dA + r, sv);
      }

  ComplexPtr base = share(bimodule_complex(m));
  ComplexPtr bp = share(std::move(cx));
  std::map<int, SparseMat> comps{{0, std::move(aug)}};
  return Resolution{bp, base, ChainMap(bp, base, 0, std::move(comps))};
}

namespace {

bool free_tiles(const Complex& x) {
  for (int n = x.lo(); n <= x.hi(); ++n) {
    if (x.dim(n) == 0) continue;
    auto it = x.free_data.find(n);
    if (it == x.free_data.end() || it->second.empty()) return false;
    std::size_t cov = 0;
    for (const FreeBlock& b : it->second) cov += b.dim();
    if (cov != x.dim(n)) return false;
  }
  return true;
}

std::size_t gens_at(const Complex& x, int n) {
  if (x.dim(n) == 0) return 0;
  return free_gens(x, n);
}

// d(1 ⊗ g ⊗ 1) of a free complex, decomposed back into (l, g', r) triples.
struct GenFace {
  std::size_t l, g2, r;
  Rat cv;
};

// Images of the free generators of xs in degree q under `comp`, decomposed
// into (l, g', r) triples of the free structure of xd in degree qd.
std::vector<std::vector<GenFace>> gen_images(const Complex& xs, int q,
                                             const SparseMat& comp,
                                             const Complex& xd, int qd,
                                             const FieldOps& ops) {
  std::size_t G = gens_at(xs, q);
  std::vector<std::vector<GenFace>> out(G);
  if (xd.dim(qd) == 0) return out;
  for (std::size_t t = 0; t < G; ++t) {
    std::map<std::size_t, Rat> img;
    acc_apply(comp, free_generator_column(xs, q, t), Rat(1), img);
    for (const auto& [idx, cv] : img) {
      Rat cc = ops.canon(cv);
      if (cc == 0) continue;
      FreeSplit fs = free_split(xd, qd, idx);
      out[t].push_back(GenFace{fs.l, fs.gen, fs.r, std::move(cc)});
    }
  }
  return out;
}

std::vector<std::vector<GenFace>> gen_faces(const Complex& x, int q,
                                            const FieldOps& ops) {
  if (x.dim(q - 1) == 0)
    return std::vector<std::vector<GenFace>>(gens_at(x, q));
  return gen_images(x, q, x.diff(q), x, q - 1, ops);
}

}  // namespace

EnvTensor env_tensor_full(const Complex& v, const Complex& c,
                          const std::string& vleft,
                          const std::string& vright) {
  Field f = v.field();
  FieldOps ops(f);
  if (!(c.field() == f))
    throw FieldMismatchError("collapsed tensor product over mismatched fields");
  if (!v.has_family(vleft) || !v.has_family(vright) || !c.has_family("left") ||
      !c.has_family("right"))
    throw DimensionError(
        "collapsed tensor product needs side actions on both factors");
  const ActionFamily& fvl = v.family(vleft);
  const ActionFamily& fvr = v.family(vright);
  if (!same_algebra(*fvl.alg, *fvr.alg) ||
      !same_algebra(*fvl.alg, *c.family("left").alg) ||
      !same_algebra(*fvl.alg, *c.family("right").alg))
    throw DimensionError("collapsed tensor product over mismatched rings");

  bool c_free = free_tiles(c);
  bool v_free = !c_free && free_tiles(v);
  if (!c_free && !v_free)
    throw DimensionError("collapsed tensor product needs a free factor");

  EnvTensor out;
  out.v_side = v_free;
  int lo = v.lo() + c.lo(), hi = v.hi() + c.hi();
  std::vector<std::size_t> dims;
  for (int n = lo; n <= hi; ++n) {
    std::size_t off = 0;
    std::vector<TensorBlock> bl;
    for (int p = std::max(v.lo(), n - c.hi());
         p <= std::min(v.hi(), n - c.lo()); ++p) {
      int q = n - p;
      std::size_t bdim =
          c_free ? v.dim(p) * gens_at(c, q) : gens_at(v, p) * c.dim(q);
      if (bdim == 0) continue;
      bl.push_back(TensorBlock{p, q, off, bdim});
      off += bdim;
    }
    dims.push_back(off);
    out.blocks[n] = std::move(bl);
  }

  // Faces of the collapsed factor per its degree.
  std::map<int, std::vector<std::vector<GenFace>>> faces;
  {
    const Complex& fr = c_free ? c : v;
    for (int q = fr.lo(); q <= fr.hi(); ++q)
      if (fr.dim(q) > 0) faces[q] = gen_faces(fr, q, ops);
  }

  // Cached collapse operators on the surviving factor: the relation
  // (a·x·b) ⊗ y = x ⊗ (b·y·a) turns a face landing on e_l·g'·e_r into the
  // operator (left action of e_r) ∘ (right action of e_l).
  std::map<std::tuple<int, std::size_t, std::size_t>, SparseMat> lr_cache;
  auto collapse_op = [&](int deg, std::size_t l,
                         std::size_t r) -> const SparseMat& {
    auto key = std::make_tuple(deg, l, r);
    auto it = lr_cache.find(key);
    if (it == lr_cache.end()) {
      SparseMat M =
          c_free ? v.family_action(vleft, deg, r) *
                       v.family_action(vright, deg, l)
                 : c.family_action("left", deg, r) *
                       c.family_action("right", deg, l);
      it = lr_cache.emplace(key, std::move(M)).first;
    }
    return it->second;
  };

  std::vector<SparseMat> diffs;
  for (int n = lo + 1; n <= hi; ++n) {
    std::size_t dn = dims[n - lo], dprev = dims[n - 1 - lo];
    std::map<std::pair<int, int>, std::size_t> prev_off;
    for (const TensorBlock& b : out.blocks.at(n - 1))
      prev_off[{b.p, b.q}] = b.offset;
    std::vector<std::map<std::size_t, Rat>> colacc(dn);
    for (const TensorBlock& b : out.blocks.at(n)) {
      if (c_free) {
        std::size_t Gq = gens_at(c, b.q);
        auto t1 = prev_off.find({b.p - 1, b.q});
        if (t1 != prev_off.end()) {  // d_V ⊗ id on generators
          SparseMat dv = v.diff(b.p);
          for (std::size_t j = 0; j < dv.cols(); ++j)
            for (const auto& [i2, val] : dv.col_entries(j))
              for (std::size_t g = 0; g < Gq; ++g)
                colacc[b.offset + j * Gq + g][t1->second + i2 * Gq + g] += val;
        }
        auto t2 = prev_off.find({b.p, b.q - 1});
        if (t2 != prev_off.end()) {  // collapsed d_C, sign (−1)^p
          std::size_t Gq1 = gens_at(c, b.q - 1);
          Rat sgn = (b.p % 2 == 0) ? Rat(1) : Rat(-1);
          const auto& fset = faces.at(b.q);
          std::size_t dvp = v.dim(b.p);
          for (std::size_t g = 0; g < Gq; ++g)
            for (const GenFace& fc : fset[g]) {
              const SparseMat& op = collapse_op(b.p, fc.l, fc.r);
              for (std::size_t j = 0; j < dvp; ++j)
                for (const auto& [i2, val] : op.col_entries(j))
                  colacc[b.offset + j * Gq + g][t2->second + i2 * Gq1 +
                                                fc.g2] += sgn * fc.cv * val;
            }
        }
      } else {
        std::size_t dcq = c.dim(b.q);
        std::size_t Gp = gens_at(v, b.p);
        auto t1 = prev_off.find({b.p, b.q - 1});
        if (t1 != prev_off.end()) {  // id ⊗ d_C, sign (−1)^p
          std::size_t dcq1 = c.dim(b.q - 1);
          Rat sgn = (b.p % 2 == 0) ? Rat(1) : Rat(-1);
          SparseMat dc = c.diff(b.q);
          for (std::size_t g = 0; g < Gp; ++g)
            for (std::size_t j = 0; j < dcq; ++j)
              for (const auto& [i2, val] : dc.col_entries(j))
                colacc[b.offset + g * dcq + j][t1->second + g * dcq1 + i2] +=
                    sgn * val;
        }
        auto t2 = prev_off.find({b.p - 1, b.q});
        if (t2 != prev_off.end()) {  // collapsed d_V, no sign
          const auto& fset = faces.at(b.p);
          for (std::size_t g = 0; g < Gp; ++g)
            for (const GenFace& fc : fset[g]) {
              const SparseMat& op = collapse_op(b.q, fc.l, fc.r);
              for (std::size_t j = 0; j < dcq; ++j)
                for (const auto& [i2, val] : op.col_entries(j))
                  colacc[b.offset + g * dcq + j][t2->second + fc.g2 * dcq +
                                                 i2] += fc.cv * val;
            }
        }
      }
    }
    SparseMat d(f, dprev, dn);
    for (std::size_t j = 0; j < dn; ++j)
      d.set_col(j, col_from_map(colacc[j], ops));
    diffs.push_back(std::move(d));
  }

  Complex res(f, lo, dims, std::move(diffs), tensor_trusted_range(v, c));

  // Families: the collapsed factor may not carry extras; the surviving
  // factor's extras are carried blockwise under their original names.
  const Complex& survivor = c_free ? v : c;
  const Complex& collapsed = c_free ? c : v;
  for (const auto& [name, fam] : collapsed.families) {
    (void)fam;
    bool consumed = c_free ? (name == "left" || name == "right")
                           : (name == vleft || name == vright);
    if (!consumed)
      throw DimensionError("cannot carry family '" + name +
                           "' on the collapsed factor");
  }
  for (const auto& [name, fam] : survivor.families) {
    bool consumed = c_free ? (name == vleft || name == vright)
                           : (name == "left" || name == "right");
    if (consumed) continue;
    if (res.families.count(name))
      throw DimensionError("family name collision: " + name);
    ActionFamily nf{fam.alg, fam.contravariant, {}};
    for (int n = lo; n <= hi; ++n) {
      bool ok = true;
      for (const TensorBlock& b : out.blocks.at(n))
        if (!fam.act.count(c_free ? b.p : b.q)) {
          ok = false;
          break;
        }
      if (!ok) continue;
      std::vector<SparseMat> acts;
      for (std::size_t i = 0; i < fam.alg->dim(); ++i) {
        SparseMat A(f, dims[n - lo], dims[n - lo]);
        for (const TensorBlock& b : out.blocks.at(n)) {
          const SparseMat& op = fam.act.at(c_free ? b.p : b.q)[i];
          if (c_free) {
            std::size_t Gq = gens_at(c, b.q);
            for (std::size_t j = 0; j < op.cols(); ++j) {
              auto ce = op.col_entries(j);
              for (std::size_t g = 0; g < Gq; ++g) {
                SparseVec sv;
                for (const auto& [i2, val] : ce)
                  sv.emplace_back(b.offset + i2 * Gq + g, val);
                A.set_col(b.offset + j * Gq + g, sv);
              }
            }
          } else {
            std::size_t dcq = c.dim(b.q);
            std::size_t Gp = gens_at(v, b.p);
            for (std::size_t g = 0; g < Gp; ++g)
              for (std::size_t j = 0; j < dcq; ++j) {
                SparseVec sv;
                for (const auto& [i2, val] : op.col_entries(j))
                  sv.emplace_back(b.offset + g * dcq + i2, val);
                A.set_col(b.offset + g * dcq + j, sv);
              }
          }
        }
        acts.push_back(std::move(A));
      }
      nf.act[n] = std::move(acts);
    }
    res.families[name] = std::move(nf);
  }
  if (!res.families.count("left")) {
    auto it = res.families.find("r.left");
    if (it != res.families.end()) {
      res.families["left"] = std::move(it->second);
      res.families.erase(it);
    }
  }
  if (!res.families.count("right")) {
    auto it = res.families.find("l.right");
    if (it != res.families.end()) {
      res.families["right"] = std::move(it->second);
      res.families.erase(it);
    }
  }

  out.complex = share(std::move(res));
  out.vfac = share(v);
  out.cfac = share(c);
  out.vleft = vleft;
  out.vright = vright;
  return out;
}

ComplexPtr env_tensor(const Complex& v, const Complex& c,
                      const std::string& vleft, const std::string& vright) {
  return env_tensor_full(v, c, vleft, vright).complex;
}

ChainMap env_tensor_map(const ChainMap& fm, const EnvTensor& src,
                        const EnvTensor& dst) {
  if (src.v_side != dst.v_side)
    throw DimensionError(
        "collapsed tensor maps need matching collapse sides");
  const Complex& sf = src.v_side ? *src.cfac : *src.vfac;
  const Complex& df = dst.v_side ? *dst.cfac : *dst.vfac;
  for (int n = std::min(sf.lo(), fm.src()->lo());
       n <= std::max(sf.hi(), fm.src()->hi()); ++n)
    if (sf.dim(n) != fm.src()->dim(n))
      throw DimensionError("map source does not match the surviving factor");
  for (int n = std::min(df.lo(), fm.dst()->lo());
       n <= std::max(df.hi(), fm.dst()->hi()); ++n)
    if (df.dim(n) != fm.dst()->dim(n))
      throw DimensionError("map target does not match the surviving factor");

  int r = fm.degree();
  Field f = src.complex->field();
  std::map<int, SparseMat> comps;
  for (int n = src.complex->lo(); n <= src.complex->hi(); ++n) {
    std::size_t dn = src.complex->dim(n);
    if (dn == 0) continue;
    SparseMat M(f, dst.complex->dim(n + r), dn);
    std::map<std::pair<int, int>, std::size_t> doff;
    if (dst.blocks.count(n + r))
      for (const TensorBlock& b : dst.blocks.at(n + r))
        doff[{b.p, b.q}] = b.offset;
    for (const TensorBlock& b : src.blocks.at(n)) {
      if (!src.v_side) {
        SparseMat fp = fm.component(b.p);
        if (fp.is_zero()) continue;
        auto t = doff.find({b.p + r, b.q});
        if (t == doff.end())
          throw DimensionError("no matching block in the map target");
        std::size_t Gq = b.dim / fp.cols();
        for (std::size_t j = 0; j < fp.cols(); ++j) {
          auto ce = fp.col_entries(j);
          for (std::size_t g = 0; g < Gq; ++g) {
            SparseVec sv;
            for (const auto& [i2, val] : ce)
              sv.emplace_back(t->second + i2 * Gq + g, val);
            M.set_col(b.offset + j * Gq + g, sv);
          }
        }
      } else {
        SparseMat fq = fm.component(b.q);
        if (fq.is_zero()) continue;
        auto t = doff.find({b.p, b.q + r});
        if (t == doff.end())
          throw DimensionError("no matching block in the map target");
        std::size_t dcq = fq.cols(), dct = fq.rows();
        std::size_t Gp = b.dim / dcq;
        for (std::size_t g = 0; g < Gp; ++g)
          for (std::size_t j = 0; j < dcq; ++j) {
            SparseVec sv;
            for (const auto& [i2, val] : fq.col_entries(j))
              sv.emplace_back(t->second + g * dct + i2, val);
            M.set_col(b.offset + g * dcq + j, sv);
          }
      }
    }
    if (!M.is_zero()) comps.emplace(n, std::move(M));
  }
  return ChainMap(src.complex, dst.complex, r, std::move(comps));
}

ChainMap env_collapsed_map(const ChainMap& fm, const EnvTensor& src,
                           const EnvTensor& dst) {
  if (src.v_side != dst.v_side)
    throw DimensionError(
        "collapsed tensor maps need matching collapse sides");
  bool vs = src.v_side;
  const Complex& cs = vs ? *src.vfac : *src.cfac;  // collapsed factors
  const Complex& cd = vs ? *dst.vfac : *dst.cfac;
  const Complex& sv = vs ? *src.cfac : *src.vfac;  // surviving factors
  const Complex& dv = vs ? *dst.cfac : *dst.vfac;
  Field f = src.complex->field();
  FieldOps ops(f);
  int r = fm.degree();

  for (int n = std::min(cs.lo(), fm.src()->lo());
       n <= std::max(cs.hi(), fm.src()->hi()); ++n)
    if (cs.dim(n) != fm.src()->dim(n))
      throw DimensionError("map source does not match the collapsed factor");
  for (int n = std::min(cd.lo(), fm.dst()->lo());
       n <= std::max(cd.hi(), fm.dst()->hi()); ++n)
    if (cd.dim(n) != fm.dst()->dim(n))
      throw DimensionError("map target does not match the collapsed factor");
  for (int n = std::min(sv.lo(), dv.lo()); n <= std::max(sv.hi(), dv.hi());
       ++n)
    if (sv.dim(n) != dv.dim(n))
      throw DimensionError(
          "collapsed-side maps need a shared surviving factor");

  // The collapse is only functorial for maps that commute with the side
  // actions it consumes; verify on the full basis.
  const std::string sl = vs ? src.vleft : "left";
  const std::string sr = vs ? src.vright : "right";
  const std::string dl = vs ? dst.vleft : "left";
  const std::string dr = vs ? dst.vright : "right";
  std::size_t dR = cs.family(sl).alg->dim();
  for (int q = cs.lo(); q <= cs.hi(); ++q) {
    if (cs.dim(q) == 0 || cd.dim(q + r) == 0) continue;
    SparseMat comp = fm.component(q);
    for (std::size_t i = 0; i < dR; ++i) {
      if (!(cd.family_action(dl, q + r, i) * comp ==
            comp * cs.family_action(sl, q, i)) ||
          !(cd.family_action(dr, q + r, i) * comp ==
            comp * cs.family_action(sr, q, i)))
        throw ValidationError(
            "collapsed-side map is not equivariant for the consumed side "
            "actions");
    }
  }

  // Generator images, computed once per collapsed degree.
  std::map<int, std::vector<std::vector<GenFace>>> imgs;
  for (int q = cs.lo(); q <= cs.hi(); ++q)
    if (cs.dim(q) > 0)
      imgs[q] = gen_images(cs, q, fm.component(q), cd, q + r, ops);

  std::map<std::tuple<int, std::size_t, std::size_t>, SparseMat> lr_cache;
  auto collapse_op = [&](int deg, std::size_t l,
                         std::size_t r2) -> const SparseMat& {
    auto key = std::make_tuple(deg, l, r2);
    auto it = lr_cache.find(key);
    if (it == lr_cache.end()) {
      SparseMat M = vs ? dv.family_action("left", deg, r2) *
                             dv.family_action("right", deg, l)
                       : dv.family_action(dst.vleft, deg, r2) *
                             dv.family_action(dst.vright, deg, l);
      it = lr_cache.emplace(key, std::move(M)).first;
    }
    return it->second;
  };

  std::map<int, SparseMat> comps;
  for (int n = src.complex->lo(); n <= src.complex->hi(); ++n) {
    std::size_t dn = src.complex->dim(n);
    if (dn == 0 || dst.complex->dim(n + r) == 0) continue;
    std::map<std::pair<int, int>, std::size_t> doff;
    if (dst.blocks.count(n + r))
      for (const TensorBlock& b : dst.blocks.at(n + r))
        doff[{b.p, b.q}] = b.offset;
    std::vector<std::map<std::size_t, Rat>> colacc(dn);
    for (const TensorBlock& b : src.blocks.at(n)) {
      if (!vs) {
        const auto& fset = imgs.at(b.q);
        std::size_t Gq = gens_at(cs, b.q);
        std::size_t dvp = sv.dim(b.p);
        bool sgn = (b.p % 2 != 0) && (r % 2 != 0);
        std::size_t toff = 0;
        bool located = false;
        std::size_t Gq2 = gens_at(cd, b.q + r);
        for (std::size_t g = 0; g < Gq; ++g)
          for (const GenFace& fc : fset[g]) {
            if (!located) {
              auto t = doff.find({b.p, b.q + r});
              if (t == doff.end())
                throw DimensionError("no matching block in the map target");
              toff = t->second;
              located = true;
            }
            const SparseMat& op = collapse_op(b.p, fc.l, fc.r);
            for (std::size_t j = 0; j < dvp; ++j)
              for (const auto& [i2, val] : op.col_entries(j)) {
                Rat cv = fc.cv * val;
                if (sgn) cv = -cv;
                colacc[b.offset + j * Gq + g][toff + i2 * Gq2 + fc.g2] += cv;
              }
          }
      } else {
        const auto& fset = imgs.at(b.p);
        std::size_t Gp = gens_at(cs, b.p);
        std::size_t dcq = sv.dim(b.q);
        std::size_t toff = 0;
        bool located = false;
        for (std::size_t g = 0; g < Gp; ++g)
          for (const GenFace& fc : fset[g]) {
            if (!located) {
              auto t = doff.find({b.p + r, b.q});
              if (t == doff.end())
                throw DimensionError("no matching block in the map target");
              toff = t->second;
              located = true;
            }
            const SparseMat& op = collapse_op(b.q, fc.l, fc.r);
            for (std::size_t j = 0; j < dcq; ++j)
              for (const auto& [i2, val] : op.col_entries(j))
                colacc[b.offset + g * dcq + j][toff + fc.g2 * dcq + i2] +=
                    fc.cv * val;
          }
      }
    }
    SparseMat M(f, dst.complex->dim(n + r), dn);
    bool any = false;
    for (std::size_t j = 0; j < dn; ++j) {
      SparseVec sv2 = col_from_map(colacc[j], ops);
      if (!sv2.empty()) any = true;
      M.set_col(j, std::move(sv2));
    }
    if (any) comps.emplace(n, std::move(M));
  }
  return ChainMap(src.complex, dst.complex, r, std::move(comps));
}

HochschildModel hochschild_model(AlgebraPtr a, const Bimodule& m, int top,
                                 std::size_t budget) {
  if (!same_algebra(*m.left_algebra(), *a) ||
      !same_algebra(*m.right_algebra(), *a))
    throw DimensionError(
        "chain model needs a bimodule over the given algebra");
  Resolution bar = bar_resolution(a, top, budget);
  EnvTensor model = env_tensor_full(bimodule_complex(m), *bar.complex);
  return HochschildModel{std::move(bar), std::move(model)};
}

Sandwich sandwich(const Complex& c, AlgebraPtr r, const Complex& d, int top,
                  std::size_t budget) {
  Field f = c.field();
  FieldOps ops(f);
  if (!(d.field() == f) || !(r->field() == f))
    throw FieldMismatchError("sandwich over mismatched fields");
  if (!c.has_family("right") || !d.has_family("left"))
    throw DimensionError(
        "sandwich needs a right action on the first factor and a left "
        "action on the second");
  if (!same_algebra(*c.family("right").alg, *r) ||
      !same_algebra(*d.family("left").alg, *r))
    throw DimensionError("sandwich middle actions are not over the given ring");
  std::size_t dR = r->dim();
  int nlo = c.lo() + d.lo();
  if (top < nlo) throw DimensionError("sandwich stored below its lowest term");

  std::vector<std::size_t> pw{1};
  for (int k = 1; k <= top - nlo; ++k)
    pw.push_back(mul_budget(pw.back(), dR, budget, "sandwich middle word"));

  Sandwich out;
  std::vector<std::size_t> dims;
  for (int n = nlo; n <= top; ++n) {
    std::size_t off = 0;
    std::vector<SandwichBlock> bl;
    std::string what = "sandwich term in degree " + std::to_string(n);
    for (int s = c.lo(); s <= std::min(c.hi(), n - d.lo()); ++s) {
      if (c.dim(s) == 0) continue;
      for (int t = 0; t <= n - s - d.lo(); ++t) {
        int u = n - s - t;
        if (u < d.lo() || u > d.hi() || d.dim(u) == 0) continue;
        std::size_t bd = mul_budget(
            mul_budget(c.dim(s), pw[t], budget, what), d.dim(u), budget, what);
        bl.push_back(SandwichBlock{s, t, u, off, bd});
        off += bd;
        if (off > budget)
          throw BudgetError(what + " exceeds the term budget of " +
                            std::to_string(budget) + " basis elements");
      }
    }
    dims.push_back(off);
    out.blocks[n] = std::move(bl);
  }

  std::vector<SparseMat> diffs;
  for (int n = nlo + 1; n <= top; ++n) {
    std::map<std::tuple<int, int, int>, std::size_t> poff;
    for (const SandwichBlock& b : out.blocks.at(n - 1))
      poff[{b.s, b.t, b.u}] = b.offset;
    std::vector<std::map<std::size_t, Rat>> colacc(dims[n - nlo]);
    for (const SandwichBlock& b : out.blocks.at(n)) {
      std::size_t dcs = c.dim(b.s), ddu = d.dim(b.u);
      std::size_t inner = pw[b.t] * ddu;
      Rat sgn_s = (b.s % 2 == 0) ? Rat(1) : Rat(-1);
      Rat sgn_st = ((b.s + b.t) % 2 == 0) ? Rat(1) : Rat(-1);
      auto tA = poff.find({b.s - 1, b.t, b.u});
      if (tA != poff.end()) {  // d_C ⊗ 1 ⊗ 1
        SparseMat dc = c.diff(b.s);
        for (std::size_t j = 0; j < dcs; ++j)
          for (const auto& [i2, val] : dc.col_entries(j))
            for (std::size_t rest = 0; rest < inner; ++rest)
              colacc[b.offset + j * inner + rest]
                    [tA->second + i2 * inner + rest] += val;
      }
      auto tC = poff.find({b.s, b.t, b.u - 1});
      if (tC != poff.end()) {  // 1 ⊗ 1 ⊗ d_D, sign (−1)^{s+t}
        SparseMat dd = d.diff(b.u);
        std::size_t ddu1 = d.dim(b.u - 1);
        for (std::size_t pre = 0; pre < dcs * pw[b.t]; ++pre)
          for (std::size_t j = 0; j < ddu; ++j)
            for (const auto& [i2, val] : dd.col_entries(j))
              colacc[b.offset + pre * ddu + j]
                    [tC->second + pre * ddu1 + i2] += sgn_st * val;
      }
      if (b.t >= 1) {  // bar faces, sign (−1)^s overall, (−1)^i per face
        auto tB = poff.find({b.s, b.t - 1, b.u});
        if (tB != poff.end()) {
          for (std::size_t idx = 0; idx < b.dim; ++idx) {
            std::size_t jd = idx % ddu;
            std::size_t rest = idx / ddu;
            std::size_t wv = rest % pw[b.t];
            std::size_t ic = rest / pw[b.t];
            std::vector<std::size_t> wd(b.t);
            {
              std::size_t tt = wv;
              for (int k = b.t - 1; k >= 0; --k) {
                wd[k] = tt % dR;
                tt /= dR;
              }
            }
            auto place = [&](std::size_t ic2, std::size_t wv2,
                             std::size_t jd2, const Rat& cv) {
              colacc[b.offset + idx]
                    [tB->second + (ic2 * pw[b.t - 1] + wv2) * ddu + jd2] += cv;
            };
            {  // face 0: c · r_1 through c's right family
              std::size_t wv2 = wv % pw[b.t - 1];
              const SparseMat& ra = c.family_action("right", b.s, wd[0]);
              for (const auto& [i2, val] : ra.col_entries(ic))
                place(i2, wv2, jd, sgn_s * val);
            }
            for (int i = 1; i <= b.t - 1; ++i) {  // merge w_i w_{i+1}
              Matrix pr = r->basis_product(wd[i - 1], wd[i]);
              Rat sg = (i % 2 == 0) ? sgn_s : -sgn_s;
              for (std::size_t k = 0; k < dR; ++k) {
                if (pr.entry_is_zero(k, 0)) continue;
                std::size_t wv2 = 0;
                for (int kk = 0; kk < i - 1; ++kk) wv2 = wv2 * dR + wd[kk];
                wv2 = wv2 * dR + k;
                for (int kk = i + 1; kk < b.t; ++kk) wv2 = wv2 * dR + wd[kk];
                place(ic, wv2, jd, sg * pr.get(k, 0));
              }
            }
            {  // face t: r_t · d through d's left family
              std::size_t wv2 = wv / dR;
              const SparseMat& la = d.family_action("left", b.u, wd[b.t - 1]);
              Rat sg = (b.t % 2 == 0) ? sgn_s : -sgn_s;
              for (const auto& [i2, val] : la.col_entries(jd))
                place(ic, wv2, i2, sg * val);
            }
          }
        }
      }
    }
    SparseMat dmat(f, dims[n - 1 - nlo], dims[n - nlo]);
    for (std::size_t j = 0; j < dims[n - nlo]; ++j)
      dmat.set_col(j, col_from_map(colacc[j], ops));
    diffs.push_back(std::move(dmat));
  }

  int th = std::min({top, deg_add(term_trust_hi(c), d.lo()),
                     deg_add(term_trust_hi(d), c.lo())});
  int tl = std::max(deg_add(term_trust_lo(c), d.hi()),
                    deg_add(term_trust_lo(d), c.hi()));
  TrustedRange tr{tl <= -kDegInf ? -kDegInf : deg_add(tl, 1),
                  deg_add(th, -1)};
  Complex res(f, nlo, dims, std::move(diffs), tr);

  // Free structure from regular outer factors.
  auto is_reg = [&](const Complex& x) {
    if (x.lo() != 0 || x.hi() != 0 || x.dim(0) != dR) return false;
    if (!x.has_family("left") || !x.has_family("right")) return false;
    if (!same_algebra(*x.family("left").alg, *r) ||
        !same_algebra(*x.family("right").alg, *r))
      return false;
    for (std::size_t i = 0; i < dR; ++i) {
      Matrix e = Matrix::basis_col(f, dR, i);
      if (!(x.family_action("left", 0, i) ==
            SparseMat::from_dense(r->left_mult(e))))
        return false;
      if (!(x.family_action("right", 0, i) ==
            SparseMat::from_dense(r->right_mult(e))))
        return false;
    }
    return true;
  };
  bool creg = is_reg(c), dreg = is_reg(d);
  for (int n = nlo; n <= top; ++n) {
    std::vector<FreeBlock> fb;
    for (const SandwichBlock& b : out.blocks.at(n)) {
      if (creg && dreg)
        fb.push_back(FreeBlock{b.offset, dR, pw[b.t], dR});
      else if (creg)
        fb.push_back(FreeBlock{b.offset, dR, pw[b.t] * d.dim(b.u), 1});
      else if (dreg)
        fb.push_back(FreeBlock{b.offset, 1, c.dim(b.s) * pw[b.t], dR});
    }
    if (!fb.empty()) res.free_data[n] = std::move(fb);
  }

  // Families: "left" from c, "right" from d, others prefixed; c's "right"
  // and d's "left" are consumed by the bar faces.
  auto carry = [&](const Complex& x, bool from_c) {
    for (const auto& [name, fam] : x.families) {
      if (from_c && name == "right") continue;
      if (!from_c && name == "left") continue;
      std::string nn = from_c ? (name == "left" ? name : "l." + name)
                              : (name == "right" ? name : "r." + name);
      if (res.families.count(nn))
        throw DimensionError("family name collision: " + nn);
      ActionFamily nf{fam.alg, fam.contravariant, {}};
      for (int n = nlo; n <= top; ++n) {
        bool ok = true;
        for (const SandwichBlock& b : out.blocks.at(n))
          if (!fam.act.count(from_c ? b.s : b.u)) {
            ok = false;
            break;
          }
        if (!ok) continue;
        std::vector<SparseMat> acts;
        for (std::size_t i = 0; i < fam.alg->dim(); ++i) {
          SparseMat A(f, res.dim(n), res.dim(n));
          for (const SandwichBlock& b : out.blocks.at(n)) {
            const SparseMat& op = fam.act.at(from_c ? b.s : b.u)[i];
            std::size_t ddu = d.dim(b.u);
            std::size_t inner = pw[b.t] * ddu;
            if (from_c) {
              for (std::size_t j = 0; j < op.cols(); ++j) {
                auto ce = op.col_entries(j);
                for (std::size_t rest = 0; rest < inner; ++rest) {
                  SparseVec sv;
                  for (const auto& [i2, val] : ce)
                    sv.emplace_back(b.offset + i2 * inner + rest, val);
                  A.set_col(b.offset + j * inner + rest, sv);
                }
              }
            } else {
              for (std::size_t pre = 0; pre < c.dim(b.s) * pw[b.t]; ++pre)
                for (std::size_t j = 0; j < ddu; ++j) {
                  SparseVec sv;
                  for (const auto& [i2, val] : op.col_entries(j))
                    sv.emplace_back(b.offset + pre * ddu + i2, val);
                  A.set_col(b.offset + pre * ddu + j, sv);
                }
            }
          }
          acts.push_back(std::move(A));
        }
        nf.act[n] = std::move(acts);
      }
      res.families[nn] = std::move(nf);
    }
  };
  carry(c, true);
  carry(d, false);

  out.complex = share(std::move(res));
  out.ring = r;
  out.left = share(Complex(c));
  out.right = share(Complex(d));
  return out;
}

}  // namespace hhcap
