#include "hhcap/algebra.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace hhcap {

Algebra::Algebra(Field f, std::vector<std::string> labels, Matrix mu,
                 Matrix unit)
    : field_(f),
      labels_(std::move(labels)),
      mu_(std::move(mu)),
      unit_(std::move(unit)) {
  const std::size_t n = labels_.size();
  if (n == 0) throw ValidationError("algebra must have positive dimension");
  if (mu_.field() != field_ || unit_.field() != field_)
    throw FieldMismatchError("algebra data use mismatched fields");
  if (mu_.rows() != n || mu_.cols() != n * n)
    throw DimensionError("multiplication table must be dim × dim²");
  if (unit_.rows() != n || unit_.cols() != 1)
    throw DimensionError("unit must be a dim × 1 column");
}

Matrix Algebra::mult(const Matrix& x, const Matrix& y) const {
  const std::size_t n = dim();
  if (x.field() != field_ || y.field() != field_)
    throw FieldMismatchError("mult: operands use a different field");
  if (x.rows() != n || y.rows() != n)
    throw DimensionError("mult: operands must be coordinate columns of length dim");
  if (x.cols() != y.cols())
    throw DimensionError("mult: operands must have matching column counts");
  Matrix out(field_, n, x.cols());
  for (std::size_t t = 0; t < x.cols(); ++t) {
    Matrix p = mu_ * x.col(t).kron(y.col(t));
    out.set_block(0, t, p);
  }
  return out;
}

Matrix Algebra::basis_product(std::size_t i, std::size_t j) const {
  if (i >= dim() || j >= dim())
    throw DimensionError("basis_product: index out of range");
  return mu_.col(i * dim() + j);
}

Matrix Algebra::left_mult(const Matrix& x) const {
  if (x.rows() != dim() || x.cols() != 1)
    throw DimensionError("left_mult: x must be a dim × 1 column");
  return mu_ * x.kron(Matrix::identity(field_, dim()));
}

Matrix Algebra::right_mult(const Matrix& x) const {
  if (x.rows() != dim() || x.cols() != 1)
    throw DimensionError("right_mult: x must be a dim × 1 column");
  return mu_ * Matrix::identity(field_, dim()).kron(x);
}

AlgebraReport validate_algebra(const Algebra& a) {
  const std::size_t n = a.dim();
  const Matrix id = Matrix::identity(a.field(), n);

  // Unit axioms: left and right multiplication by the unit are the identity.
  const Matrix lu = a.left_mult(a.unit());
  const Matrix ru = a.right_mult(a.unit());
  for (std::size_t i = 0; i < n; ++i) {
    if (lu.col(i) != id.col(i)) {
      std::ostringstream os;
      os << "unit axiom fails: 1·" << a.label(i) << " ≠ " << a.label(i)
         << " (basis index " << i << ")";
      return {false, os.str()};
    }
    if (ru.col(i) != id.col(i)) {
      std::ostringstream os;
      os << "unit axiom fails: " << a.label(i) << "·1 ≠ " << a.label(i)
         << " (basis index " << i << ")";
      return {false, os.str()};
    }
  }

  // Associativity: L_{e_i}·L_{e_j} = L_{e_i e_j} for all i, j; a mismatch in
  // column l witnesses (e_i e_j) e_l ≠ e_i (e_j e_l).
  std::vector<Matrix> left;
  left.reserve(n);
  for (std::size_t i = 0; i < n; ++i) left.push_back(a.left_mult(id.col(i)));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const Matrix lhs = left[i] * left[j];
      const Matrix rhs = a.left_mult(a.basis_product(i, j));
      if (lhs == rhs) continue;
      for (std::size_t l = 0; l < n; ++l) {
        if (lhs.col(l) != rhs.col(l)) {
          std::ostringstream os;
          os << "associativity fails on triple (" << i << ", " << j << ", " << l
             << "): (" << a.label(i) << "·" << a.label(j) << ")·" << a.label(l)
             << " ≠ " << a.label(i) << "·(" << a.label(j) << "·" << a.label(l)
             << ")";
          return {false, os.str()};
        }
      }
    }
  }
  return {true, ""};
}

Algebra dual_numbers(Field f) {
  Matrix mu(f, 2, 4);
  mu.set(0, 0, 1);  // 1·1 = 1
  mu.set(1, 1, 1);  // 1·x = x
  mu.set(1, 2, 1);  // x·1 = x
  // x·x = 0
  Matrix unit = Matrix::basis_col(f, 2, 0);
  return Algebra(f, {"1", "x"}, std::move(mu), std::move(unit));
}

namespace {

struct Path {
  std::size_t src = 0;
  std::size_t dst = 0;
  std::vector<std::size_t> arrows;  // in traversal order
};

}  // namespace

Algebra path_algebra(
    Field f, std::size_t num_vertices,
    const std::vector<std::pair<std::size_t, std::size_t>>& arrows,
    std::vector<std::string> arrow_names) {
  if (num_vertices == 0)
    throw ValidationError("path algebra needs at least one vertex");
  for (const auto& [s, t] : arrows)
    if (s < 1 || s > num_vertices || t < 1 || t > num_vertices)
      throw ValidationError("arrow endpoint outside vertex range 1..n");
  if (!arrow_names.empty() && arrow_names.size() != arrows.size())
    throw ValidationError("arrow_names must match the number of arrows");
  if (arrow_names.empty())
    for (std::size_t t = 0; t < arrows.size(); ++t)
      arrow_names.push_back("a" + std::to_string(t + 1));

  // Kahn's algorithm: the quiver must be acyclic for finite dimension.
  {
    std::vector<std::size_t> indeg(num_vertices + 1, 0);
    for (const auto& [s, t] : arrows) {
      (void)s;
      ++indeg[t];
    }
    std::vector<std::size_t> stack;
    for (std::size_t v = 1; v <= num_vertices; ++v)
      if (indeg[v] == 0) stack.push_back(v);
    std::size_t seen = 0;
    while (!stack.empty()) {
      std::size_t v = stack.back();
      stack.pop_back();
      ++seen;
      for (std::size_t t = 0; t < arrows.size(); ++t)
        if (arrows[t].first == v && --indeg[arrows[t].second] == 0)
          stack.push_back(arrows[t].second);
    }
    if (seen != num_vertices)
      throw ValidationError("path algebra requires an acyclic quiver");
  }

  // Enumerate all paths, trivial paths first, then by (length, sequence).
  std::vector<Path> basis;
  for (std::size_t v = 1; v <= num_vertices; ++v) basis.push_back({v, v, {}});
  std::vector<Path> frontier;
  for (std::size_t t = 0; t < arrows.size(); ++t)
    frontier.push_back({arrows[t].first, arrows[t].second, {t}});
  std::sort(frontier.begin(), frontier.end(),
            [](const Path& p, const Path& q) { return p.arrows < q.arrows; });
  while (!frontier.empty()) {
    basis.insert(basis.end(), frontier.begin(), frontier.end());
    std::vector<Path> next;
    for (const Path& p : frontier)
      for (std::size_t t = 0; t < arrows.size(); ++t)
        if (arrows[t].first == p.dst) {
          Path q = p;
          q.dst = arrows[t].second;
          q.arrows.push_back(t);
          next.push_back(std::move(q));
        }
    std::sort(next.begin(), next.end(),
              [](const Path& p, const Path& q) { return p.arrows < q.arrows; });
    frontier = std::move(next);
  }

  const std::size_t n = basis.size();
  std::map<std::pair<std::size_t, std::vector<std::size_t>>, std::size_t> index;
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) {
    index[{basis[i].src, basis[i].arrows}] = i;
    if (basis[i].arrows.empty()) {
      labels.push_back("e" + std::to_string(basis[i].src));
    } else {
      std::string l;
      for (auto it = basis[i].arrows.rbegin(); it != basis[i].arrows.rend();
           ++it) {
        if (!l.empty()) l += "*";
        l += arrow_names[*it];
      }
      labels.push_back(std::move(l));
    }
  }

  // e_i · e_j is "first the j path, then the i path".
  Matrix mu(f, n, n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (basis[j].dst != basis[i].src) continue;
      std::vector<std::size_t> seq = basis[j].arrows;
      seq.insert(seq.end(), basis[i].arrows.begin(), basis[i].arrows.end());
      auto it = index.find({basis[j].src, seq});
      if (it == index.end()) continue;  // cannot happen in an acyclic quiver
      mu.set(it->second, i * n + j, 1);
    }
  }
  Matrix unit(f, n, 1);
  for (std::size_t v = 0; v < num_vertices; ++v) unit.set(v, 0, 1);
  return Algebra(f, std::move(labels), std::move(mu), std::move(unit));
}

Algebra matrix_algebra(Field f, std::size_t n) {
  if (n == 0) throw ValidationError("matrix algebra needs n ≥ 1");
  const std::size_t N = n * n;
  auto idx = [n](std::size_t i, std::size_t j) { return i * n + j; };
  Matrix mu(f, N, N * N);
  std::vector<std::string> labels(N);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      labels[idx(i, j)] =
          "E" + std::to_string(i + 1) + std::to_string(j + 1);
  // E_{ij} · E_{kl} = δ_{jk} E_{il}
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t l = 0; l < n; ++l)
        mu.set(idx(i, l), idx(i, j) * N + idx(j, l), 1);
  Matrix unit(f, N, 1);
  for (std::size_t i = 0; i < n; ++i) unit.set(idx(i, i), 0, 1);
  return Algebra(f, std::move(labels), std::move(mu), std::move(unit));
}

Algebra opposite(const Algebra& a) {
  const std::size_t n = a.dim();
  Matrix mu(a.field(), n, n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      mu.set_block(0, i * n + j, a.basis_product(j, i));
  return Algebra(a.field(), a.labels(), std::move(mu), a.unit());
}

Algebra tensor_algebra(const Algebra& a, const Algebra& b) {
  if (a.field() != b.field())
    throw FieldMismatchError("tensor_algebra: factors over different fields");
  const std::size_t na = a.dim(), nb = b.dim(), n = na * nb;
  std::vector<std::string> labels(n);
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t j = 0; j < nb; ++j)
      labels[i * nb + j] = a.label(i) + "⊗" + b.label(j);
  Matrix mu(a.field(), n, n * n);
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t j = 0; j < nb; ++j)
      for (std::size_t k = 0; k < na; ++k)
        for (std::size_t l = 0; l < nb; ++l) {
          // (e_i⊗f_j)·(e_k⊗f_l) = (e_i e_k) ⊗ (f_j f_l)
          Matrix p = a.basis_product(i, k).kron(b.basis_product(j, l));
          const std::size_t col = (i * nb + j) * n + (k * nb + l);
          for (std::size_t r = 0; r < n; ++r)
            if (!p.entry_is_zero(r, 0)) mu.set(r, col, p.get(r, 0));
        }
  Matrix unit = a.unit().kron(b.unit());
  return Algebra(a.field(), std::move(labels), std::move(mu), std::move(unit));
}

Algebra enveloping(const Algebra& a) { return tensor_algebra(a, opposite(a)); }

bool same_algebra(const Algebra& x, const Algebra& y) {
  if (&x == &y) return true;
  return x.field() == y.field() && x.dim() == y.dim() && x.mu() == y.mu() &&
         x.unit() == y.unit();
}

}  // namespace hhcap
