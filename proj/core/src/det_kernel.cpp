#include "svk/det_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace svk {

namespace {

// out[r x c] += alpha * A[r x k] B[k x c], all row-major
inline void gemm_acc(double* out, const double* A, const double* B, int r, int k, int c, double alpha) {
  if (r == 1 && k == 1 && c == 1) {
    out[0] += alpha * A[0] * B[0];
    return;
  }
  for (int i = 0; i < r; ++i)
    for (int l = 0; l < k; ++l) {
      const double a = alpha * A[i * k + l];
      for (int j = 0; j < c; ++j) out[i * c + j] += a * B[l * c + j];
    }
}

void require_same_grid(const DetKernel& a, const DetKernel& b, const char* what) {
  if (a.grid() != b.grid()) throw DomainError(std::string(what) + ": grid mismatch");
}

DetKernel dense_result(const Grid& g, int arity, int rows, int cols, std::vector<double> v) {
  return DetKernel::from_values(g, arity, rows, cols, std::move(v));
}

std::vector<double> alloc_dense(const Grid& g, int arity, int rows, int cols) {
  const std::uint64_t n = simplex_count(g, arity) * static_cast<std::uint64_t>(rows) * cols;
  if (n > kDenseEntryLimit)
    throw RangeError("dense kernel of arity " + std::to_string(arity) + " on " + std::to_string(g.m()) +
                     " cells is too large; use the train layout");
  return std::vector<double>(n, 0.0);
}

// s-tuples strictly above t0 with two partial colex ranks (weights wk, wx for the
// first position, decreasing by one per position)
struct STuple {
  std::uint64_t pk, px;
};

std::vector<std::vector<STuple>> stuples_above(int m, int q, int wk, int wx) {
  std::vector<std::vector<STuple>> out(m);
  for (int t0 = 0; t0 < m; ++t0) {
    const int cells = m - 1 - t0;
    if (q == 0) {
      out[t0].push_back({0, 0});
      continue;
    }
    for (SimplexWalker w(cells, q); w.valid(); w.next()) {
      std::uint64_t pk = 0, px = 0;
      for (int j = 0; j < q; ++j) {
        const int s = w[j] + t0 + 1;
        pk += choose(s, wk - j);
        px += choose(s, wx - j);
      }
      out[t0].push_back({pk, px});
    }
  }
  return out;
}

double ipow(double h, int n) {
  double r = 1;
  for (int i = 0; i < n; ++i) r *= h;
  return r;
}

}  // namespace

// ---------------------------------------------------------------- construction

DetKernel DetKernel::zero(const Grid& g, int arity, int rows, int cols) {
  if (arity < 1 || rows < 1 || cols < 1) throw DomainError("kernel: arity, rows, cols must be >= 1");
  DetKernel k;
  k.grid_ = g;
  k.arity_ = arity;
  k.rows_ = rows;
  k.cols_ = cols;
  k.kind_ = Kind::zero;
  return k;
}

DetKernel DetKernel::from_values(const Grid& g, int arity, int rows, int cols, std::vector<double> values) {
  DetKernel k = zero(g, arity, rows, cols);
  if (values.size() != simplex_count(g, arity) * rows * cols)
    throw DomainError("kernel: value count does not match simplex size");
  for (double v : values)
    if (!std::isfinite(v)) throw DomainError("kernel: non-finite value");
  if (std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; })) return k;
  if (g.layout() == Layout::train) {
    if (rows != 1 || cols != 1) throw DomainError("train layout holds scalar kernels only");
    if (arity == 1)
      return from_train(g, PairTrain::from_values1(g.m(), values));
    if (arity == 2)
      return from_train(g, PairTrain::from_pair_values(g.m(), values));
    throw DomainError("train layout imports tabulated kernels up to arity 2; build higher arities with products");
  }
  k.kind_ = Kind::dense;
  k.dense_ = std::make_shared<const std::vector<double>>(std::move(values));
  return k;
}

DetKernel DetKernel::from_train(const Grid& g, PairTrain t) {
  if (g.layout() != Layout::train) throw DomainError("pair-train on a dense grid");
  if (t.m != g.m()) throw DomainError("pair-train cell count does not match grid");
  DetKernel k = zero(g, t.arity(), 1, 1);
  k.kind_ = Kind::train;
  k.train_ = std::make_shared<const PairTrain>(std::move(t));
  return k;
}

DetKernel DetKernel::tabulate(const Grid& g, int arity, int rows, int cols,
                              const std::function<void(const int*, double*)>& f) {
  if (g.layout() == Layout::train && arity > 2)
    throw DomainError("train layout tabulates kernels up to arity 2");
  std::vector<double> v = alloc_dense(g, arity, rows, cols);
  const int bs = rows * cols;
  for (SimplexWalker w(g.m(), arity); w.valid(); w.next()) f(w.idx(), v.data() + w.rank() * bs);
  return from_values(g, arity, rows, cols, std::move(v));
}

DetKernel DetKernel::constant(const Grid& g, int arity, const Matrix& c) {
  const int rows = static_cast<int>(c.rows()), cols = static_cast<int>(c.cols());
  if (c.isZero(0.0)) return zero(g, arity, rows, cols);
  if (g.layout() == Layout::train) {
    if (rows != 1 || cols != 1) throw DomainError("train layout holds scalar kernels only");
    std::vector<int> bonds(arity, 1);
    PairTrain t = PairTrain::shaped(g.m(), bonds);
    std::fill(t.a.begin(), t.a.end(), 1.0);
    std::fill(t.b.begin(), t.b.end(), c(0, 0));
    for (auto& cr : t.core) std::fill(cr.begin(), cr.end(), 1.0);
    return from_train(g, std::move(t));
  }
  RowMatrix rc = c;
  return tabulate(g, arity, rows, cols, [&](const int*, double* out) {
    std::copy(rc.data(), rc.data() + rows * cols, out);
  });
}

DetKernel DetKernel::identity(const Grid& g, int d) { return constant(g, 1, Matrix::Identity(d, d)); }

const std::vector<double>& DetKernel::dense_data() const {
  if (kind_ != Kind::dense) throw DomainError("kernel is not densely stored");
  return *dense_;
}

const PairTrain& DetKernel::train() const {
  if (kind_ != Kind::train) throw DomainError("kernel is not train-stored");
  return *train_;
}

Matrix DetKernel::at(const std::vector<int>& idx) const {
  if (static_cast<int>(idx.size()) != arity_) throw DomainError("kernel at: wrong tuple length");
  const std::uint64_t r = simplex_rank(idx);
  for (int i : idx)
    if (i >= grid_.m()) throw DomainError("kernel at: index out of range");
  Matrix out = Matrix::Zero(rows_, cols_);
  if (kind_ == Kind::dense) {
    const double* p = dense_->data() + r * rows_ * cols_;
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) out(i, j) = p[i * cols_ + j];
  } else if (kind_ == Kind::train) {
    out(0, 0) = train_->eval(idx.data());
  }
  return out;
}

double DetKernel::at(const std::vector<int>& idx, int r, int c) const { return at(idx)(r, c); }

std::vector<double> DetKernel::values() const {
  if (kind_ == Kind::dense) return *dense_;
  if (kind_ == Kind::train) {
    if (count() > kDenseEntryLimit) throw RangeError("kernel too large to expand");
    return train_->materialize();
  }
  return alloc_dense(grid_, arity_, rows_, cols_);
}

bool DetKernel::all_finite() const {
  if (kind_ == Kind::dense)
    return std::all_of(dense_->begin(), dense_->end(), [](double v) { return std::isfinite(v); });
  if (kind_ == Kind::train) {
    auto fin = [](const std::vector<double>& v) {
      return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    };
    if (!fin(train_->a) || !fin(train_->b)) return false;
    for (const auto& c : train_->core)
      if (!fin(c)) return false;
  }
  return true;
}

bool same_shape(const DetKernel& a, const DetKernel& b) {
  return a.grid() == b.grid() && a.arity() == b.arity() && a.rows() == b.rows() && a.cols() == b.cols();
}

// ---------------------------------------------------------------- linear ops

DetKernel add(const DetKernel& a, const DetKernel& b, double cb) {
  if (!same_shape(a, b)) throw DomainError("kernel add: shape mismatch");
  if (b.is_zero() || cb == 0.0) return a;
  if (a.is_zero()) return scale(b, cb);
  if (a.kind() == DetKernel::Kind::train)
    return DetKernel::from_train(a.grid(), train_add(a.train(), b.train(), cb));
  std::vector<double> v = a.dense_data();
  const auto& w = b.dense_data();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += cb * w[i];
  return dense_result(a.grid(), a.arity(), a.rows(), a.cols(), std::move(v));
}

DetKernel scale(const DetKernel& a, double c) {
  if (a.is_zero() || c == 1.0) return a;
  if (c == 0.0) return DetKernel::zero(a.grid(), a.arity(), a.rows(), a.cols());
  if (a.kind() == DetKernel::Kind::train) return DetKernel::from_train(a.grid(), train_scale(a.train(), c));
  std::vector<double> v = a.dense_data();
  for (double& x : v) x *= c;
  return dense_result(a.grid(), a.arity(), a.rows(), a.cols(), std::move(v));
}

DetKernel operator+(const DetKernel& a, const DetKernel& b) { return add(a, b, 1.0); }
DetKernel operator-(const DetKernel& a, const DetKernel& b) { return add(a, b, -1.0); }
DetKernel operator*(double c, const DetKernel& a) { return scale(a, c); }

DetKernel transpose(const DetKernel& a) {
  const int r = a.rows(), c = a.cols();
  if (a.is_zero()) return DetKernel::zero(a.grid(), a.arity(), c, r);
  if (a.kind() == DetKernel::Kind::train) return a;
  const auto& src = a.dense_data();
  std::vector<double> v(src.size());
  const std::size_t bs = static_cast<std::size_t>(r) * c, n = src.size() / bs;
  for (std::size_t t = 0; t < n; ++t)
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) v[t * bs + j * r + i] = src[t * bs + i * c + j];
  return dense_result(a.grid(), a.arity(), c, r, std::move(v));
}

// ---------------------------------------------------------------- products

DetKernel tri_product(const DetKernel& f, const DetKernel& g) {
  require_same_grid(f, g, "tri_product");
  if (f.cols() != g.rows()) throw DomainError("tri_product: inner dimension mismatch");
  const int a = f.arity(), b = g.arity(), arity = a + b - 1;
  const int R = f.rows(), K = f.cols(), C = g.cols();
  if (arity > kMaxArity) throw DomainError("tri_product: arity above cap");
  if (f.is_zero() || g.is_zero()) return DetKernel::zero(f.grid(), arity, R, C);
  if (f.kind() == DetKernel::Kind::train)
    return DetKernel::from_train(f.grid(), train_tri(f.train(), g.train()));
  const Grid& G = f.grid();
  std::vector<double> v = alloc_dense(G, arity, R, C);
  const double* fd = f.dense_data().data();
  const double* gd = g.dense_data().data();
  for (SimplexWalker w(G.m(), arity); w.valid(); w.next()) {
    const int* idx = w.idx();
    std::uint64_t rf = 0, rg = 0;
    for (int j = 0; j < a; ++j) rf += choose(idx[j], a - j);
    for (int j = 0; j < b; ++j) rg += choose(idx[a - 1 + j], b - j);
    gemm_acc(v.data() + w.rank() * R * C, fd + rf * R * K, gd + rg * K * C, R, K, C, 1.0);
  }
  return dense_result(G, arity, R, C, std::move(v));
}

DetKernel ast_contract(const DetKernel& f, const DetKernel& g) {
  require_same_grid(f, g, "ast_contract");
  if (f.cols() != g.rows()) throw DomainError("ast_contract: inner dimension mismatch");
  const int A = f.arity(), B = g.arity();
  if (A < 2) throw DomainError("ast_contract: left factor needs arity >= 2");
  const int arity = A + B - 2;
  const int R = f.rows(), K = f.cols(), C = g.cols();
  if (f.is_zero() || g.is_zero()) return DetKernel::zero(f.grid(), arity, R, C);
  const Grid& G = f.grid();
  if (f.kind() == DetKernel::Kind::train)
    return DetKernel::from_train(G, train_ast(f.train(), g.train(), G.h()));
  std::vector<double> v = alloc_dense(G, arity, R, C);
  const double* fd = f.dense_data().data();
  const double* gd = g.dense_data().data();
  const double h = G.h();
  for (SimplexWalker w(G.m(), arity); w.valid(); w.next()) {
    const int* idx = w.idx();
    std::uint64_t bf = 0, bg = 0;
    for (int j = 0; j <= A - 2; ++j) bf += choose(idx[j], A - j);
    for (int j = 1; j <= B - 1; ++j) bg += choose(idx[A - 2 + j], B - j);
    const int lo = (B >= 2) ? idx[A - 1] + 1 : 0;
    const int hi = idx[A - 2] - 1;
    double* out = v.data() + w.rank() * R * C;
    for (int s = lo; s <= hi; ++s)
      gemm_acc(out, fd + (bf + s) * R * K, gd + (bg + choose(s, B)) * K * C, R, K, C, h);
  }
  return dense_result(G, arity, R, C, std::move(v));
}

DetKernel bstar_term(const DetKernel& k, const DetKernel& x) {
  require_same_grid(k, x, "bstar_term");
  if (k.cols() != x.rows()) throw DomainError("bstar_term: inner dimension mismatch");
  const int q = k.arity() - 1, A = x.arity(), n = A - q - 1;
  if (n < 0) throw DomainError("bstar_term: kernel arity exceeds process arity");
  const int R = k.rows(), K = k.cols(), C = x.cols();
  const Grid& G = k.grid();
  if (k.is_zero() || x.is_zero()) return DetKernel::zero(G, n + 1, R, C);
  if (k.kind() == DetKernel::Kind::train)
    return DetKernel::from_train(G, train_bstar(k.train(), x.train(), G.h()));
  std::vector<double> v = alloc_dense(G, n + 1, R, C);
  const double* kd = k.dense_data().data();
  const double* xd = x.dense_data().data();
  const double wq = ipow(G.h(), q);
  auto st = stuples_above(G.m(), q, q + 1, A);
  for (SimplexWalker w(G.m(), n + 1); w.valid(); w.next()) {
    const int t0 = w[0];
    double* out = v.data() + w.rank() * R * C;
    for (const STuple& s : st[t0])
      gemm_acc(out, kd + (s.pk + t0) * R * K, xd + (s.px + w.rank()) * K * C, R, K, C, wq);
  }
  return dense_result(G, n + 1, R, C, std::move(v));
}

DetKernel bast_term(const DetKernel& j, const DetKernel& x) {
  require_same_grid(j, x, "bast_term");
  if (j.cols() != x.rows()) throw DomainError("bast_term: inner dimension mismatch");
  const int q = j.arity() - 2, A = x.arity(), n = A - q - 1;
  if (q < 0 || n < 0) throw DomainError("bast_term: arity mismatch");
  const int R = j.rows(), K = j.cols(), C = x.cols();
  const Grid& G = j.grid();
  if (j.is_zero() || x.is_zero()) return DetKernel::zero(G, n + 1, R, C);
  if (j.kind() == DetKernel::Kind::train)
    return DetKernel::from_train(G, train_bast(j.train(), x.train(), G.h()));
  std::vector<double> v = alloc_dense(G, n + 1, R, C);
  const double* jd = j.dense_data().data();
  const double* xd = x.dense_data().data();
  const double wq = ipow(G.h(), q + 1);
  auto st = stuples_above(G.m(), q + 1, q + 2, A);
  for (SimplexWalker w(G.m(), n + 1); w.valid(); w.next()) {
    const int t0 = w[0];
    const std::uint64_t tail = w.rank() - choose(t0, n + 1);
    double* out = v.data() + w.rank() * R * C;
    for (const STuple& s : st[t0])
      gemm_acc(out, jd + (s.pk + t0) * R * K, xd + (s.px + tail) * K * C, R, K, C, wq);
  }
  return dense_result(G, n + 1, R, C, std::move(v));
}

// ---------------------------------------------------------------- restructuring

DetKernel restrict_cells(const DetKernel& k, int lo, int hi) {
  const Grid sub = k.grid().sub(lo, hi);
  if (k.is_zero()) return DetKernel::zero(sub, k.arity(), k.rows(), k.cols());
  if (k.kind() == DetKernel::Kind::train) return DetKernel::from_train(sub, train_restrict(k.train(), lo, hi));
  const int a = k.arity(), bs = k.rows() * k.cols();
  std::vector<double> v = alloc_dense(sub, a, k.rows(), k.cols());
  const double* src = k.dense_data().data();
  std::vector<int> gidx(a);
  for (SimplexWalker w(sub.m(), a); w.valid(); w.next()) {
    for (int j = 0; j < a; ++j) gidx[j] = w[j] + lo;
    std::copy_n(src + simplex_rank(gidx.data(), a) * bs, bs, v.data() + w.rank() * bs);
  }
  return dense_result(sub, a, k.rows(), k.cols(), std::move(v));
}

DetKernel embed_cells(const DetKernel& k, const Grid& full, int lo) {
  if (full.layout() != k.grid().layout() || std::abs(full.h() - k.grid().h()) > 1e-12 * full.h() ||
      lo < 0 || lo + k.grid().m() > full.m())
    throw DomainError("embed_cells: sub-grid does not fit");
  if (k.is_zero()) return DetKernel::zero(full, k.arity(), k.rows(), k.cols());
  if (k.kind() == DetKernel::Kind::train)
    return DetKernel::from_train(full, train_embed(k.train(), full.m(), lo));
  const int a = k.arity(), bs = k.rows() * k.cols();
  std::vector<double> v = alloc_dense(full, a, k.rows(), k.cols());
  const double* src = k.dense_data().data();
  std::vector<int> gidx(a);
  for (SimplexWalker w(k.grid().m(), a); w.valid(); w.next()) {
    for (int j = 0; j < a; ++j) gidx[j] = w[j] + lo;
    std::copy_n(src + w.rank() * bs, bs, v.data() + simplex_rank(gidx.data(), a) * bs);
  }
  return dense_result(full, a, k.rows(), k.cols(), std::move(v));
}

DetKernel sigma_scale(const DetKernel& k, double sigma) {
  if (k.is_zero() || sigma == 0.0 || k.arity() == 1) return k;
  const Grid& G = k.grid();
  if (k.kind() == DetKernel::Kind::train)
    return DetKernel::from_train(G, train_sigma_scale(k.train(), G.midpoints(), sigma));
  std::vector<double> v = k.dense_data();
  const int a = k.arity(), bs = k.rows() * k.cols();
  for (SimplexWalker w(G.m(), a); w.valid(); w.next()) {
    const double f = std::exp(-sigma * (G.mid(w[0]) - G.mid(w[a - 1])));
    double* p = v.data() + w.rank() * bs;
    for (int e = 0; e < bs; ++e) p[e] *= f;
  }
  return dense_result(G, a, k.rows(), k.cols(), std::move(v));
}

DetKernel mask_first(const DetKernel& k, int i0) {
  if (k.is_zero()) return k;
  const Grid& G = k.grid();
  if (k.kind() == DetKernel::Kind::train) return DetKernel::from_train(G, train_mask_first(k.train(), i0));
  std::vector<double> v = k.dense_data();
  const int a = k.arity(), bs = k.rows() * k.cols();
  for (SimplexWalker w(G.m(), a); w.valid(); w.next())
    if (w[0] != i0) std::fill_n(v.data() + w.rank() * bs, bs, 0.0);
  return dense_result(G, a, k.rows(), k.cols(), std::move(v));
}

DetKernel fix_prefix(const DetKernel& k, const std::vector<int>& prefix) {
  const int p = static_cast<int>(prefix.size());
  if (p == 0) return k;
  if (p >= k.arity()) throw DomainError("fix_prefix: prefix must leave at least one time");
  for (int j = 0; j < p; ++j)
    if (prefix[j] >= k.grid().m() || prefix[j] < 0 || (j && prefix[j] >= prefix[j - 1]))
      throw DomainError("fix_prefix: prefix must be strictly decreasing cell indices");
  if (prefix.back() == 0) throw DomainError("fix_prefix: no cells below the prefix");
  const Grid sub = k.grid().sub(0, prefix.back());
  const int a = k.arity() - p;
  if (k.is_zero()) return DetKernel::zero(sub, a, k.rows(), k.cols());
  if (k.kind() == DetKernel::Kind::train) return DetKernel::from_train(sub, train_fix_prefix(k.train(), prefix));
  const int bs = k.rows() * k.cols();
  std::uint64_t base = 0;
  for (int j = 0; j < p; ++j) base += choose(prefix[j], k.arity() - j);
  std::vector<double> v = alloc_dense(sub, a, k.rows(), k.cols());
  const double* src = k.dense_data().data();
  for (SimplexWalker w(sub.m(), a); w.valid(); w.next())
    std::copy_n(src + (base + w.rank()) * bs, bs, v.data() + w.rank() * bs);
  return dense_result(sub, a, k.rows(), k.cols(), std::move(v));
}

DetKernel compress(const DetKernel& k, double eps) {
  if (k.kind() != DetKernel::Kind::train) return k;
  PairTrain t = train_round(k.train(), eps);
  for (int q : t.r)
    if (q == 0) return DetKernel::zero(k.grid(), k.arity(), 1, 1);
  return DetKernel::from_train(k.grid(), std::move(t));
}

DetKernel to_layout(const DetKernel& k, const Grid& g) {
  if (g.m() != k.grid().m() || g.with_layout(k.grid().layout()) != k.grid())
    throw DomainError("to_layout: grids differ in more than layout");
  if (g.layout() == k.grid().layout()) return k;
  if (k.is_zero()) return DetKernel::zero(g, k.arity(), k.rows(), k.cols());
  return DetKernel::from_values(g, k.arity(), k.rows(), k.cols(), k.values());
}

// ---------------------------------------------------------------- norms

double v_norm(const DetKernel& k) {
  if (k.rows() != k.cols()) throw DomainError("v_norm: operator norm needs square values");
  if (k.is_zero()) return 0.0;
  const Grid& G = k.grid();
  const int a = k.arity();
  const double w = ipow(G.h(), a - 1);
  std::vector<double> bucket(G.m(), 0.0);
  if (k.kind() == DetKernel::Kind::train) {
    bucket = train_last_sumsq(k.train());
  } else {
    const int d = k.rows();
    const double* p = k.dense_data().data();
    for (SimplexWalker it(G.m(), a); it.valid(); it.next()) {
      const double s = spectral_norm(p + it.rank() * d * d, d, d);
      bucket[it[a - 1]] += s * s;
    }
  }
  double mx = 0;
  for (double b : bucket) mx = std::max(mx, w * b);
  return std::sqrt(mx);
}

double l2_norm(const DetKernel& k) {
  if (k.is_zero()) return 0.0;
  const double w = ipow(k.grid().h(), k.arity());
  if (k.kind() == DetKernel::Kind::train) return std::sqrt(w * train_sumsq(k.train()));
  double s = 0;
  for (double v : k.dense_data()) s += v * v;
  return std::sqrt(w * s);
}

double l2_op_norm(const DetKernel& k) {
  if (k.is_zero()) return 0.0;
  if (k.kind() == DetKernel::Kind::train) return l2_norm(k);
  const double w = ipow(k.grid().h(), k.arity());
  const int r = k.rows(), c = k.cols();
  const double* p = k.dense_data().data();
  double s = 0;
  const std::uint64_t n = k.count();
  for (std::uint64_t t = 0; t < n; ++t) {
    const double x = spectral_norm(p + t * r * c, r, c);
    s += x * x;
  }
  return std::sqrt(w * s);
}

double inner(const DetKernel& a, const DetKernel& b) {
  if (!same_shape(a, b)) throw DomainError("inner: shape mismatch");
  if (a.is_zero() || b.is_zero()) return 0.0;
  const double w = ipow(a.grid().h(), a.arity());
  if (a.kind() == DetKernel::Kind::train) return w * train_dot(a.train(), b.train());
  const auto& x = a.dense_data();
  const auto& y = b.dense_data();
  double s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return w * s;
}

double l2_distance(const DetKernel& a, const DetKernel& b) { return l2_norm(a - b); }

double first_index_mass(const DetKernel& k, int i0) {
  if (k.is_zero()) return 0.0;
  const double w = ipow(k.grid().h(), k.arity() - 1);
  if (k.kind() == DetKernel::Kind::train) return w * train_sumsq(train_mask_first(k.train(), i0));
  const int a = k.arity(), bs = k.rows() * k.cols();
  const double* p = k.dense_data().data();
  double s = 0;
  for (SimplexWalker it(k.grid().m(), a); it.valid(); it.next())
    if (it[0] == i0)
      for (int e = 0; e < bs; ++e) s += p[it.rank() * bs + e] * p[it.rank() * bs + e];
  return w * s;
}

// ---------------------------------------------------------------- fractional kernel

double fractional_cell_average(double alpha, double h, int lag) {
  if (!(alpha > 0.5 && alpha <= 1.0)) throw DomainError("fractional kernel: need 1/2 < alpha <= 1");
  if (lag < 1) throw DomainError("fractional kernel: lag must be >= 1");
  if (alpha == 1.0) return 1.0;
  // ((lag+1/2)^a - (lag-1/2)^a) h^a / (a h Gamma(a)), written to avoid cancellation
  const double lo = lag - 0.5;
  const double diff = std::pow(lo, alpha) * std::expm1(alpha * std::log1p(1.0 / lo));
  return diff * std::pow(h, alpha - 1.0) / (alpha * std::tgamma(alpha));
}

DetKernel tabulate_fractional(double alpha, const Matrix& scale, const Grid& g) {
  if (!(alpha > 0.5 && alpha <= 1.0)) throw DomainError("fractional kernel: need 1/2 < alpha <= 1");
  const int rows = static_cast<int>(scale.rows()), cols = static_cast<int>(scale.cols());
  if (scale.isZero(0.0)) return DetKernel::zero(g, 2, rows, cols);
  std::vector<double> prof(g.m(), 0.0);
  for (int l = 1; l < g.m(); ++l) prof[l] = fractional_cell_average(alpha, g.h(), l);
  RowMatrix sc = scale;
  if (g.layout() == Layout::train) {
    if (rows != 1 || cols != 1) throw DomainError("train layout holds scalar kernels only");
    const double c = sc(0, 0);
    return DetKernel::from_train(g, PairTrain::from_pair_function(g.m(), [&](int i, int j) { return c * prof[i - j]; }));
  }
  return DetKernel::tabulate(g, 2, rows, cols, [&](const int* idx, double* out) {
    const double p = prof[idx[0] - idx[1]];
    for (int e = 0; e < rows * cols; ++e) out[e] = p * sc.data()[e];
  });
}

DetKernel tabulate_fractional(double alpha, double scale, const Grid& g) {
  return tabulate_fractional(alpha, Matrix::Constant(1, 1, scale), g);
}

// ---------------------------------------------------------------- CSV

namespace {
std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

bool next_line(std::istream& is, std::string& line) {
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) return true;
  }
  return false;
}
}  // namespace

namespace {

// train kernels: bonds, then a(i), core blocks per pair (i > j) and b(i), one row each
void write_train_csv(std::ostream& os, const DetKernel& k) {
  const Grid& g = k.grid();
  os << "train,arity,m,s,t\n" << k.arity() << ',' << g.m() << ',' << fmt17(g.s()) << ',' << fmt17(g.t()) << '\n';
  if (k.is_zero()) {
    os << "zero\n";
    return;
  }
  const PairTrain& t = k.train();
  os << "bonds";
  for (int r : t.r) os << ',' << r;
  os << '\n';
  const auto row = [&](const std::string& head, const double* v, int n) {
    std::string line = head;
    for (int e = 0; e < n; ++e) {
      line += ',';
      line += fmt17(v[e]);
    }
    line += '\n';
    os << line;
  };
  for (int i = 0; i < t.m; ++i) row("a," + std::to_string(i), t.av(i), t.r[0]);
  for (int c = 1; c <= t.n; ++c)
    for (int i = 1; i < t.m; ++i)
      for (int j = 0; j < i; ++j)
        row("core," + std::to_string(c) + ',' + std::to_string(i) + ',' + std::to_string(j), t.blk(c, i, j),
            t.r[c - 1] * t.r[c]);
  for (int i = 0; i < t.m; ++i) row("b," + std::to_string(i), t.bv(i), t.r[t.n]);
}

DetKernel read_train_csv(std::istream& is, const Grid& g) {
  std::string line;
  if (!next_line(is, line)) throw DomainError("kernel CSV: missing shape row");
  auto f = split_csv(line);
  if (f.size() != 4) throw DomainError("kernel CSV: bad shape row");
  const int arity = std::stoi(f[0]), m = std::stoi(f[1]);
  const double s = std::stod(f[2]), t = std::stod(f[3]);
  if (m != g.m() || std::abs(s - g.s()) > 1e-12 * (1 + std::abs(s)) || std::abs(t - g.t()) > 1e-12 * (1 + std::abs(t)))
    throw DomainError("kernel CSV: grid does not match");
  if (arity < 1 || arity > kMaxArity) throw DomainError("kernel CSV: bad shape");
  if (g.layout() != Layout::train) throw DomainError("kernel CSV: train kernel on a dense grid");
  if (!next_line(is, line)) throw DomainError("kernel CSV: truncated");
  if (line == "zero") return DetKernel::zero(g, arity);
  f = split_csv(line);
  if (static_cast<int>(f.size()) != arity + 1 || f[0] != "bonds") throw DomainError("kernel CSV: bad bonds row");
  std::vector<int> bonds;
  for (int k = 1; k <= arity; ++k) {
    bonds.push_back(std::stoi(f[k]));
    if (bonds.back() < 1) throw DomainError("kernel CSV: bad bond");
  }
  PairTrain tr = PairTrain::shaped(m, bonds);
  const auto fill = [&](double* dst, int n, std::size_t skip) {
    if (!next_line(is, line)) throw DomainError("kernel CSV: truncated");
    const auto c = split_csv(line);
    if (c.size() != skip + n) throw DomainError("kernel CSV: bad row width");
    for (int e = 0; e < n; ++e) dst[e] = std::stod(c[skip + e]);
  };
  for (int i = 0; i < m; ++i) fill(tr.av(i), tr.r[0], 2);
  for (int c = 1; c <= tr.n; ++c)
    for (int i = 1; i < m; ++i)
      for (int j = 0; j < i; ++j) fill(tr.blk(c, i, j), tr.r[c - 1] * tr.r[c], 4);
  for (int i = 0; i < m; ++i) fill(tr.bv(i), tr.r[tr.n], 2);
  return DetKernel::from_train(g, std::move(tr));
}

}  // namespace

void write_csv(std::ostream& os, const DetKernel& k) {
  const Grid& g = k.grid();
  if (k.kind() == DetKernel::Kind::train || (k.is_zero() && g.layout() == Layout::train)) {
    write_train_csv(os, k);
    return;
  }
  os << "arity,rows,cols,m,s,t\n";
  os << k.arity() << ',' << k.rows() << ',' << k.cols() << ',' << g.m() << ',' << fmt17(g.s()) << ','
     << fmt17(g.t()) << '\n';
  if (k.count() > 50'000'000ULL) throw RangeError("kernel too large for CSV export");
  const std::vector<double> v = k.values();
  const int bs = k.rows() * k.cols();
  std::string line;
  for (SimplexWalker w(g.m(), k.arity()); w.valid(); w.next()) {
    line.clear();
    for (int j = 0; j < k.arity(); ++j) {
      if (j) line += ',';
      line += std::to_string(w[j]);
    }
    for (int e = 0; e < bs; ++e) {
      line += ',';
      line += fmt17(v[w.rank() * bs + e]);
    }
    line += '\n';
    os << line;
  }
}

DetKernel read_csv(std::istream& is, const Grid& g) {
  std::string line;
  if (!next_line(is, line)) throw DomainError("kernel CSV: missing header");
  if (line == "train,arity,m,s,t") return read_train_csv(is, g);
  if (line != "arity,rows,cols,m,s,t") throw DomainError("kernel CSV: missing header");
  if (!next_line(is, line)) throw DomainError("kernel CSV: missing shape row");
  auto f = split_csv(line);
  if (f.size() != 6) throw DomainError("kernel CSV: bad shape row");
  const int arity = std::stoi(f[0]), rows = std::stoi(f[1]), cols = std::stoi(f[2]), m = std::stoi(f[3]);
  const double s = std::stod(f[4]), t = std::stod(f[5]);
  if (m != g.m() || std::abs(s - g.s()) > 1e-12 * (1 + std::abs(s)) || std::abs(t - g.t()) > 1e-12 * (1 + std::abs(t)))
    throw DomainError("kernel CSV: grid does not match");
  if (arity < 1 || arity > kMaxArity || rows < 1 || cols < 1) throw DomainError("kernel CSV: bad shape");
  const std::uint64_t n = simplex_count(g, arity);
  const int bs = rows * cols;
  std::vector<double> v(n * bs, 0.0);
  std::vector<int> idx(arity);
  for (std::uint64_t row = 0; row < n; ++row) {
    if (!next_line(is, line)) throw DomainError("kernel CSV: truncated");
    auto c = split_csv(line);
    if (static_cast<int>(c.size()) != arity + bs) throw DomainError("kernel CSV: bad row width");
    for (int j = 0; j < arity; ++j) {
      idx[j] = std::stoi(c[j]);
      if (idx[j] < 0 || idx[j] >= m || (j > 0 && idx[j] >= idx[j - 1])) throw DomainError("kernel CSV: bad tuple");
    }
    const std::uint64_t r = simplex_rank(idx.data(), arity);
    for (int e = 0; e < bs; ++e) v[r * bs + e] = std::stod(c[arity + e]);
  }
  return DetKernel::from_values(g, arity, rows, cols, std::move(v));
}

}  // namespace svk
