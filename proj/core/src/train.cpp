#include "svk/train.hpp"

#include <algorithm>
#include <cmath>

#include "svk/grid.hpp"
#include "svk/linalg.hpp"

namespace svk {

namespace {

using CMap = Eigen::Map<const RowMatrix>;
using MMap = Eigen::Map<RowMatrix>;
using CVec = Eigen::Map<const Vector>;
using MVec = Eigen::Map<Vector>;

void check_same_m(const PairTrain& x, const PairTrain& y) {
  if (x.m != y.m) throw DomainError("pair-train: cell counts differ");
}

}  // namespace

PairTrain PairTrain::shaped(int m, const std::vector<int>& bonds) {
  PairTrain t;
  t.m = m;
  t.n = static_cast<int>(bonds.size()) - 1;
  t.r = bonds;
  t.a.assign(static_cast<std::size_t>(m) * bonds.front(), 0.0);
  t.b.assign(static_cast<std::size_t>(m) * bonds.back(), 0.0);
  t.core.resize(t.n);
  for (int k = 1; k <= t.n; ++k) t.core[k - 1].assign(pairs(m) * bonds[k - 1] * bonds[k], 0.0);
  return t;
}

PairTrain PairTrain::zero(int m, int arity) { return shaped(m, std::vector<int>(arity, 0)); }

PairTrain PairTrain::from_values1(int m, const std::vector<double>& v) {
  PairTrain t = shaped(m, {1});
  for (int i = 0; i < m; ++i) {
    t.a[i] = v[i];
    t.b[i] = 1.0;
  }
  return t;
}

PairTrain PairTrain::from_pair_values(int m, const std::vector<double>& v) {
  PairTrain t = shaped(m, {1, 1});
  std::fill(t.a.begin(), t.a.end(), 1.0);
  std::fill(t.b.begin(), t.b.end(), 1.0);
  // colex rank of (i, j) is C(i,2) + j = pidx(i, j)
  std::copy(v.begin(), v.end(), t.core[0].begin());
  return t;
}

PairTrain PairTrain::from_pair_function(int m, const std::function<double(int, int)>& f) {
  PairTrain t = shaped(m, {1, 1});
  std::fill(t.a.begin(), t.a.end(), 1.0);
  std::fill(t.b.begin(), t.b.end(), 1.0);
  for (int i = 1; i < m; ++i)
    for (int j = 0; j < i; ++j) *t.blk(1, i, j) = f(i, j);
  return t;
}

double PairTrain::eval(const int* idx) const {
  if (r[0] == 0) return 0.0;
  Vector v = CVec(av(idx[0]), r[0]);
  for (int k = 1; k <= n; ++k) {
    Vector w = CMap(blk(k, idx[k - 1], idx[k]), r[k - 1], r[k]).transpose() * v;
    v.swap(w);
  }
  return v.dot(CVec(bv(idx[n]), r[n]));
}

std::vector<double> PairTrain::materialize() const {
  const int arity = n + 1;
  std::vector<double> out(simplex_count(m, arity), 0.0);
  if (out.empty()) return out;
  for (int q : r)
    if (q == 0) return out;
  // prefix[k] = a(i0)^T G1 ... Gk, recomputed only from the first changed position
  std::vector<Vector> prefix(arity);
  std::vector<int> prev(arity, -1);
  for (SimplexWalker w(m, arity); w.valid(); w.next()) {
    const int* idx = w.idx();
    int first = 0;
    while (first < arity && idx[first] == prev[first]) ++first;
    for (int k = first; k < arity; ++k) {
      if (k == 0)
        prefix[0] = CVec(av(idx[0]), r[0]);
      else
        prefix[k] = CMap(blk(k, idx[k - 1], idx[k]), r[k - 1], r[k]).transpose() * prefix[k - 1];
      prev[k] = idx[k];
    }
    out[w.rank()] = prefix[n].dot(CVec(bv(idx[n]), r[n]));
  }
  return out;
}

std::size_t PairTrain::storage() const {
  std::size_t s = a.size() + b.size();
  for (const auto& c : core) s += c.size();
  return s;
}

int PairTrain::max_bond() const { return r.empty() ? 0 : *std::max_element(r.begin(), r.end()); }

PairTrain train_scale(const PairTrain& x, double c) {
  PairTrain y = x;
  for (double& v : y.b) v *= c;
  return y;
}

PairTrain train_add(const PairTrain& x, const PairTrain& y, double cy) {
  check_same_m(x, y);
  if (x.n != y.n) throw DomainError("pair-train add: arity mismatch");
  const int n = x.n, m = x.m;
  std::vector<int> bonds(n + 1);
  for (int k = 0; k <= n; ++k) bonds[k] = x.r[k] + y.r[k];
  PairTrain z = PairTrain::shaped(m, bonds);
  for (int i = 0; i < m; ++i) {
    std::copy(x.av(i), x.av(i) + x.r[0], z.av(i));
    std::copy(y.av(i), y.av(i) + y.r[0], z.av(i) + x.r[0]);
    std::copy(x.bv(i), x.bv(i) + x.r[n], z.bv(i));
    for (int q = 0; q < y.r[n]; ++q) z.bv(i)[x.r[n] + q] = cy * y.bv(i)[q];
  }
  for (int k = 1; k <= n; ++k) {
    const int zc = bonds[k];
    for (int i = 1; i < m; ++i)
      for (int j = 0; j < i; ++j) {
        double* dst = z.blk(k, i, j);
        const double* xs = x.blk(k, i, j);
        const double* ys = y.blk(k, i, j);
        for (int p = 0; p < x.r[k - 1]; ++p)
          for (int q = 0; q < x.r[k]; ++q) dst[p * zc + q] = xs[p * x.r[k] + q];
        for (int p = 0; p < y.r[k - 1]; ++p)
          for (int q = 0; q < y.r[k]; ++q) dst[(x.r[k - 1] + p) * zc + x.r[k] + q] = ys[p * y.r[k] + q];
      }
  }
  return z;
}

namespace {
// pointwise values of an arity-1 train
std::vector<double> values1(const PairTrain& g) {
  std::vector<double> v(g.m, 0.0);
  for (int i = 0; i < g.m; ++i) v[i] = CVec(g.av(i), g.r[0]).dot(CVec(g.bv(i), g.r[0]));
  return v;
}
}  // namespace

PairTrain train_tri(const PairTrain& f, const PairTrain& g) {
  check_same_m(f, g);
  const int m = f.m;
  if (f.n == 0) {
    std::vector<double> fv = values1(f);
    PairTrain z = g;
    for (int i = 0; i < m; ++i)
      for (int q = 0; q < g.r[0]; ++q) z.av(i)[q] *= fv[i];
    return z;
  }
  if (g.n == 0) {
    std::vector<double> gv = values1(g);
    PairTrain z = f;
    for (int i = 0; i < m; ++i)
      for (int q = 0; q < f.r[f.n]; ++q) z.bv(i)[q] *= gv[i];
    return z;
  }
  std::vector<int> bonds(f.r.begin(), f.r.end() - 1);
  bonds.insert(bonds.end(), g.r.begin(), g.r.end());
  PairTrain z = PairTrain::shaped(m, bonds);
  z.a = f.a;
  z.b = g.b;
  for (int k = 1; k < f.n; ++k) z.core[k - 1] = f.core[k - 1];
  for (int k = 1; k <= g.n; ++k) z.core[f.n + k - 1] = g.core[k - 1];
  // junction core: G_f(p, i) b_f(i) a_g(i)^T
  const int p0 = f.r[f.n - 1], q0 = g.r[0];
  for (int i = 1; i < m; ++i)
    for (int j = 0; j < i; ++j) {
      Vector u = CMap(f.blk(f.n, i, j), p0, f.r[f.n]) * CVec(f.bv(j), f.r[f.n]);
      MMap(z.blk(f.n, i, j), p0, q0) = u * CVec(g.av(j), q0).transpose();
    }
  return z;
}

PairTrain train_ast(const PairTrain& f, const PairTrain& g, double h) {
  check_same_m(f, g);
  if (f.n < 1) throw DomainError("elementary * needs left arity >= 2");
  const int m = f.m, fn = f.n;
  const int p = f.r[fn - 1];
  if (g.n == 0) {
    std::vector<double> gv = values1(g);
    std::vector<int> bonds(f.r.begin(), f.r.end() - 1);
    PairTrain z = PairTrain::shaped(m, bonds);
    z.a = f.a;
    for (int k = 1; k < fn; ++k) z.core[k - 1] = f.core[k - 1];
    for (int t = 0; t < m; ++t) {
      MVec out(z.bv(t), p);
      out.setZero();
      for (int s = 0; s < t; ++s)
        if (gv[s] != 0.0)
          out += (h * gv[s]) * (CMap(f.blk(fn, t, s), p, f.r[fn]) * CVec(f.bv(s), f.r[fn]));
    }
    return z;
  }
  const int q = g.r[1];
  std::vector<int> bonds(f.r.begin(), f.r.end() - 1);
  bonds.insert(bonds.end(), g.r.begin() + 1, g.r.end());
  PairTrain z = PairTrain::shaped(m, bonds);
  z.a = f.a;
  z.b = g.b;
  for (int k = 1; k < fn; ++k) z.core[k - 1] = f.core[k - 1];
  for (int k = 2; k <= g.n; ++k) z.core[fn + k - 2] = g.core[k - 1];
  // u(t,s) = G_f(t,s) b_f(s) (p), w(s,r) = a_g(s)^T G_g(s,r) (q)
  std::vector<double> u(PairTrain::pairs(m) * p), w(PairTrain::pairs(m) * q);
  for (int i = 1; i < m; ++i)
    for (int j = 0; j < i; ++j) {
      MVec(u.data() + PairTrain::pidx(i, j) * p, p) =
          CMap(f.blk(fn, i, j), p, f.r[fn]) * CVec(f.bv(j), f.r[fn]);
      MVec(w.data() + PairTrain::pidx(i, j) * q, q) =
          CMap(g.blk(1, i, j), g.r[0], q).transpose() * CVec(g.av(i), g.r[0]);
    }
  for (int t = 2; t < m; ++t)
    for (int s = 1; s < t; ++s) {
      CVec ut(u.data() + PairTrain::pidx(t, s) * p, p);
      if (ut.squaredNorm() == 0.0) continue;
      for (int rr = 0; rr < s; ++rr) {
        CVec ws(w.data() + PairTrain::pidx(s, rr) * q, q);
        MMap(z.blk(fn, t, rr), p, q).noalias() += h * ut * ws.transpose();
      }
    }
  return z;
}

namespace {
// Zipper environments E_k(i) = sum over shared leading tuples ending at i of
// (x-prefix)(y-prefix)^T, with one factor h per summed site.  Returns E at
// site `sites` - 1 (matrices rx x ry per index, row-major).
std::vector<RowMatrix> zip_env(const PairTrain& x, const PairTrain& y, int sites, double h) {
  const int m = x.m;
  std::vector<RowMatrix> E(m);
  for (int i = 0; i < m; ++i)
    E[i] = CVec(x.av(i), x.r[0]) * CVec(y.av(i), y.r[0]).transpose();
  for (int k = 1; k < sites; ++k) {
    std::vector<RowMatrix> F(m, RowMatrix::Zero(x.r[k], y.r[k]));
    for (int i = 1; i < m; ++i) {
      if (E[i].squaredNorm() == 0.0) continue;
      for (int j = 0; j < i; ++j)
        F[j].noalias() += h * (CMap(x.blk(k, i, j), x.r[k - 1], x.r[k]).transpose() * E[i] *
                               CMap(y.blk(k, i, j), y.r[k - 1], y.r[k]));
    }
    E.swap(F);
  }
  return E;
}
}  // namespace

PairTrain train_bstar(const PairTrain& kq, const PairTrain& x, double h) {
  check_same_m(kq, x);
  const int q = kq.n, n = x.n - kq.n, m = x.m;
  if (n < 0) throw DomainError("backward star term: kernel arity exceeds process arity");
  std::vector<RowMatrix> E = zip_env(kq, x, q + 1, h);
  std::vector<int> bonds(x.r.begin() + q, x.r.end());
  PairTrain z = PairTrain::shaped(m, bonds);
  for (int t = 0; t < m; ++t)
    MVec(z.av(t), x.r[q]) = E[t].transpose() * CVec(kq.bv(t), kq.r[q]);
  for (int k = q + 1; k <= x.n; ++k) z.core[k - q - 1] = x.core[k - 1];
  z.b = x.b;
  return z;
}

PairTrain train_bast(const PairTrain& j, const PairTrain& x, double h) {
  check_same_m(j, x);
  const int q = j.n - 1, n = x.n - q, m = x.m;
  if (q < 0 || n < 0) throw DomainError("backward * term: arity mismatch");
  std::vector<RowMatrix> E = zip_env(j, x, q + 1, h);
  const int rx = x.r[q];
  // w(s, t0) = E(s)^T G_j(s, t0) b_j(t0)
  std::vector<double> w(PairTrain::pairs(m) * rx, 0.0);
  for (int s = 1; s < m; ++s)
    for (int t0 = 0; t0 < s; ++t0) {
      Vector v = CMap(j.blk(q + 1, s, t0), j.r[q], j.r[q + 1]) * CVec(j.bv(t0), j.r[q + 1]);
      MVec(w.data() + PairTrain::pidx(s, t0) * rx, rx) = E[s].transpose() * v;
    }
  if (n == 0) {
    std::vector<double> val(m, 0.0);
    for (int t0 = 0; t0 < m; ++t0)
      for (int s = t0 + 1; s < m; ++s)
        val[t0] += h * CVec(w.data() + PairTrain::pidx(s, t0) * rx, rx).dot(CVec(x.bv(s), rx));
    return PairTrain::from_values1(m, val);
  }
  std::vector<int> bonds{1};
  bonds.insert(bonds.end(), x.r.begin() + q + 1, x.r.end());
  PairTrain z = PairTrain::shaped(m, bonds);
  std::fill(z.a.begin(), z.a.end(), 1.0);
  const int r1 = x.r[q + 1];
  for (int t0 = 1; t0 < m; ++t0)
    for (int s = t0 + 1; s < m; ++s) {
      CVec ws(w.data() + PairTrain::pidx(s, t0) * rx, rx);
      if (ws.squaredNorm() == 0.0) continue;
      for (int t1 = 0; t1 < t0; ++t1)
        MVec(z.blk(1, t0, t1), r1).noalias() +=
            h * (CMap(x.blk(q + 1, s, t1), rx, r1).transpose() * ws);
    }
  for (int k = q + 2; k <= x.n; ++k) z.core[k - q - 1] = x.core[k - 1];
  z.b = x.b;
  return z;
}

PairTrain train_restrict(const PairTrain& x, int lo, int hi) {
  const int ms = hi - lo;
  PairTrain z = PairTrain::shaped(ms, x.r);
  for (int i = 0; i < ms; ++i) {
    std::copy(x.av(i + lo), x.av(i + lo) + x.r[0], z.av(i));
    std::copy(x.bv(i + lo), x.bv(i + lo) + x.r[x.n], z.bv(i));
  }
  for (int k = 1; k <= x.n; ++k) {
    const std::size_t bs = static_cast<std::size_t>(x.r[k - 1]) * x.r[k];
    for (int i = 1; i < ms; ++i)
      for (int j = 0; j < i; ++j) std::copy_n(x.blk(k, i + lo, j + lo), bs, z.blk(k, i, j));
  }
  return z;
}

PairTrain train_embed(const PairTrain& x, int m_full, int lo) {
  PairTrain z = PairTrain::shaped(m_full, x.r);
  for (int i = 0; i < x.m; ++i) {
    std::copy(x.av(i), x.av(i) + x.r[0], z.av(i + lo));
    std::copy(x.bv(i), x.bv(i) + x.r[x.n], z.bv(i + lo));
  }
  for (int k = 1; k <= x.n; ++k) {
    const std::size_t bs = static_cast<std::size_t>(x.r[k - 1]) * x.r[k];
    for (int i = 1; i < x.m; ++i)
      for (int j = 0; j < i; ++j) std::copy_n(x.blk(k, i, j), bs, z.blk(k, i + lo, j + lo));
  }
  return z;
}

PairTrain train_sigma_scale(const PairTrain& x, const std::vector<double>& mid, double sigma) {
  PairTrain z = x;
  for (int k = 1; k <= x.n; ++k) {
    const std::size_t bs = static_cast<std::size_t>(x.r[k - 1]) * x.r[k];
    for (int i = 1; i < x.m; ++i)
      for (int j = 0; j < i; ++j) {
        const double f = std::exp(-sigma * (mid[i] - mid[j]));
        double* p = z.blk(k, i, j);
        for (std::size_t e = 0; e < bs; ++e) p[e] *= f;
      }
  }
  return z;
}

PairTrain train_fix_prefix(const PairTrain& x, const std::vector<int>& prefix) {
  const int k = static_cast<int>(prefix.size());
  if (k == 0) return x;
  if (k > x.n) throw DomainError("pair-train prefix longer than the train");
  const int ms = prefix.back();
  std::vector<int> bonds(x.r.begin() + k, x.r.end());
  PairTrain z = PairTrain::shaped(ms, bonds);
  Vector v = CVec(x.av(prefix[0]), x.r[0]);
  for (int j = 1; j < k; ++j) {
    Vector w = CMap(x.blk(j, prefix[j - 1], prefix[j]), x.r[j - 1], x.r[j]).transpose() * v;
    v.swap(w);
  }
  for (int i = 0; i < ms; ++i) {
    MVec(z.av(i), x.r[k]) = CMap(x.blk(k, ms, i), x.r[k - 1], x.r[k]).transpose() * v;
    std::copy(x.bv(i), x.bv(i) + x.r[x.n], z.bv(i));
  }
  for (int c = k + 1; c <= x.n; ++c) {
    const std::size_t bs = static_cast<std::size_t>(x.r[c - 1]) * x.r[c];
    for (int i = 1; i < ms; ++i)
      for (int j = 0; j < i; ++j) std::copy_n(x.blk(c, i, j), bs, z.blk(c - k, i, j));
  }
  return z;
}

PairTrain train_mask_first(const PairTrain& x, int i0) {
  PairTrain z = x;
  for (int i = 0; i < x.m; ++i)
    if (i != i0) std::fill(z.av(i), z.av(i) + x.r[0], 0.0);
  return z;
}

namespace {

// Left QR sweep.  Returns R_n(i) (rho x r[n]) such that the sum over tuples
// ending at i of prefix prefix^T equals R^T R.  Optionally records the
// orthonormal factors as cores (padded to uniform bonds) for rounding.
struct LeftSweep {
  std::vector<RowMatrix> R;                 // at the last site
  std::vector<int> P;                       // padded bond dims of the orthogonal cores
  std::vector<std::vector<double>> qcore;   // orthonormal cores k = 1..n
};

LeftSweep left_sweep(const PairTrain& x, bool keep_q) {
  const int m = x.m, n = x.n;
  LeftSweep ls;
  ls.P.assign(n + 1, 0);
  ls.P[0] = 1;
  std::vector<RowMatrix> R(m);
  for (int i = 0; i < m; ++i) R[i] = CVec(x.av(i), x.r[0]).transpose();
  if (keep_q) ls.qcore.resize(n);
  for (int k = 1; k <= n; ++k) {
    const int Pp = ls.P[k - 1], rk = x.r[k];
    std::vector<RowMatrix> Rn(m), Q(m);
    int Pk = 0;
    for (int i = 0; i < m; ++i) {
      const int cnt = m - 1 - i;
      const int rows = cnt * Pp;
      if (rows == 0 || rk == 0) {
        Rn[i] = RowMatrix::Zero(0, rk);
        continue;
      }
      Matrix S(rows, rk);
      for (int jj = 0; jj < cnt; ++jj) {
        const int j = i + 1 + jj;
        S.middleRows(jj * Pp, Pp) = R[j] * CMap(x.blk(k, j, i), x.r[k - 1], rk);
      }
      const int rho = std::min(rows, rk);
      Eigen::HouseholderQR<Matrix> qr(S);
      Rn[i] = qr.matrixQR().topRows(rho).triangularView<Eigen::Upper>();
      if (keep_q) Q[i] = qr.householderQ() * Matrix::Identity(rows, rho);
      Pk = std::max(Pk, rho);
    }
    for (int i = 0; i < m; ++i)
      if (Rn[i].rows() < Pk) {
        RowMatrix pad = RowMatrix::Zero(Pk, rk);
        pad.topRows(Rn[i].rows()) = Rn[i];
        Rn[i].swap(pad);
      }
    ls.P[k] = Pk;
    if (keep_q) {
      std::vector<double>& qc = ls.qcore[k - 1];
      qc.assign(PairTrain::pairs(m) * Pp * Pk, 0.0);
      for (int i = 0; i < m; ++i) {
        if (Q[i].size() == 0) continue;
        const int rho = static_cast<int>(Q[i].cols());
        for (int j = i + 1; j < m; ++j) {
          MMap blk(qc.data() + PairTrain::pidx(j, i) * Pp * Pk, Pp, Pk);
          blk.leftCols(rho) = Q[i].middleRows((j - i - 1) * Pp, Pp);
        }
      }
    }
    R.swap(Rn);
  }
  ls.R = std::move(R);
  return ls;
}

}  // namespace

std::vector<double> train_last_sumsq(const PairTrain& x) {
  std::vector<double> out(x.m, 0.0);
  for (int q : x.r)
    if (q == 0) return out;
  LeftSweep ls = left_sweep(x, false);
  for (int i = 0; i < x.m; ++i) out[i] = (ls.R[i] * CVec(x.bv(i), x.r[x.n])).squaredNorm();
  return out;
}

double train_sumsq(const PairTrain& x) {
  double s = 0;
  for (double v : train_last_sumsq(x)) s += v;
  return s;
}

double train_dot(const PairTrain& x, const PairTrain& y) {
  check_same_m(x, y);
  if (x.n != y.n) throw DomainError("pair-train dot: arity mismatch");
  std::vector<RowMatrix> E = zip_env(x, y, x.n + 1, 1.0);
  double s = 0;
  for (int i = 0; i < x.m; ++i)
    s += CVec(x.bv(i), x.r[x.n]).dot(E[i] * CVec(y.bv(i), y.r[y.n]));
  return s;
}

PairTrain train_round(const PairTrain& x, double eps) {
  const int m = x.m, n = x.n;
  for (int q : x.r)
    if (q == 0) return PairTrain::zero(m, n + 1);
  if (n == 0) return PairTrain::from_values1(m, values1(x));

  LeftSweep ls = left_sweep(x, true);
  std::vector<Vector> bt(m);
  double norm2 = 0;
  for (int i = 0; i < m; ++i) {
    bt[i] = ls.R[i] * CVec(x.bv(i), x.r[n]);
    norm2 += bt[i].squaredNorm();
  }
  if (norm2 == 0.0) return PairTrain::zero(m, n + 1);
  const double thr = eps * std::sqrt(norm2) / std::sqrt(double(n) * m);

  std::vector<int> bond(ls.P);  // current bonds; the last is rebuilt below
  std::vector<std::vector<double>> cores = std::move(ls.qcore);

  // last site: b~(i) folded into core n, new b = 1
  std::vector<double> newb(m, 0.0);
  {
    const int Pp = bond[n - 1], Pn = bond[n];
    std::vector<double> cn(PairTrain::pairs(m) * Pp, 0.0);
    for (int i = 0; i < m; ++i) {
      if (bt[i].norm() <= thr) continue;
      newb[i] = 1.0;
      for (int j = i + 1; j < m; ++j)
        MVec(cn.data() + PairTrain::pidx(j, i) * Pp, Pp) =
            CMap(cores[n - 1].data() + PairTrain::pidx(j, i) * Pp * Pn, Pp, Pn) * bt[i];
    }
    cores[n - 1].swap(cn);
    bond[n] = 1;
  }

  for (int k = n - 1; k >= 1; --k) {
    const int Pk = bond[k], rnext = bond[k + 1], Pprev = bond[k - 1];
    std::vector<Matrix> US(m), Vt(m);
    int newk = 0;
    for (int i = 1; i < m; ++i) {
      Matrix W(Pk, i * rnext);
      for (int l = 0; l < i; ++l)
        W.middleCols(l * rnext, rnext) =
            CMap(cores[k].data() + PairTrain::pidx(i, l) * Pk * rnext, Pk, rnext);
      Eigen::JacobiSVD<Matrix> svd(W, Eigen::ComputeThinU | Eigen::ComputeThinV);
      const Vector& sv = svd.singularValues();
      int rho = 0;
      while (rho < sv.size() && sv[rho] > thr) ++rho;
      US[i] = svd.matrixU().leftCols(rho) * sv.head(rho).asDiagonal();
      Vt[i] = svd.matrixV().leftCols(rho).transpose();
      newk = std::max(newk, rho);
    }
    std::vector<double> cnext(PairTrain::pairs(m) * newk * rnext, 0.0);
    std::vector<double> ccur(PairTrain::pairs(m) * Pprev * newk, 0.0);
    for (int i = 1; i < m; ++i) {
      const int rho = static_cast<int>(Vt[i].rows());
      if (rho == 0) continue;
      for (int l = 0; l < i; ++l)
        MMap(cnext.data() + PairTrain::pidx(i, l) * newk * rnext, newk, rnext).topRows(rho) =
            Vt[i].middleCols(l * rnext, rnext);
      for (int j = i + 1; j < m; ++j)
        MMap(ccur.data() + PairTrain::pidx(j, i) * Pprev * newk, Pprev, newk).leftCols(rho) =
            CMap(cores[k - 1].data() + PairTrain::pidx(j, i) * Pprev * Pk, Pprev, Pk) * US[i];
    }
    cores[k].swap(cnext);
    cores[k - 1].swap(ccur);
    bond[k] = newk;
  }

  PairTrain z;
  z.m = m;
  z.n = n;
  z.r = bond;
  z.a.assign(m, 1.0);
  z.b = std::move(newb);
  z.core = std::move(cores);
  return z;
}

}  // namespace svk
