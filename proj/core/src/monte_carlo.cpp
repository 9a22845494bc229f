#include "svk/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include <Eigen/Dense>

#include "svk/parallel.hpp"
#include "svk/solvers.hpp"

namespace svk {

namespace {

constexpr long kBlock = 1024;  // paths per work item
constexpr std::uint64_t kTableLimit = 50'000'000ULL;

using ColMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor>;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

long block_count(long paths) { return (paths + kBlock - 1) / kBlock; }

// runs f(first path, count) over fixed path blocks
void for_blocks(long paths, const std::function<void(long, long)>& f) {
  parallel_for(0, block_count(paths), [&](long b) {
    const long p0 = b * kBlock;
    f(p0, std::min(kBlock, paths - p0));
  });
}

// cell increments of paths [p0, p0+np) as an m x np column-major matrix
ColMat cell_block(const PathBatch& batch, long p0, long np) {
  ColMat c(batch.grid().m(), np);
  for (long q = 0; q < np; ++q) batch.cell_increments(p0 + q, c.col(q).data());
  return c;
}

void check_scalar(const DetKernel& k, const char* what) {
  if (k.rows() != 1 || k.cols() != 1) throw DomainError(std::string(what) + ": Monte Carlo handles scalar kernels only");
}

// S_p = sum over t > i1 > ... > in of g(i1..in) dW_{i1} ... dW_{in}, where g lives on cells [0, t)
void iterated_train(const PairTrain& g, const ColMat& dw, double* out) {
  const int m = g.m;
  const long np = dw.cols();
  const auto rows = [&](int k) { return static_cast<Eigen::Index>(m) * g.r[k]; };
  // dense block-lower-triangular cores, G_k(i, j) for i > j
  std::vector<RowMat> gk(g.n + 1);
  for (int k = 1; k <= g.n; ++k) {
    const int r0 = g.r[k - 1], r1 = g.r[k];
    gk[k] = RowMat::Zero(rows(k - 1), rows(k));
    for (int i = 1; i < m; ++i)
      for (int jj = 0; jj < i; ++jj) {
        const double* b = g.blk(k, i, jj);
        for (int u = 0; u < r0; ++u)
          for (int v = 0; v < r1; ++v) gk[k](i * r0 + u, jj * r1 + v) = b[u * r1 + v];
      }
  }
  const auto scale_rows = [&](ColMat& y, int r) {
    for (int c = 0; c < m; ++c)
      for (int u = 0; u < r; ++u) y.row(c * r + u).array() *= dw.row(c).array();
  };
  ColMat y(rows(g.n), np);
  for (int c = 0; c < m; ++c)
    for (int u = 0; u < g.r[g.n]; ++u) y.row(c * g.r[g.n] + u).setConstant(g.bv(c)[u]);
  scale_rows(y, g.r[g.n]);
  for (int k = g.n; k >= 1; --k) {
    ColMat v = gk[k] * y;
    scale_rows(v, g.r[k - 1]);
    y = std::move(v);
  }
  Eigen::Map<const Eigen::RowVectorXd> a(g.a.data(), rows(0));
  Eigen::Map<Eigen::RowVectorXd>(out, np) = a * y;
}

void iterated_dense(const DetKernel& g, const ColMat& dw, double* out) {
  const long np = dw.cols();
  const int n = g.arity();
  const std::vector<double>& vals = g.dense_data();
  Eigen::Map<Eigen::VectorXd> acc(out, np);
  acc.setZero();
  Eigen::VectorXd prod(np);
  for (SimplexWalker w(g.grid().m(), n); w.valid(); w.next()) {
    const double v = vals[w.rank()];
    if (v == 0) continue;
    prod = dw.row(w[0]).transpose();
    for (int q = 1; q < n; ++q) prod.array() *= dw.row(w[q]).transpose().array();
    acc += v * prod;
  }
}

double mean_of(const std::vector<double>& x) {
  double s = 0;
  for (double v : x) s += v;
  return x.empty() ? 0 : s / static_cast<double>(x.size());
}

}  // namespace

PathBatch::PathBatch(const Grid& g, int refine, long paths, std::uint64_t seed)
    : grid_(g), refine_(refine), paths_(paths), seed_(seed) {
  if (refine < 1) throw DomainError("simulate_paths: refine must be >= 1");
  if (paths < 1) throw DomainError("simulate_paths: need at least one path");
}

void PathBatch::step_increments(long p, double* out) const {
  const std::uint64_t pp = static_cast<std::uint64_t>(p);
  std::seed_seq sq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                   static_cast<std::uint32_t>(pp), static_cast<std::uint32_t>(pp >> 32)};
  std::mt19937_64 rng(sq);
  std::normal_distribution<double> nd(0.0, std::sqrt(step_h()));
  for (int i = 0; i < steps(); ++i) out[i] = nd(rng);
}

void PathBatch::cell_increments(long p, double* out) const {
  std::vector<double> st(steps());
  step_increments(p, st.data());
  for (int c = 0; c < grid_.m(); ++c) {
    double s = 0;
    for (int q = 0; q < refine_; ++q) s += st[c * refine_ + q];
    out[c] = s;
  }
}

std::vector<double> PathBatch::increments() const {
  const std::uint64_t n = static_cast<std::uint64_t>(paths_) * steps();
  if (n > kTableLimit) throw RangeError("PathBatch::increments: table too large, regenerate paths in blocks");
  std::vector<double> t(n);
  for_blocks(paths_, [&](long p0, long np) {
    for (long p = p0; p < p0 + np; ++p) step_increments(p, t.data() + p * steps());
  });
  return t;
}

PathBatch simulate_paths(const Grid& g, int refine, long p, std::uint64_t seed) { return PathBatch(g, refine, p, seed); }

IncrementStats increment_stats(const PathBatch& batch) {
  const int st = batch.steps();
  const long nb = block_count(batch.paths());
  std::vector<double> s1(nb * st, 0.0), s2(nb * st, 0.0);
  parallel_for(0, nb, [&](long b) {
    const long p0 = b * kBlock, np = std::min(kBlock, batch.paths() - p0);
    std::vector<double> x(st);
    for (long p = p0; p < p0 + np; ++p) {
      batch.step_increments(p, x.data());
      for (int i = 0; i < st; ++i) {
        s1[b * st + i] += x[i];
        s2[b * st + i] += x[i] * x[i];
      }
    }
  });
  IncrementStats r;
  const double np = static_cast<double>(batch.paths()), h = batch.step_h();
  for (int i = 0; i < st; ++i) {
    double a = 0, q = 0;
    for (long b = 0; b < nb; ++b) {
      a += s1[b * st + i];
      q += s2[b * st + i];
    }
    const double mean = a / np;
    const double var = np > 1 ? (q - np * mean * mean) / (np - 1) : q;
    r.max_mean_ratio = std::max(r.max_mean_ratio, std::abs(mean) / (std::sqrt(h) / std::sqrt(np)));
    r.max_var_dev = std::max(r.max_var_dev, std::abs(var / h - 1));
  }
  r.pass = r.max_mean_ratio <= 5 && r.max_var_dev <= 0.1;
  return r;
}

std::vector<double> eval_iterated(const DetKernel& f, const PathBatch& batch, int t_cell) {
  const int n = f.arity() - 1;
  if (n > kMaxMcOrder) throw DomainError("eval_iterated: Monte Carlo supports iterated integrals up to order 4");
  if (f.grid().m() != batch.grid().m() || f.grid().s() != batch.grid().s() || f.grid().t() != batch.grid().t())
    throw DomainError("eval_iterated: kernel and paths live on different grids");
  if (t_cell < 0 || t_cell >= f.grid().m()) throw DomainError("eval_iterated: cell index out of range");
  check_scalar(f, "eval_iterated");
  std::vector<double> out(batch.paths(), 0.0);
  if (f.is_zero()) return out;
  if (n == 0) {
    std::fill(out.begin(), out.end(), f.at({t_cell}, 0, 0));
    return out;
  }
  if (t_cell < n) return out;  // no strictly decreasing tuple fits below t_cell
  const DetKernel g = fix_prefix(f, {t_cell});
  if (g.is_zero()) return out;
  for_blocks(batch.paths(), [&](long p0, long np) {
    ColMat dw = cell_block(batch, p0, np).topRows(t_cell);
    if (g.kind() == DetKernel::Kind::train)
      iterated_train(g.train(), dw, out.data() + p0);
    else
      iterated_dense(g, dw, out.data() + p0);
  });
  return out;
}

std::vector<double> reconstruct(const ChaosProcess& x, const PathBatch& batch, int t_cell) {
  if (x.order() > kMaxMcOrder) throw DomainError("reconstruct: Monte Carlo supports chaos order up to 4");
  if (x.rows() != 1 || x.cols() != 1) throw DomainError("reconstruct: Monte Carlo handles scalar processes only");
  std::vector<double> s(batch.paths(), 0.0);
  for (int n = 0; n <= x.order(); ++n) {
    const std::vector<double> v = eval_iterated(x[n], batch, t_cell);
    for (long p = 0; p < batch.paths(); ++p) s[p] += v[p];
  }
  return s;
}

double fractional_step_weight(double alpha, double h, int lag) {
  if (!(alpha > 0.5 && alpha <= 1.0)) throw DomainError("fractional kernel: need 1/2 < alpha <= 1");
  if (lag < 1) throw DomainError("fractional kernel: lag must be >= 1");
  if (alpha == 1.0) return 1.0;
  // (lag^a − (lag−1)^a) h^{a−1} / Γ(a+1)
  const double d = lag == 1 ? 1.0 : std::pow(lag - 1.0, alpha) * std::expm1(alpha * std::log1p(1.0 / (lag - 1.0)));
  return d * std::pow(h, alpha - 1.0) / std::tgamma(alpha + 1.0);
}

EulerSystem euler_fractional_bs(double alpha, double mu, double sigma, double x0, double h) {
  fractional_step_weight(alpha, h, 1);  // validates alpha
  EulerSystem e;
  e.phi = [x0](int) { return x0; };
  e.j = [=](int i, int l) { return mu * fractional_step_weight(alpha, h, i - l); };
  e.k = [=](int i, int l) { return sigma * fractional_step_weight(alpha, h, i - l); };
  return e;
}

EulerSystem euler_noisy_memory(const NoisyMemoryCoefficients& c, double s, double h) {
  fractional_step_weight(c.alpha, h, 1);
  for (const ChaosProcess* p : {&c.b, &c.sigma}) {
    if (p->coeffs().empty()) continue;
    for (int n = 1; n <= p->order(); ++n)
      if (!(*p)[n].is_zero()) throw DomainError("euler_noisy_memory: drift and volatility terms must be deterministic");
  }
  const auto t = [s, h](int i) { return s + i * h; };
  const auto cell_value = [](const ChaosProcess& p, double u) {
    const Grid& g = p.grid();
    const int c = std::clamp(static_cast<int>(std::floor((u - g.s()) / g.h())), 0, g.m() - 1);
    return p[0].at({c}, 0, 0);
  };
  const double alpha = c.alpha;
  EulerSystem e;
  const double x0 = c.x0;
  e.phi = [x0](int) { return x0; };
  e.w = [=](int i, int l) { return fractional_step_weight(alpha, h, i - l); };
  if (c.j) e.j = [=, f = c.j](int i, int l) { return fractional_step_weight(alpha, h, i - l) * f(t(l)); };
  if (c.k) e.k = [=, f = c.k](int i, int l) { return fractional_step_weight(alpha, h, i - l) * f(t(l)); };
  if (c.l1) e.l1 = [=, f = c.l1](int l, int r) { return f(t(l), t(r)); };
  if (c.l2) e.l2 = [=, f = c.l2](int l, int r) { return f(t(l), t(r)); };
  if (!c.b.coeffs().empty() && !c.b[0].is_zero()) e.b = [=, b = c.b](int l) { return cell_value(b, t(l)); };
  if (!c.sigma.coeffs().empty() && !c.sigma[0].is_zero())
    e.sigma = [=, sg = c.sigma](int l) { return cell_value(sg, t(l)); };
  return e;
}

std::vector<double> euler_svie(const EulerSystem& sys, const PathBatch& batch, int end_step) {
  const int st = batch.steps();
  if (end_step < 0) end_step = st;
  if (end_step > st) throw DomainError("euler_svie: end step beyond the path length");
  const int n = end_step;
  const double h = batch.step_h();
  const bool memory = sys.w && (sys.b || sys.sigma || sys.l1 || sys.l2);

  // lower-triangular tables, row i holds lags l < i
  const auto table = [n](const std::function<double(int, int)>& f, double c) {
    RowMat t = RowMat::Zero(n + 1, std::max(n, 1));
    if (f)
      for (int i = 1; i <= n; ++i)
        for (int l = 0; l < i; ++l) t(i, l) = c * f(i, l);
    return t;
  };
  const RowMat jt = table(sys.j, h), kt = table(sys.k, 1.0);
  const RowMat wt = memory ? table(sys.w, 1.0) : RowMat();
  const RowMat l1t = memory ? table(sys.l1, h) : RowMat(), l2t = memory ? table(sys.l2, 1.0) : RowMat();
  std::vector<double> phi(n + 1, 0.0), bv(n + 1, 0.0), sv(n + 1, 0.0);
  for (int i = 0; i <= n; ++i) {
    if (sys.phi) phi[i] = sys.phi(i);
    if (memory && sys.b) bv[i] = sys.b(i);
    if (memory && sys.sigma) sv[i] = sys.sigma(i);
  }
  const bool has_j = static_cast<bool>(sys.j), has_k = static_cast<bool>(sys.k);

  std::vector<double> out(batch.paths());
  for_blocks(batch.paths(), [&](long p0, long np) {
    RowMat dw(std::max(st, 1), np);
    {
      std::vector<double> x(st);
      for (long q = 0; q < np; ++q) {
        batch.step_increments(p0 + q, x.data());
        for (int i = 0; i < st; ++i) dw(i, q) = x[i];
      }
    }
    RowMat x(n + 1, np), y(n + 1, np), z;
    if (memory) z.resize(n + 1, np);
    for (int i = 0; i <= n; ++i) {
      auto xi = x.row(i);
      xi.setConstant(phi[i]);
      if (i > 0) {
        if (has_j) xi.noalias() += jt.row(i).head(i) * x.topRows(i);
        if (has_k) xi.noalias() += kt.row(i).head(i) * y.topRows(i);
        if (memory) xi.noalias() += wt.row(i).head(i) * z.topRows(i);
      }
      if (i == n) break;
      y.row(i) = xi.cwiseProduct(dw.row(i));
      if (memory) {
        Eigen::RowVectorXd m1 = Eigen::RowVectorXd::Zero(np), m2 = Eigen::RowVectorXd::Zero(np);
        if (i > 0) {
          if (sys.l1) m1.noalias() += l1t.row(i).head(i) * x.topRows(i);
          if (sys.l2) m2.noalias() += l2t.row(i).head(i) * y.topRows(i);
        }
        const Eigen::RowVectorXd mem = m1 + m2;
        z.row(i) = (mem.array() + bv[i]) * h + (mem.array() + sv[i]) * dw.row(i).array();
      }
    }
    for (long q = 0; q < np; ++q) out[p0 + q] = x(n, q);
  });
  return out;
}

MomentRow compare_samples(const std::string& quantity, const std::vector<double>& a, const std::vector<double>& b,
                          double rel_allow) {
  if (a.size() != b.size() || a.empty()) throw DomainError("compare_moments: samples must be paired and non-empty");
  const std::size_t p = a.size();
  MomentRow r;
  r.quantity = quantity;
  r.chaos_value = mean_of(a);
  r.mc_value = mean_of(b);
  std::vector<double> d(p);
  for (std::size_t i = 0; i < p; ++i) d[i] = a[i] - b[i];
  r.diff = mean_of(d);
  double ss = 0;
  for (double v : d) ss += (v - r.diff) * (v - r.diff);
  r.stderr_ = p > 1 ? std::sqrt(ss / static_cast<double>(p - 1) / static_cast<double>(p)) : 0.0;
  r.pass = std::abs(r.diff) <= 3 * r.stderr_ + rel_allow * std::abs(r.mc_value);
  return r;
}

MomentComparison compare_moments(const std::vector<double>& a, const std::vector<double>& b, double rel_allow,
                                 const std::string& tag) {
  std::vector<double> a2(a.size()), b2(b.size());
  for (std::size_t i = 0; i < a.size(); ++i) a2[i] = a[i] * a[i];
  for (std::size_t i = 0; i < b.size(); ++i) b2[i] = b[i] * b[i];
  const std::string pre = tag.empty() ? "" : tag + ":";
  return {compare_samples(pre + "mean", a, b, rel_allow), compare_samples(pre + "second_moment", a2, b2, rel_allow)};
}

void write_moment_header(std::ostream& os) { os << "quantity,chaos_value,mc_value,stderr,pass\n"; }

void write_moment_row(std::ostream& os, const MomentRow& r) {
  char buf[128];
  std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g,", r.chaos_value, r.mc_value, r.stderr_);
  os << r.quantity << buf << (r.pass ? "true" : "false") << '\n';
}

}  // namespace svk
