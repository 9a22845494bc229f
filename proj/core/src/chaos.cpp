#include "svk/chaos.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <string>

namespace svk {

namespace {

void check_coeffs(const std::vector<DetKernel>& c, int arity_offset, const char* what) {
  if (c.empty()) throw DomainError(std::string(what) + ": needs at least one coefficient");
  if (static_cast<int>(c.size()) - 1 > kMaxOrder)
    throw DomainError(std::string(what) + ": chaos order above cap " + std::to_string(kMaxOrder));
  for (std::size_t n = 0; n < c.size(); ++n) {
    if (c[n].arity() != static_cast<int>(n) + arity_offset)
      throw DomainError(std::string(what) + ": coefficient " + std::to_string(n) + " has wrong arity");
    if (c[n].grid() != c[0].grid()) throw DomainError(std::string(what) + ": coefficients on different grids");
    if (c[n].rows() != c[0].rows() || c[n].cols() != c[0].cols())
      throw DomainError(std::string(what) + ": coefficients with different value shapes");
  }
}

template <class T, class F>
std::vector<DetKernel> zip(const T& a, const T& b, F f) {
  if (a.order() != b.order()) throw DomainError("chaos: truncation orders differ");
  std::vector<DetKernel> out;
  out.reserve(a.coeffs().size());
  for (std::size_t n = 0; n < a.coeffs().size(); ++n) out.push_back(f(a.coeffs()[n], b.coeffs()[n]));
  return out;
}

template <class T, class F>
std::vector<DetKernel> map(const T& a, F f) {
  std::vector<DetKernel> out;
  out.reserve(a.coeffs().size());
  for (const DetKernel& k : a.coeffs()) out.push_back(f(k));
  return out;
}

template <class T>
double coeff_sumsq(const T& a) {
  double s = 0;
  for (const DetKernel& k : a.coeffs()) {
    const double v = l2_norm(k);
    s += v * v;
  }
  return s;
}

template <class T>
double rel_dist(const T& a, const T& b) {
  const double na = std::sqrt(coeff_sumsq(a)), nb = std::sqrt(coeff_sumsq(b));
  const double scale = std::max(na, nb);
  if (scale == 0) return 0;
  double s = 0;
  for (std::size_t n = 0; n < a.coeffs().size(); ++n) {
    const double d = l2_distance(a.coeffs()[n], b.coeffs()[n]);
    s += d * d;
  }
  return std::sqrt(s) / scale;
}

DetKernel random_kernel(const Grid& g, int arity, int rows, int cols, std::mt19937_64& rng, double amp) {
  std::uniform_real_distribution<double> u(-amp, amp);
  if (g.layout() == Layout::train && arity >= 3) {
    if (rows != 1 || cols != 1) throw DomainError("train layout holds scalar kernels only");
    const int r = 2;
    PairTrain t = PairTrain::shaped(g.m(), std::vector<int>(arity, r));
    std::uniform_real_distribution<double> w(-1.0, 1.0);
    for (double& v : t.a) v = w(rng);
    for (double& v : t.b) v = u(rng);
    for (auto& c : t.core)
      for (double& v : c) v = w(rng);
    return DetKernel::from_train(g, std::move(t));
  }
  return DetKernel::tabulate(g, arity, rows, cols, [&](const int*, double* out) {
    for (int e = 0; e < rows * cols; ++e) out[e] = u(rng);
  });
}

}  // namespace

// ---------------------------------------------------------------- ChaosProcess

ChaosProcess::ChaosProcess(std::vector<DetKernel> coeffs) : c_(std::move(coeffs)) {
  check_coeffs(c_, 1, "chaos process");
  for (const DetKernel& k : c_)
    if (!k.all_finite()) throw DomainError("chaos process: non-finite coefficient");
}

ChaosProcess ChaosProcess::zero(const Grid& g, int order, int rows, int cols) {
  std::vector<DetKernel> c;
  for (int n = 0; n <= order; ++n) c.push_back(DetKernel::zero(g, n + 1, rows, cols));
  return ChaosProcess(std::move(c));
}

ChaosProcess ChaosProcess::deterministic(const DetKernel& f0, int order) {
  if (f0.arity() != 1) throw DomainError("deterministic process: order-0 coefficient must have arity 1");
  return zero(f0.grid(), order, f0.rows(), f0.cols()).with(0, f0);
}

ChaosProcess ChaosProcess::with(int n, DetKernel k) const {
  std::vector<DetKernel> c = c_;
  c.at(n) = std::move(k);
  return ChaosProcess(std::move(c));
}

double ChaosProcess::sumsq() const { return coeff_sumsq(*this); }
double ChaosProcess::norm() const { return std::sqrt(sumsq()); }

// ---------------------------------------------------------------- StarKernel

StarKernel::StarKernel(ChaosProcess base) : base_(std::move(base)) {
  if (base_.rows() != base_.cols()) throw DomainError("star kernel: values must be square");
  vn_.clear();
  kn_ = 0;
  for (const DetKernel& k : base_.coeffs()) {
    vn_.push_back(v_norm(k));
    kn_ += vn_.back();
  }
}

StarKernel StarKernel::zero(const Grid& g, int order, int d) { return StarKernel(ChaosProcess::zero(g, order, d, d)); }

StarKernel StarKernel::identity(const Grid& g, int order, int d) {
  return StarKernel(ChaosProcess::deterministic(DetKernel::identity(g, d), order));
}

// ---------------------------------------------------------------- AstKernel

AstKernel::AstKernel(std::vector<DetKernel> bcoeffs) : c_(std::move(bcoeffs)) {
  check_coeffs(c_, 2, "ast kernel");
  if (c_[0].rows() != c_[0].cols()) throw DomainError("ast kernel: values must be square");
  if (static_cast<int>(c_.size()) + 1 > kMaxArity) throw DomainError("ast kernel: order above cap");
  jn_ = 0;
  for (const DetKernel& k : c_) {
    if (!k.all_finite()) throw DomainError("ast kernel: non-finite coefficient");
    ln_.push_back(l2_op_norm(k));
    jn_ += ln_.back();
  }
}

AstKernel AstKernel::zero(const Grid& g, int order, int d) {
  std::vector<DetKernel> c;
  for (int n = 0; n <= order; ++n) c.push_back(DetKernel::zero(g, n + 2, d, d));
  return AstKernel(std::move(c));
}

bool AstKernel::is_zero() const {
  for (const DetKernel& k : c_)
    if (!k.is_zero()) return false;
  return true;
}

bool AstKernel::is_deterministic() const {
  for (std::size_t n = 1; n < c_.size(); ++n)
    if (!c_[n].is_zero()) return false;
  return true;
}

// ---------------------------------------------------------------- inner products and norms

double inner_product(const ChaosProcess& x, const ChaosProcess& y) {
  if (x.order() != y.order()) throw DomainError("inner product: orders differ");
  double s = 0;
  for (int n = 0; n <= x.order(); ++n) s += inner(x[n], y[n]);
  return s;
}

double k_norm(const StarKernel& k) { return k.k_norm(); }
double j_norm(const AstKernel& j) { return j.j_norm(); }

ChaosProcess martingale_shift(const ChaosProcess& x, int k, const std::vector<int>& prefix) {
  if (k < 0 || k > x.order()) throw DomainError("martingale shift: order outside [0, N]");
  if (static_cast<int>(prefix.size()) != k) throw DomainError("martingale shift: prefix length must equal k");
  if (k == 0) return x;
  std::vector<DetKernel> c;
  for (int n = 0; n + k <= x.order(); ++n) c.push_back(fix_prefix(x[n + k], prefix));
  return ChaosProcess(std::move(c));
}

const DetKernel& mean_coeff(const ChaosProcess& x) { return x[0]; }

double second_moment(const ChaosProcess& x, int cell) {
  if (cell < 0 || cell >= x.grid().m()) throw DomainError("second moment: cell out of range");
  double s = 0;
  for (const DetKernel& c : x.coeffs()) s += first_index_mass(c, cell);
  return s;
}

// ---------------------------------------------------------------- algebra

ChaosProcess add(const ChaosProcess& a, const ChaosProcess& b, double cb) {
  return ChaosProcess(zip(a, b, [cb](const DetKernel& x, const DetKernel& y) { return add(x, y, cb); }));
}
ChaosProcess scale(const ChaosProcess& a, double c) {
  return ChaosProcess(map(a, [c](const DetKernel& x) { return scale(x, c); }));
}
ChaosProcess operator+(const ChaosProcess& a, const ChaosProcess& b) { return add(a, b, 1.0); }
ChaosProcess operator-(const ChaosProcess& a, const ChaosProcess& b) { return add(a, b, -1.0); }

StarKernel add(const StarKernel& a, const StarKernel& b, double cb) {
  return StarKernel(zip(a, b, [cb](const DetKernel& x, const DetKernel& y) { return add(x, y, cb); }));
}
StarKernel scale(const StarKernel& a, double c) {
  return StarKernel(map(a, [c](const DetKernel& x) { return scale(x, c); }));
}
StarKernel operator+(const StarKernel& a, const StarKernel& b) { return add(a, b, 1.0); }
StarKernel operator-(const StarKernel& a, const StarKernel& b) { return add(a, b, -1.0); }

AstKernel add(const AstKernel& a, const AstKernel& b, double cb) {
  return AstKernel(zip(a, b, [cb](const DetKernel& x, const DetKernel& y) { return add(x, y, cb); }));
}
AstKernel scale(const AstKernel& a, double c) {
  return AstKernel(map(a, [c](const DetKernel& x) { return scale(x, c); }));
}
AstKernel operator+(const AstKernel& a, const AstKernel& b) { return add(a, b, 1.0); }
AstKernel operator-(const AstKernel& a, const AstKernel& b) { return add(a, b, -1.0); }

StarKernel transpose(const StarKernel& k) {
  return StarKernel(map(k, [](const DetKernel& x) { return transpose(x); }));
}
AstKernel transpose(const AstKernel& j) {
  return AstKernel(map(j, [](const DetKernel& x) { return transpose(x); }));
}

ChaosProcess compress(const ChaosProcess& x, double eps) {
  return ChaosProcess(map(x, [eps](const DetKernel& k) { return compress(k, eps); }));
}
StarKernel compress(const StarKernel& k, double eps) {
  return StarKernel(map(k, [eps](const DetKernel& c) { return compress(c, eps); }));
}
AstKernel compress(const AstKernel& j, double eps) {
  return AstKernel(map(j, [eps](const DetKernel& c) { return compress(c, eps); }));
}

double rel_distance(const ChaosProcess& a, const ChaosProcess& b) { return rel_dist(a, b); }
double rel_distance(const StarKernel& a, const StarKernel& b) { return rel_dist(a, b); }
double rel_distance(const AstKernel& a, const AstKernel& b) { return rel_dist(a, b); }
double l2_norm(const StarKernel& k) { return std::sqrt(coeff_sumsq(k)); }
double l2_norm(const AstKernel& j) { return std::sqrt(coeff_sumsq(j)); }

StarKernel restrict_cells(const StarKernel& k, int lo, int hi) {
  return StarKernel(map(k, [&](const DetKernel& c) { return restrict_cells(c, lo, hi); }));
}
StarKernel embed_cells(const StarKernel& k, const Grid& full, int lo) {
  return StarKernel(map(k, [&](const DetKernel& c) { return embed_cells(c, full, lo); }));
}
AstKernel restrict_cells(const AstKernel& j, int lo, int hi) {
  return AstKernel(map(j, [&](const DetKernel& c) { return restrict_cells(c, lo, hi); }));
}

// ---------------------------------------------------------------- random instances

ChaosProcess random_process(const Grid& g, int order, int rows, int cols, std::mt19937_64& rng, double amp) {
  std::vector<DetKernel> c;
  for (int n = 0; n <= order; ++n) c.push_back(random_kernel(g, n + 1, rows, cols, rng, amp * std::ldexp(1.0, -n)));
  return ChaosProcess(std::move(c));
}

StarKernel random_star(const Grid& g, int order, int d, std::mt19937_64& rng, double amp) {
  return StarKernel(random_process(g, order, d, d, rng, amp));
}

AstKernel random_ast(const Grid& g, int order, int d, std::mt19937_64& rng, double amp) {
  std::vector<DetKernel> c;
  for (int n = 0; n <= order; ++n) c.push_back(random_kernel(g, n + 2, d, d, rng, amp * std::ldexp(1.0, -n)));
  return AstKernel(std::move(c));
}

// ---------------------------------------------------------------- CSV

namespace {

void write_blocks(std::ostream& os, const std::vector<DetKernel>& c) {
  const int order = static_cast<int>(c.size()) - 1;
  for (int n = 0; n <= order; ++n) {
    os << "order,n\n" << n << ',' << order << '\n';
    write_csv(os, c[n]);
  }
}

std::vector<DetKernel> read_blocks(std::istream& is, const Grid& g) {
  std::vector<DetKernel> c;
  std::string line;
  int total = -1;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line != "order,n") throw DomainError("chaos CSV: expected an 'order,n' block header");
    if (!std::getline(is, line)) throw DomainError("chaos CSV: truncated block header");
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw DomainError("chaos CSV: bad block header row");
    const int n = std::stoi(line.substr(0, comma)), N = std::stoi(line.substr(comma + 1));
    if (n != static_cast<int>(c.size()) || (total >= 0 && N != total))
      throw DomainError("chaos CSV: blocks out of order");
    total = N;
    c.push_back(read_csv(is, g));
  }
  if (c.empty() || static_cast<int>(c.size()) != total + 1) throw DomainError("chaos CSV: missing blocks");
  return c;
}

}  // namespace

void write_csv(std::ostream& os, const ChaosProcess& x) { write_blocks(os, x.coeffs()); }
void write_csv(std::ostream& os, const StarKernel& k) { write_blocks(os, k.coeffs()); }
void write_csv(std::ostream& os, const AstKernel& j) { write_blocks(os, j.coeffs()); }

ChaosProcess read_chaos_csv(std::istream& is, const Grid& g) { return ChaosProcess(read_blocks(is, g)); }
StarKernel read_star_csv(std::istream& is, const Grid& g) { return StarKernel(read_blocks(is, g)); }
AstKernel read_ast_csv(std::istream& is, const Grid& g) { return AstKernel(read_blocks(is, g)); }

}  // namespace svk
