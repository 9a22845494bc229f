#include "svk/grid.hpp"

#include <cmath>
#include <mutex>

namespace svk {

const char* layout_name(Layout l) { return l == Layout::dense ? "dense" : "train"; }

Layout parse_layout(const std::string& s) {
  if (s == "dense") return Layout::dense;
  if (s == "train") return Layout::train;
  throw DomainError("unknown layout '" + s + "' (expected dense|train)");
}

Grid::Grid(double s, double t, int m, Layout layout) : s_(s), t_(t), m_(m), layout_(layout) {
  if (!(t > s)) throw DomainError("grid: need t > s");
  if (m < 1) throw DomainError("grid: need m >= 1");
  if (m >= kMaxCells) throw DomainError("grid: too many cells");
  h_ = (t - s) / m;
}

std::vector<double> Grid::midpoints() const {
  std::vector<double> v(m_);
  for (int i = 0; i < m_; ++i) v[i] = mid(i);
  return v;
}

int Grid::node_index(double u) const {
  double x = (u - s_) / h_;
  long k = std::lround(x);
  if (k < 0 || k > m_ || std::abs(x - k) > 1e-9 * std::max(1.0, std::abs(x)))
    throw DomainError("time " + std::to_string(u) + " is not a grid node");
  return static_cast<int>(k);
}

Grid Grid::sub(int lo, int hi) const {
  if (lo < 0 || hi > m_ || lo >= hi) throw DomainError("sub-grid: bad cell range");
  Grid g;
  g.s_ = node(lo);
  g.t_ = node(hi);
  g.m_ = hi - lo;
  g.h_ = h_;
  g.layout_ = layout_;
  return g;
}

bool Grid::operator==(const Grid& o) const {
  return m_ == o.m_ && layout_ == o.layout_ && std::abs(s_ - o.s_) <= 1e-12 * (1 + std::abs(s_)) &&
         std::abs(t_ - o.t_) <= 1e-12 * (1 + std::abs(t_));
}

Grid build_grid(double s, double t, int m, Layout layout) { return Grid(s, t, m, layout); }

namespace {
constexpr int kK = kMaxArity + 2;

const std::vector<std::uint64_t>& binom_table() {
  static std::vector<std::uint64_t> tab;
  static std::once_flag once;
  std::call_once(once, [] {
    tab.assign(static_cast<std::size_t>(kMaxCells + 1) * kK, 0);
    for (int n = 0; n <= kMaxCells; ++n) {
      std::uint64_t* row = &tab[static_cast<std::size_t>(n) * kK];
      row[0] = 1;
      if (n == 0) continue;
      const std::uint64_t* prev = &tab[static_cast<std::size_t>(n - 1) * kK];
      // saturate instead of wrapping; only small counts are ever stored densely
      for (int k = 1; k < kK; ++k) {
        std::uint64_t a = prev[k - 1], b = prev[k];
        row[k] = (a > UINT64_MAX - b) ? UINT64_MAX : a + b;
      }
    }
  });
  return tab;
}
}  // namespace

std::uint64_t choose(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  if (k >= kK || n > kMaxCells) throw RangeError("choose: argument outside table");
  static const std::uint64_t* tab = binom_table().data();
  return tab[static_cast<std::size_t>(n) * kK + k];
}

std::uint64_t simplex_count(int m, int arity) { return choose(m, arity); }
std::uint64_t simplex_count(const Grid& g, int arity) { return choose(g.m(), arity); }

std::uint64_t simplex_rank(const std::vector<int>& idx) {
  for (std::size_t j = 1; j < idx.size(); ++j)
    if (idx[j] >= idx[j - 1] || idx[j] < 0) throw DomainError("tuple not strictly decreasing");
  return simplex_rank(idx.data(), static_cast<int>(idx.size()));
}

std::vector<int> simplex_unrank(std::uint64_t rank, int arity) {
  std::vector<int> idx(arity);
  for (int j = 0; j < arity; ++j) {
    int k = arity - j;
    int c = k - 1;
    while (choose(c + 1, k) <= rank) ++c;
    idx[j] = c;
    rank -= choose(c, k);
  }
  return idx;
}

SimplexWalker::SimplexWalker(int m, int arity) : m_(m), a_(arity), valid_(arity <= m), idx_(arity) {
  for (int j = 0; j < a_; ++j) idx_[j] = a_ - 1 - j;
}

void SimplexWalker::next() {
  ++rank_;
  // idx_ read right-to-left is increasing; bump the lowest position that can move.
  for (int j = a_ - 1; j >= 0; --j) {
    int cap = (j == 0) ? m_ : idx_[j - 1];
    if (idx_[j] + 1 < cap) {
      ++idx_[j];
      for (int q = j + 1; q < a_; ++q) idx_[q] = a_ - 1 - q;
      return;
    }
  }
  valid_ = false;
}

double integrate_simplex(const std::vector<double>& values, int arity, const Grid& g) {
  if (values.size() != simplex_count(g, arity))
    throw DomainError("integrate_simplex: value count does not match simplex size");
  if (arity == 0) return values.empty() ? 0.0 : values[0];
  double s = 0;
  for (double v : values) s += v;
  return std::pow(g.h(), arity) * s;
}

}  // namespace svk
