#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace svk {

struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct RangeError : std::range_error {
  using std::range_error::range_error;
};

// Raised when an iterative construction does not reach its tolerance, or a
// sufficient condition for existence cannot be established.
struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// How kernels living on a grid store their values.
//   dense: one matrix per strictly decreasing cell tuple (colex order).
//   train: scalar pair-train  a(i0)^T G1(i0,i1) ... Gn(i_{n-1},i_n) b(i_n);
//          d = 1 only, memory O(n m^2 r^2) instead of O(C(m,n+1)).
enum class Layout { dense, train };

const char* layout_name(Layout l);
Layout parse_layout(const std::string& s);

constexpr int kMaxOrder = 7;  // chaos truncation cap N
constexpr int kMaxArity = kMaxOrder + 2;
constexpr int kMaxCells = 1 << 14;

class Grid {
 public:
  Grid() = default;
  Grid(double s, double t, int m, Layout layout = Layout::dense);

  double s() const { return s_; }
  double t() const { return t_; }
  int m() const { return m_; }
  double h() const { return h_; }
  Layout layout() const { return layout_; }
  double mid(int i) const { return s_ + (i + 0.5) * h_; }
  double node(int i) const { return i == m_ ? t_ : s_ + i * h_; }
  std::vector<double> midpoints() const;

  // node index of time u; throws DomainError if u is not a grid node
  int node_index(double u) const;
  // grid made of cells [lo, hi), with the same cell width and layout
  Grid sub(int lo, int hi) const;
  Grid with_layout(Layout l) const { return Grid(s_, t_, m_, l); }

  bool operator==(const Grid& o) const;
  bool operator!=(const Grid& o) const { return !(*this == o); }

 private:
  double s_ = 0, t_ = 1, h_ = 1;
  int m_ = 1;
  Layout layout_ = Layout::dense;
};

Grid build_grid(double s, double t, int m, Layout layout = Layout::dense);

// Binomial coefficient C(n, k) for 0 <= k <= kMaxArity + 1, n < kMaxCells.
std::uint64_t choose(int n, int k);

// Number of strictly decreasing tuples of the given arity (C(m, arity)).
std::uint64_t simplex_count(const Grid& g, int arity);
std::uint64_t simplex_count(int m, int arity);

// Colex rank of a strictly decreasing tuple i0 > i1 > ... > i_{a-1}:
//   sum_j C(i_j, a - j).  Independent of m, so sub-grid tuples keep their rank.
inline std::uint64_t simplex_rank(const int* idx, int a) {
  std::uint64_t r = 0;
  for (int j = 0; j < a; ++j) r += choose(idx[j], a - j);
  return r;
}
std::uint64_t simplex_rank(const std::vector<int>& idx);
std::vector<int> simplex_unrank(std::uint64_t rank, int arity);

// Walks all strictly decreasing tuples of a given arity over m cells in rank
// order.  idx[0] is the largest index.
class SimplexWalker {
 public:
  SimplexWalker(int m, int arity);
  bool valid() const { return valid_; }
  const int* idx() const { return idx_.data(); }
  int operator[](int j) const { return idx_[j]; }
  std::uint64_t rank() const { return rank_; }
  void next();

 private:
  int m_, a_;
  bool valid_;
  std::uint64_t rank_ = 0;
  std::vector<int> idx_;
};

// h^n * sum of values over the n-simplex (n = arity); n = 0 returns values[0].
double integrate_simplex(const std::vector<double>& values, int arity, const Grid& g);

}  // namespace svk
