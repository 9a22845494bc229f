#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

#include "svk/grid.hpp"
#include "svk/linalg.hpp"
#include "svk/train.hpp"

namespace svk {

// Deterministic Volterra kernel tabulated on the discrete simplex of a given
// arity, with rows x cols matrix values.  Storage follows the grid layout:
// dense grids keep one row-major matrix per colex-ranked tuple; train grids
// keep a scalar pair-train.  An explicit zero state avoids allocating
// coefficients that vanish structurally.
class DetKernel {
 public:
  enum class Kind { zero, dense, train };

  DetKernel() = default;
  static DetKernel zero(const Grid& g, int arity, int rows = 1, int cols = 1);
  static DetKernel from_values(const Grid& g, int arity, int rows, int cols, std::vector<double> values);
  static DetKernel from_train(const Grid& g, PairTrain t);
  // f(idx, out) writes rows*cols row-major entries for tuple idx
  static DetKernel tabulate(const Grid& g, int arity, int rows, int cols,
                            const std::function<void(const int*, double*)>& f);
  static DetKernel constant(const Grid& g, int arity, const Matrix& c);
  static DetKernel constant(const Grid& g, int arity, double c) { return constant(g, arity, Matrix::Constant(1, 1, c)); }
  static DetKernel identity(const Grid& g, int d);  // arity 1, I_d

  Kind kind() const { return kind_; }
  bool is_zero() const { return kind_ == Kind::zero; }
  const Grid& grid() const { return grid_; }
  int arity() const { return arity_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::uint64_t count() const { return simplex_count(grid_, arity_); }

  const std::vector<double>& dense_data() const;
  const PairTrain& train() const;

  Matrix at(const std::vector<int>& idx) const;
  double at(const std::vector<int>& idx, int r, int c) const;
  // all entries in colex order (row-major blocks); zero kernels are expanded
  std::vector<double> values() const;
  bool all_finite() const;

 private:
  Grid grid_;
  int arity_ = 1, rows_ = 1, cols_ = 1;
  Kind kind_ = Kind::zero;
  std::shared_ptr<const std::vector<double>> dense_;
  std::shared_ptr<const PairTrain> train_;
};

// Largest number of matrix entries a dense kernel may hold.
constexpr std::uint64_t kDenseEntryLimit = 200'000'000ULL;

bool same_shape(const DetKernel& a, const DetKernel& b);

DetKernel add(const DetKernel& a, const DetKernel& b, double cb = 1.0);
DetKernel scale(const DetKernel& a, double c);
DetKernel transpose(const DetKernel& a);
DetKernel operator+(const DetKernel& a, const DetKernel& b);
DetKernel operator-(const DetKernel& a, const DetKernel& b);
DetKernel operator*(double c, const DetKernel& a);

// (f ▷ g)(t0..t_{a+b-2}) = f(t0..t_{a-1}) g(t_{a-1}..t_{a+b-2})
DetKernel tri_product(const DetKernel& f, const DetKernel& g);
// elementary ∗: contracts the trailing time of f against the leading time of g
// over indices strictly between the neighbouring ones (lower end S when g has arity 1)
DetKernel ast_contract(const DetKernel& f, const DetKernel& g);
// sum over s in Δ_q(t0, T) of k(s, t0) x(s, t0, t); k arity q+1, x arity n+q+1
DetKernel bstar_term(const DetKernel& k, const DetKernel& x);
// sum over s in Δ_{q+1}(t0, T) of j(s, t0) x(s, t); j arity q+2, x arity q+1+n
DetKernel bast_term(const DetKernel& j, const DetKernel& x);

DetKernel restrict_cells(const DetKernel& k, int lo, int hi);
DetKernel embed_cells(const DetKernel& k, const Grid& full, int lo);
// multiply by exp(-sigma (mid(t0) - mid(t_last)))
DetKernel sigma_scale(const DetKernel& k, double sigma);
// keep only tuples whose leading index equals i0
DetKernel mask_first(const DetKernel& k, int i0);
// k'(t0..) = k(prefix, t0..) on the sub-grid of cells below the last prefix index
DetKernel fix_prefix(const DetKernel& k, const std::vector<int>& prefix);
// recompress train storage; dense kernels are returned unchanged
DetKernel compress(const DetKernel& k, double eps = 1e-14);
DetKernel to_layout(const DetKernel& k, const Grid& g);

double v_norm(const DetKernel& k);
double l2_norm(const DetKernel& k);
// (h^a sum |k|_op^2)^{1/2}
double l2_op_norm(const DetKernel& k);
double inner(const DetKernel& a, const DetKernel& b);
double l2_distance(const DetKernel& a, const DetKernel& b);
// h^{a-1} * sum of |k|_F^2 over tuples with leading index i0
double first_index_mass(const DetKernel& k, int i0);

// cell average in t over cell i0 of (t - s)^{alpha-1}/Gamma(alpha) at s = mid(i1)
double fractional_cell_average(double alpha, double h, int lag);
DetKernel tabulate_fractional(double alpha, const Matrix& scale, const Grid& g);
DetKernel tabulate_fractional(double alpha, double scale, const Grid& g);

void write_csv(std::ostream& os, const DetKernel& k);
DetKernel read_csv(std::istream& is, const Grid& g);

}  // namespace svk
