#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace svk {

// Scalar function on strictly decreasing cell tuples (i0 > ... > in) written as
//   v(i0..in) = a(i0)^T G1(i0,i1) G2(i1,i2) ... Gn(i_{n-1},in) b(in)
// with bond dimensions r[0..n].  Core k is stored for pairs i > j only
// (pair index i(i-1)/2 + j), each block row-major r[k-1] x r[k].
// Arity 1 (n = 0) means v(i) = a(i) . b(i).
struct PairTrain {
  int m = 0;
  int n = 0;  // number of cores = arity - 1
  std::vector<int> r;
  std::vector<double> a;                  // m x r[0]
  std::vector<std::vector<double>> core;  // core[k-1], k = 1..n
  std::vector<double> b;                  // m x r[n]

  int arity() const { return n + 1; }
  static std::size_t pairs(int m) { return static_cast<std::size_t>(m) * (m - 1) / 2; }
  static std::size_t pidx(int i, int j) { return static_cast<std::size_t>(i) * (i - 1) / 2 + j; }

  double* blk(int k, int i, int j) { return core[k - 1].data() + pidx(i, j) * r[k - 1] * r[k]; }
  const double* blk(int k, int i, int j) const {
    return core[k - 1].data() + pidx(i, j) * r[k - 1] * r[k];
  }
  double* av(int i) { return a.data() + static_cast<std::size_t>(i) * r[0]; }
  const double* av(int i) const { return a.data() + static_cast<std::size_t>(i) * r[0]; }
  double* bv(int i) { return b.data() + static_cast<std::size_t>(i) * r[n]; }
  const double* bv(int i) const { return b.data() + static_cast<std::size_t>(i) * r[n]; }

  // zero-initialised train with the given bonds
  static PairTrain shaped(int m, const std::vector<int>& bonds);
  static PairTrain zero(int m, int arity);
  static PairTrain from_values1(int m, const std::vector<double>& v);          // arity 1
  static PairTrain from_pair_values(int m, const std::vector<double>& v);      // arity 2, colex order
  static PairTrain from_pair_function(int m, const std::function<double(int, int)>& f);

  double eval(const int* idx) const;
  std::vector<double> materialize() const;  // colex order
  std::size_t storage() const;
  int max_bond() const;
};

PairTrain train_add(const PairTrain& x, const PairTrain& y, double cy = 1.0);
PairTrain train_scale(const PairTrain& x, double c);
PairTrain train_tri(const PairTrain& f, const PairTrain& g);
PairTrain train_ast(const PairTrain& f, const PairTrain& g, double h);
PairTrain train_bstar(const PairTrain& k, const PairTrain& x, double h);
PairTrain train_bast(const PairTrain& j, const PairTrain& x, double h);
PairTrain train_restrict(const PairTrain& x, int lo, int hi);
PairTrain train_embed(const PairTrain& x, int m_full, int lo);
PairTrain train_sigma_scale(const PairTrain& x, const std::vector<double>& mid, double sigma);
PairTrain train_mask_first(const PairTrain& x, int i0);
// v'(t0..) = v(prefix, t0..) on the cells below the last prefix index
PairTrain train_fix_prefix(const PairTrain& x, const std::vector<int>& prefix);

// Orthogonalise and truncate singular values below eps * ||x|| (relative).
PairTrain train_round(const PairTrain& x, double eps = 1e-14);

// Sums of squares.  sumsq = sum over tuples of v^2;
// last_sumsq[i] = sum over tuples with last index i.
double train_sumsq(const PairTrain& x);
std::vector<double> train_last_sumsq(const PairTrain& x);
double train_dot(const PairTrain& x, const PairTrain& y);

}  // namespace svk
