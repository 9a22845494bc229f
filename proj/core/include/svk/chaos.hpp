#pragma once

#include <iosfwd>
#include <random>
#include <vector>

#include "svk/det_kernel.hpp"

namespace svk {

// Adapted L2 process truncated at chaos order N: coefficient n is a kernel of
// arity n + 1 on the shared grid.
class ChaosProcess {
 public:
  ChaosProcess() = default;
  explicit ChaosProcess(std::vector<DetKernel> coeffs);
  static ChaosProcess zero(const Grid& g, int order, int rows, int cols = 1);
  static ChaosProcess deterministic(const DetKernel& f0, int order);

  const Grid& grid() const { return c_.front().grid(); }
  int order() const { return static_cast<int>(c_.size()) - 1; }
  int rows() const { return c_.front().rows(); }
  int cols() const { return c_.front().cols(); }
  const DetKernel& operator[](int n) const { return c_.at(n); }
  const std::vector<DetKernel>& coeffs() const { return c_; }
  ChaosProcess with(int n, DetKernel k) const;

  double sumsq() const;  // sum of squared L2 norms of the coefficients
  double norm() const;

 private:
  std::vector<DetKernel> c_;
};

// ⋆-Volterra kernel: square-valued chaos process with cached 𝒱-norms.
class StarKernel {
 public:
  StarKernel() = default;
  explicit StarKernel(ChaosProcess base);
  explicit StarKernel(std::vector<DetKernel> coeffs) : StarKernel(ChaosProcess(std::move(coeffs))) {}
  static StarKernel zero(const Grid& g, int order, int d);
  static StarKernel identity(const Grid& g, int order, int d);

  const ChaosProcess& base() const { return base_; }
  const Grid& grid() const { return base_.grid(); }
  int order() const { return base_.order(); }
  int d() const { return base_.rows(); }
  const DetKernel& operator[](int n) const { return base_[n]; }
  const std::vector<DetKernel>& coeffs() const { return base_.coeffs(); }
  const std::vector<double>& v_norms() const { return vn_; }
  double k_norm() const { return kn_; }

 private:
  ChaosProcess base_;
  std::vector<double> vn_;
  double kn_ = 0;
};

// ∗-Volterra kernel: two-time chaos coefficients, coefficient n of arity n + 2.
class AstKernel {
 public:
  AstKernel() = default;
  explicit AstKernel(std::vector<DetKernel> bcoeffs);
  static AstKernel zero(const Grid& g, int order, int d);

  const Grid& grid() const { return c_.front().grid(); }
  int order() const { return static_cast<int>(c_.size()) - 1; }
  int d() const { return c_.front().rows(); }
  const DetKernel& operator[](int n) const { return c_.at(n); }
  const std::vector<DetKernel>& coeffs() const { return c_; }
  const std::vector<double>& l2_norms() const { return ln_; }
  double j_norm() const { return jn_; }
  bool is_zero() const;
  bool is_deterministic() const;

 private:
  std::vector<DetKernel> c_;
  std::vector<double> ln_;
  double jn_ = 0;
};

double inner_product(const ChaosProcess& x, const ChaosProcess& y);
double k_norm(const StarKernel& k);
double j_norm(const AstKernel& j);

// coefficient n of the result: F_{n+k}[x](prefix, t0, ..., tn), on the cells below the prefix
ChaosProcess martingale_shift(const ChaosProcess& x, int k, const std::vector<int>& prefix);
const DetKernel& mean_coeff(const ChaosProcess& x);
// E|x(t)|_F^2 at the midpoint of a cell, by the Itô isometry over the stored orders
double second_moment(const ChaosProcess& x, int cell);

// coefficientwise algebra
ChaosProcess add(const ChaosProcess& a, const ChaosProcess& b, double cb = 1.0);
ChaosProcess scale(const ChaosProcess& a, double c);
ChaosProcess operator+(const ChaosProcess& a, const ChaosProcess& b);
ChaosProcess operator-(const ChaosProcess& a, const ChaosProcess& b);
StarKernel add(const StarKernel& a, const StarKernel& b, double cb = 1.0);
StarKernel scale(const StarKernel& a, double c);
StarKernel operator+(const StarKernel& a, const StarKernel& b);
StarKernel operator-(const StarKernel& a, const StarKernel& b);
AstKernel add(const AstKernel& a, const AstKernel& b, double cb = 1.0);
AstKernel scale(const AstKernel& a, double c);
AstKernel operator+(const AstKernel& a, const AstKernel& b);
AstKernel operator-(const AstKernel& a, const AstKernel& b);

StarKernel transpose(const StarKernel& k);
AstKernel transpose(const AstKernel& j);
ChaosProcess compress(const ChaosProcess& x, double eps = 1e-14);
StarKernel compress(const StarKernel& k, double eps = 1e-14);
AstKernel compress(const AstKernel& j, double eps = 1e-14);

// L2 (sum over orders) distances, relative to the larger operand
double rel_distance(const ChaosProcess& a, const ChaosProcess& b);
double rel_distance(const StarKernel& a, const StarKernel& b);
double rel_distance(const AstKernel& a, const AstKernel& b);
double l2_norm(const StarKernel& k);
double l2_norm(const AstKernel& j);

// restrictions to the cells [lo, hi) and zero extension back
StarKernel restrict_cells(const StarKernel& k, int lo, int hi);
StarKernel embed_cells(const StarKernel& k, const Grid& full, int lo);
AstKernel restrict_cells(const AstKernel& j, int lo, int hi);

// random instances with coefficient magnitude decaying like 2^{-n}; amp scales all orders.
// Train grids get bond-2 random trains for arity >= 3.
ChaosProcess random_process(const Grid& g, int order, int rows, int cols, std::mt19937_64& rng, double amp = 1.0);
StarKernel random_star(const Grid& g, int order, int d, std::mt19937_64& rng, double amp = 1.0);
AstKernel random_ast(const Grid& g, int order, int d, std::mt19937_64& rng, double amp = 1.0);

void write_csv(std::ostream& os, const ChaosProcess& x);
ChaosProcess read_chaos_csv(std::istream& is, const Grid& g);
// kernels use the same block layout (coefficient n of arity n+1, resp. n+2)
void write_csv(std::ostream& os, const StarKernel& k);
void write_csv(std::ostream& os, const AstKernel& j);
StarKernel read_star_csv(std::istream& is, const Grid& g);
AstKernel read_ast_csv(std::istream& is, const Grid& g);

}  // namespace svk
