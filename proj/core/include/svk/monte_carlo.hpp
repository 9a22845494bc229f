#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "svk/chaos.hpp"

namespace svk {

// Largest chaos order evaluated pathwise.
constexpr int kMaxMcOrder = 4;

// P Brownian paths on the grid's interval, `refine` steps per cell.  Path p is
// driven by its own mt19937_64 seeded from (seed, p), so any block of paths
// can be regenerated independently and results never depend on scheduling.
// Increments are regenerated on demand instead of being held for all paths.
class PathBatch {
 public:
  PathBatch() = default;
  PathBatch(const Grid& g, int refine, long paths, std::uint64_t seed);

  const Grid& grid() const { return grid_; }
  int refine() const { return refine_; }
  int steps() const { return grid_.m() * refine_; }
  long paths() const { return paths_; }
  std::uint64_t seed() const { return seed_; }
  double step_h() const { return grid_.h() / refine_; }

  // steps() √h-scaled normals of path p
  void step_increments(long p, double* out) const;
  // sums of the step increments over each cell (m values)
  void cell_increments(long p, double* out) const;
  // full paths x steps table, row-major
  std::vector<double> increments() const;

 private:
  Grid grid_;
  int refine_ = 1;
  long paths_ = 0;
  std::uint64_t seed_ = 0;
};

PathBatch simulate_paths(const Grid& g, int refine, long p, std::uint64_t seed);

// Empirical per-step moments against the law N(0, h).
struct IncrementStats {
  double max_mean_ratio = 0;  // max |mean| / (√h / √P)
  double max_var_dev = 0;     // max |var/h − 1|
  bool pass = false;          // ratio <= 5 and deviation <= 0.1
};
IncrementStats increment_stats(const PathBatch& batch);

// Samples of the n-fold iterated Itô integral of f (arity n+1) at cell t_cell:
//   sum over t_cell > i1 > ... > in of f(t_cell, i1..in) ΔW_{i1} ... ΔW_{in}
// with cell increments.  Scalar kernels, n <= 4.
std::vector<double> eval_iterated(const DetKernel& f, const PathBatch& batch, int t_cell);
// sum over orders of eval_iterated(F_n[x]); scalar processes, N <= 4
std::vector<double> reconstruct(const ChaosProcess& x, const PathBatch& batch, int t_cell);

// Scalar SVIE on the step grid t_i = s + i h of a batch, with noisy-memory terms:
//   X_i = φ_i + sum_{l<i} [ j(i,l) X_l h + k(i,l) X_l ΔW_l ]
//             + sum_{l<i} w(i,l) [ (b_l + M_l) h + (σ_l + M_l) ΔW_l ],
//   M_l = M1_l + M2_l (delay plus noisy memory, entering both brackets),
//   M1_l = sum_{r<l} l1(l,r) X_r h,   M2_l = sum_{r<l} l2(l,r) X_r ΔW_r.
// Empty functions are zero (φ, w default to 0 and b, σ, l1, l2 are skipped).
struct EulerSystem {
  std::function<double(int)> phi;
  std::function<double(int, int)> j, k;
  std::function<double(int, int)> w;
  std::function<double(int)> b, sigma;
  std::function<double(int, int)> l1, l2;
};

// step-averaged fractional weight (1/h) int_{t_l}^{t_{l+1}} (t_i − s)^{α−1} ds / Γ(α)
double fractional_step_weight(double alpha, double h, int lag);

EulerSystem euler_fractional_bs(double alpha, double mu, double sigma, double x0, double h);
struct NoisyMemoryCoefficients;
EulerSystem euler_noisy_memory(const NoisyMemoryCoefficients& c, double s, double h);

// X at step `end_step` (default: the last node, time T) for every path
std::vector<double> euler_svie(const EulerSystem& sys, const PathBatch& batch, int end_step = -1);

// Paired comparison of a and b (same paths): passes iff
// |mean(a − b)| <= 3 stderr + rel_allow |mean(b)|.
struct MomentRow {
  std::string quantity;
  double chaos_value = 0, mc_value = 0, diff = 0, stderr_ = 0;
  bool pass = false;
};
struct MomentComparison {
  MomentRow mean, second;
  bool pass() const { return mean.pass && second.pass; }
};
MomentRow compare_samples(const std::string& quantity, const std::vector<double>& a, const std::vector<double>& b,
                          double rel_allow);
MomentComparison compare_moments(const std::vector<double>& a, const std::vector<double>& b, double rel_allow = 0.02,
                                 const std::string& tag = "");

void write_moment_header(std::ostream& os);  // quantity,chaos_value,mc_value,stderr,pass
void write_moment_row(std::ostream& os, const MomentRow& r);

}  // namespace svk
