#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "svk/chaos.hpp"

namespace svk {

// Two constructions of a resolvent that should coincide did not.
struct ConsistencyError : std::logic_error {
  using std::logic_error::logic_error;
};

struct ResolventReport {
  bool converged = false;
  int iterations = 0;
  double residual_star = 0;  // relative defect of the ⋆ equations (max over both sides)
  double residual_ast = 0;   // relative defect of the ∗ equations
  double sigma = 0;          // exponential scaling used for ∗ (0 if none)
  std::vector<double> partition;
  std::string note;
};

void write_report_header(std::ostream& os);
void write_report_row(std::ostream& os, const ResolventReport& r);

struct StarResolvent {
  StarKernel r;
  ResolventReport report;
};
struct AstResolvent {
  AstKernel q;
  ResolventReport report;
};
struct AstStarResolvent {
  AstKernel q;
  StarKernel r;
  ResolventReport report;
  double disagreement = 0;  // relative distance between constructions (i) and (ii)
};

// relative defects of R = K + K⋆R and R = K + R⋆K (max of the two)
double star_residual(const StarKernel& k, const StarKernel& r);
// relative defects of Q = J + J∗Q and Q = J + Q∗J
double ast_residual(const AstKernel& j, const AstKernel& q);
// the four (∗,⋆) equations; returns {max over the Q equations, max over the R equations}
std::pair<double, double> aststar_residuals(const AstKernel& j, const StarKernel& k, const AstKernel& q,
                                            const StarKernel& r);

constexpr int kMaxNeumannTerms = 64;

// R = sum_{n>=1} K^{⋆n}; requires k_norm(K) < 1
StarResolvent neumann_star(const StarKernel& k, double tol = 1e-10, int max_terms = kMaxNeumannTerms);
// F_0 = 0, F_n = k2^{▷n}: the resolvent of W_1[k2]
StarKernel gaussian_star(const DetKernel& k2, int order);
// restriction to the sub-grid between nodes u < v
StarKernel restrict_star(const StarKernel& k, double u, double v);
// concatenation over a node-aligned partition S = u0 < ... < uP = T, merged as a binary tree;
// pieces with k_norm >= 1 are partitioned further by auto_partition
StarResolvent concat_star(const StarKernel& k, const std::vector<double>& partition, double tol = 1e-10);
// greedy left-to-right partition with restricted k_norm <= target on every piece;
// throws ConvergenceError if a single cell exceeds the target
std::vector<double> auto_partition(const StarKernel& k, double target = 0.5);
// neumann_star when k_norm < 1, else auto_partition + concat_star
StarResolvent star_resolvent(const StarKernel& k, double tol = 1e-10);

// doubles sigma from 1 until j_norm(J_sigma) <= 1/2, then sums the Neumann series
AstResolvent ast_resolvent(const AstKernel& j, double tol = 1e-10, int max_terms = kMaxNeumannTerms);

// construction (i): Q1 = ∗-resolvent of J, R1 = ⋆-resolvent of K + Q1∗K, Q = Q1 + R1⋆Q1, R = R1
AstStarResolvent aststar_construction_i(const AstKernel& j, const StarKernel& k, double tol = 1e-10);
// construction (ii): R2 = ⋆-resolvent of K, Q2 = ∗-resolvent of J + R2⋆J, Q = Q2, R = R2 + Q2∗R2
AstStarResolvent aststar_construction_ii(const AstKernel& j, const StarKernel& k, double tol = 1e-10);
// (i), cross-checked against (ii); throws ConsistencyError beyond 10 tol
AstStarResolvent aststar_resolvent(const AstKernel& j, const StarKernel& k, double tol = 1e-10);

}  // namespace svk
