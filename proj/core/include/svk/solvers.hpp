#pragma once

#include <functional>
#include <random>
#include <string>

#include "svk/resolvents.hpp"

namespace svk {

enum class SystemKind { fractional_bs, noisy_memory, custom };
const char* system_kind_name(SystemKind k);

// X = φ + J ∗ X + K ⋆ X  and its backward counterpart
// Y = ψ + J^T ⊛* Y + K^T ⊛ Y, with both kernels on one grid, dimension and order.
struct LinearSystem {
  AstKernel j;
  StarKernel k;
  SystemKind kind = SystemKind::custom;

  LinearSystem() = default;
  LinearSystem(AstKernel j_, StarKernel k_, SystemKind kind_ = SystemKind::custom);
  const Grid& grid() const { return j.grid(); }
  int order() const { return j.order(); }
  int d() const { return j.d(); }
};

// (∗,⋆)-resolvent of the system, cross-checked between both constructions
AstStarResolvent resolve_system(const LinearSystem& sys, double tol = 1e-10);

ChaosProcess solve_svie(const LinearSystem& sys, const ChaosProcess& phi, double tol = 1e-10);
ChaosProcess solve_svie(const AstStarResolvent& res, const ChaosProcess& phi);
// ‖x − φ − J∗x − K⋆x‖ / max(‖x‖, ‖φ‖)
double svie_residual(const LinearSystem& sys, const ChaosProcess& phi, const ChaosProcess& x);

ChaosProcess solve_bsvie(const LinearSystem& sys, const ChaosProcess& psi, double tol = 1e-10);
ChaosProcess solve_bsvie(const AstStarResolvent& res, const ChaosProcess& psi);
// ‖y − ψ − J^T⊛*y − K^T⊛y‖ / max(‖y‖, ‖ψ‖)
double bsvie_residual(const LinearSystem& sys, const ChaosProcess& psi, const ChaosProcess& y);

// |<X, ψ> − <φ, Y>| / (1 + |<X, ψ>|)
double duality_gap(const LinearSystem& sys, const ChaosProcess& phi, const ChaosProcess& psi, double tol = 1e-10);
double duality_gap(const AstStarResolvent& res, const ChaosProcess& phi, const ChaosProcess& psi);

// Z(s, ·) of the adapted solution pair: the martingale representation integrand of y
// with its leading time fixed at cell s, i.e. F_n[Z(s, ·)] = F_{n+1}[y](s, ·)
ChaosProcess z_component(const ChaosProcess& y, int s_cell);

struct BuiltSystem {
  LinearSystem sys;
  ChaosProcess phi;
};

// j = μ(t−s)^{α−1}/Γ(α), K = W_1[σ(t−s)^{α−1}/Γ(α)], φ ≡ x0; requires 1/2 < α <= 1
BuiltSystem build_fractional_bs(double alpha, double mu, double sigma, double x0, const Grid& g, int order);

// Fractional SDE with delay and noisy memory, scalar coefficients:
//   J:  bF_0 = frac·j(s) + int_s^t frac(t, r) l1(r, s) dr,  bF_1 = frac(t, t1) l1(t1, s)
//   K:  F_1 = frac·k(t1) + int_{t1}^t frac(t, s) l2(s, t1) ds,  F_2 = frac(t, t1) l2(t1, t2)
//   φ = x0 + frac ∗ b + W_1[frac] ⋆ σ
// with frac(t, s) = (t−s)^{α−1}/Γ(α) cell-averaged and inner integrals by the strict midpoint rule.
struct NoisyMemoryCoefficients {
  std::function<double(double)> j, k;
  std::function<double(double, double)> l1, l2;  // l(later time, earlier time)
  ChaosProcess b, sigma;                             // adapted drift and volatility terms
  double x0 = 1.0;
  double alpha = 1.0;
};
BuiltSystem build_noisy_memory(const NoisyMemoryCoefficients& c, const Grid& g, int order);

// random system in the generalized class: J arbitrary, K = sum_{n>=1} W_n[k_n]
LinearSystem random_system(const Grid& g, int order, int d, std::mt19937_64& rng, double amp_j = 1.0,
                           double amp_k = 0.5);

}  // namespace svk
