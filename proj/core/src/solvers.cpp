#include "svk/solvers.hpp"

#include <algorithm>
#include <cmath>

#include "svk/products.hpp"

namespace svk {

namespace {

double rel_defect(const ChaosProcess& defect, const ChaosProcess& a, const ChaosProcess& b) {
  const double s = std::max(a.norm(), b.norm());
  const double d = defect.norm();
  return s > 0 ? d / s : d;
}

void check_free_term(const LinearSystem& sys, const ChaosProcess& x, const char* what) {
  if (x.grid() != sys.grid() || x.order() != sys.order() || x.rows() != sys.d())
    throw DomainError(std::string(what) + ": free term does not match the system's grid, order or dimension");
}

std::vector<DetKernel> zeros_from(const Grid& g, int order, int first_arity, int n0 = 0) {
  std::vector<DetKernel> c;
  for (int n = n0; n <= order; ++n) c.push_back(DetKernel::zero(g, n + first_arity));
  return c;
}

DetKernel tab1(const Grid& g, const std::function<double(double)>& f) {
  if (!f) return DetKernel::zero(g, 1);
  return DetKernel::tabulate(g, 1, 1, 1, [&](const int* i, double* o) { o[0] = f(g.mid(i[0])); });
}

DetKernel tab2(const Grid& g, const std::function<double(double, double)>& f) {
  if (!f) return DetKernel::zero(g, 2);
  return DetKernel::tabulate(g, 2, 1, 1, [&](const int* i, double* o) { o[0] = f(g.mid(i[0]), g.mid(i[1])); });
}

DetKernel sum_of(const DetKernel& a, const DetKernel& b) { return compress(a + b); }

}  // namespace

const char* system_kind_name(SystemKind k) {
  switch (k) {
    case SystemKind::fractional_bs: return "fractional-bs";
    case SystemKind::noisy_memory: return "noisy-memory";
    case SystemKind::custom: return "custom";
  }
  return "custom";
}

LinearSystem::LinearSystem(AstKernel j_, StarKernel k_, SystemKind kind_)
    : j(std::move(j_)), k(std::move(k_)), kind(kind_) {
  if (j.grid() != k.grid()) throw DomainError("linear system: kernels live on different grids");
  if (j.order() != k.order()) throw DomainError("linear system: kernels have different chaos orders");
  if (j.d() != k.d()) throw DomainError("linear system: kernels have different dimensions");
}

AstStarResolvent resolve_system(const LinearSystem& sys, double tol) { return aststar_resolvent(sys.j, sys.k, tol); }

ChaosProcess solve_svie(const AstStarResolvent& res, const ChaosProcess& phi) {
  return compress(phi + ast(res.q, phi) + star(res.r, phi));
}

ChaosProcess solve_svie(const LinearSystem& sys, const ChaosProcess& phi, double tol) {
  check_free_term(sys, phi, "solve_svie");
  const AstStarResolvent res = resolve_system(sys, tol);
  if (!res.report.converged) throw ConvergenceError("solve_svie: resolvent did not converge: " + res.report.note);
  return solve_svie(res, phi);
}

double svie_residual(const LinearSystem& sys, const ChaosProcess& phi, const ChaosProcess& x) {
  check_free_term(sys, phi, "svie_residual");
  check_free_term(sys, x, "svie_residual");
  return rel_defect(x - phi - ast(sys.j, x) - star(sys.k, x), x, phi);
}

ChaosProcess solve_bsvie(const AstStarResolvent& res, const ChaosProcess& psi) {
  return compress(psi + bast(transpose(res.q), psi) + bstar(transpose(res.r), psi));
}

ChaosProcess solve_bsvie(const LinearSystem& sys, const ChaosProcess& psi, double tol) {
  check_free_term(sys, psi, "solve_bsvie");
  const AstStarResolvent res = resolve_system(sys, tol);
  if (!res.report.converged) throw ConvergenceError("solve_bsvie: resolvent did not converge: " + res.report.note);
  return solve_bsvie(res, psi);
}

double bsvie_residual(const LinearSystem& sys, const ChaosProcess& psi, const ChaosProcess& y) {
  check_free_term(sys, psi, "bsvie_residual");
  check_free_term(sys, y, "bsvie_residual");
  return rel_defect(y - psi - bast(transpose(sys.j), y) - bstar(transpose(sys.k), y), y, psi);
}

double duality_gap(const AstStarResolvent& res, const ChaosProcess& phi, const ChaosProcess& psi) {
  const ChaosProcess x = solve_svie(res, phi), y = solve_bsvie(res, psi);
  const double a = inner_product(x, psi), b = inner_product(phi, y);
  return std::abs(a - b) / (1 + std::abs(a));
}

double duality_gap(const LinearSystem& sys, const ChaosProcess& phi, const ChaosProcess& psi, double tol) {
  check_free_term(sys, phi, "duality_gap");
  check_free_term(sys, psi, "duality_gap");
  const AstStarResolvent res = resolve_system(sys, tol);
  if (!res.report.converged) throw ConvergenceError("duality_gap: resolvent did not converge: " + res.report.note);
  return duality_gap(res, phi, psi);
}

ChaosProcess z_component(const ChaosProcess& y, int s_cell) {
  if (y.order() < 1) throw DomainError("z_component: needs chaos order >= 1");
  return martingale_shift(y, 1, {s_cell});
}

BuiltSystem build_fractional_bs(double alpha, double mu, double sigma, double x0, const Grid& g, int order) {
  if (!(alpha > 0.5 && alpha <= 1.0)) throw DomainError("fractional Black-Scholes: need 1/2 < alpha <= 1");
  if (order < 1 || order > kMaxOrder) throw DomainError("fractional Black-Scholes: order out of range");
  std::vector<DetKernel> jc{tabulate_fractional(alpha, mu, g)};
  for (DetKernel& z : zeros_from(g, order, 2, 1)) jc.push_back(std::move(z));
  std::vector<DetKernel> kc{DetKernel::zero(g, 1), tabulate_fractional(alpha, sigma, g)};
  for (DetKernel& z : zeros_from(g, order, 1, 2)) kc.push_back(std::move(z));
  return {LinearSystem(AstKernel(std::move(jc)), StarKernel(std::move(kc)), SystemKind::fractional_bs),
          ChaosProcess::deterministic(DetKernel::constant(g, 1, x0), order)};
}

BuiltSystem build_noisy_memory(const NoisyMemoryCoefficients& c, const Grid& g, int order) {
  if (!(c.alpha > 0.5 && c.alpha <= 1.0)) throw DomainError("noisy memory: need 1/2 < alpha <= 1");
  if (order < 2 || order > kMaxOrder) throw DomainError("noisy memory: order must lie in [2, 7]");
  const ChaosProcess zero = ChaosProcess::zero(g, order, 1, 1);
  const ChaosProcess& b = c.b.coeffs().empty() ? zero : c.b;
  const ChaosProcess& sg = c.sigma.coeffs().empty() ? zero : c.sigma;
  for (const ChaosProcess* p : {&b, &sg})
    if (p->grid() != g || p->order() != order || p->rows() != 1 || p->cols() != 1)
      throw DomainError("noisy memory: coefficient process does not match the grid or order");

  const DetKernel frac = tabulate_fractional(c.alpha, 1.0, g);
  const DetKernel jv = tab1(g, c.j), kv = tab1(g, c.k), l1 = tab2(g, c.l1), l2 = tab2(g, c.l2);

  std::vector<DetKernel> jc{sum_of(tri_product(frac, jv), ast_contract(frac, l1)), tri_product(frac, l1)};
  for (DetKernel& z : zeros_from(g, order, 2, 2)) jc.push_back(std::move(z));
  std::vector<DetKernel> kc{DetKernel::zero(g, 1), sum_of(tri_product(frac, kv), ast_contract(frac, l2)),
                            tri_product(frac, l2)};
  for (DetKernel& z : zeros_from(g, order, 1, 3)) kc.push_back(std::move(z));

  std::vector<DetKernel> fj{frac};
  for (DetKernel& z : zeros_from(g, order, 2, 1)) fj.push_back(std::move(z));
  std::vector<DetKernel> fk{DetKernel::zero(g, 1), frac};
  for (DetKernel& z : zeros_from(g, order, 1, 2)) fk.push_back(std::move(z));
  ChaosProcess phi = ChaosProcess::deterministic(DetKernel::constant(g, 1, c.x0), order);
  phi = compress(phi + ast(AstKernel(std::move(fj)), b) + star(StarKernel(std::move(fk)), sg));

  return {LinearSystem(AstKernel(std::move(jc)), StarKernel(std::move(kc)), SystemKind::noisy_memory),
          std::move(phi)};
}

LinearSystem random_system(const Grid& g, int order, int d, std::mt19937_64& rng, double amp_j, double amp_k) {
  AstKernel j = random_ast(g, order, d, rng, amp_j);
  StarKernel k = random_star(g, order, d, rng, amp_k);
  k = StarKernel(k.base().with(0, DetKernel::zero(g, 1, d, d)));
  return LinearSystem(std::move(j), std::move(k));
}

}  // namespace svk
