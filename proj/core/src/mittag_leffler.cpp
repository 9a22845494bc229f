#include "svk/mittag_leffler.hpp"

#include <cmath>

#include "svk/grid.hpp"

namespace svk {

MLResult ml_detail(MLParams p, double z) {
  if (!(p.beta > 0) || !(p.gamma > 0)) throw DomainError("Mittag-Leffler: parameters must be positive");
  if (!(std::abs(z) <= 50)) throw DomainError("Mittag-Leffler: series regime limited to |z| <= 50");
  MLResult r;
  if (z == 0) {
    r.value = 1 / std::tgamma(p.gamma);
    r.terms = 1;
    r.decreasing_at_stop = true;
    return r;
  }
  const double lz = std::log(std::abs(z));
  double sum = 0, prev = INFINITY;
  int small = 0;
  for (int k = 0; k < 10000; ++k) {
    // |term| = exp(k log|z| - lgamma(beta k + gamma)), 1/Gamma > 0 for positive argument
    const double mag = std::exp(k * lz - std::lgamma(p.beta * k + p.gamma));
    const double term = (z < 0 && (k & 1)) ? -mag : mag;
    sum += term;
    if (!std::isfinite(sum)) throw RangeError("Mittag-Leffler: value overflows double");
    small = (mag < 1e-16 * std::abs(sum)) ? small + 1 : 0;
    const bool decreasing = mag < prev;
    prev = mag;
    if (small >= 3) {
      r.value = sum;
      r.terms = k + 1;
      r.decreasing_at_stop = decreasing;
      return r;
    }
  }
  throw RangeError("Mittag-Leffler: series did not converge within 10^4 terms");
}

double ml(MLParams p, double z) { return ml_detail(p, z).value; }

double e_alpha(double alpha, double z) { return ml({alpha, 1.0}, z); }

double f_profile(double alpha, double mu, double t) {
  if (!(t > 0)) throw DomainError("f_profile: t must be positive");
  if (!(alpha > 0.5 && alpha <= 1)) throw DomainError("f_profile: need 1/2 < alpha <= 1");
  const double ta = std::pow(t, alpha);
  return ta / t * ml({alpha, alpha}, mu * ta);
}

double f_integral(double alpha, double mu, double u) {
  if (!(u >= 0)) throw DomainError("f_integral: u must be non-negative");
  if (u == 0) return 0;
  const double ua = std::pow(u, alpha);
  return ua * ml({alpha, alpha + 1}, mu * ua);
}

double f_cell_average(double alpha, double mu, double h, int lag) {
  if (lag < 1) throw DomainError("f_cell_average: lag must be >= 1");
  return (f_integral(alpha, mu, (lag + 0.5) * h) - f_integral(alpha, mu, (lag - 0.5) * h)) / h;
}

}  // namespace svk
