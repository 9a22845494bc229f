#include <cmath>

#include "doctest.h"
#include "svk/grid.hpp"
#include "svk/mittag_leffler.hpp"

using namespace svk;

namespace {
// independent fixed-length summation with tgamma, for moderate parameters
double series200(double beta, double gamma, double z) {
  double s = 0;
  for (int k = 0; k < 200; ++k) {
    const double g = std::tgamma(beta * k + gamma);
    if (!std::isfinite(g)) break;
    s += std::pow(z, k) / g;
  }
  return s;
}
}  // namespace

TEST_CASE("ml examples") {
  CHECK(std::abs(ml({1, 1}, 1) - std::exp(1.0)) < 1e-12);
  CHECK(ml({0.75, 0.75}, 0) == doctest::Approx(1 / std::tgamma(0.75)).epsilon(1e-15));
  CHECK(ml({0.75, 0.75}, 0) == doctest::Approx(0.81605).epsilon(1e-5));
  const double v = ml({0.5, 1}, 1);
  CHECK(v == doctest::Approx(series200(0.5, 1, 1)).epsilon(1e-13));
  CHECK(v == doctest::Approx(std::exp(1.0) * std::erfc(-1.0)).epsilon(1e-13));
  CHECK(v == doctest::Approx(5.00898).epsilon(1e-5));
}

TEST_CASE("ml errors") {
  CHECK_THROWS_AS(ml({0, 1}, 1), DomainError);
  CHECK_THROWS_AS(ml({1, -1}, 1), DomainError);
  CHECK_THROWS_AS(ml({1, 1}, 51), DomainError);
}

TEST_CASE("ml known closed forms") {
  for (double z : {-3.0, -0.5, 0.1, 2.0, 7.0}) {
    CHECK(ml({1, 1}, z) == doctest::Approx(std::exp(z)).epsilon(1e-12));
    CHECK(ml({2, 1}, z * std::abs(z)) ==
          doctest::Approx(z >= 0 ? std::cosh(z) : std::cos(-z)).epsilon(1e-10));
    // E_{1,2}(z) = (e^z - 1)/z
    CHECK(ml({1, 2}, z) == doctest::Approx(std::expm1(z) / z).epsilon(1e-12));
  }
  for (double z : {0.3, 1.7, 4.0})
    CHECK(ml({0.5, 1}, z) == doctest::Approx(std::exp(z * z) * std::erfc(-z)).epsilon(1e-12));
}

TEST_CASE("stopping rule fires in the decreasing regime") {
  for (double beta : {0.55, 0.75, 1.0, 1.6})
    for (double gamma : {0.6, 1.0, 2.3})
      for (double z : {-20.0, -1.0, 0.2, 3.0, 30.0}) {
        MLResult r = ml_detail({beta, gamma}, z);
        CHECK(r.decreasing_at_stop);
        CHECK(r.terms > 3);
        CHECK(std::isfinite(r.value));
      }
}

TEST_CASE("overflow is reported, not returned") {
  CHECK_THROWS_AS(ml({0.55, 1}, 50), RangeError);
}

TEST_CASE("f_profile and e_alpha examples") {
  for (double t : {0.1, 0.5, 1.0, 2.0}) {
    CHECK(f_profile(1.0, 0.7, t) == doctest::Approx(std::exp(0.7 * t)).epsilon(1e-12));
    CHECK(f_profile(0.8, 0.0, t) == doctest::Approx(std::pow(t, -0.2) / std::tgamma(0.8)).epsilon(1e-14));
  }
  CHECK(f_profile(0.75, 0.5, 1.0) == doctest::Approx(ml({0.75, 0.75}, 0.5)).epsilon(1e-15));
  CHECK(f_profile(0.75, 0.5, 1.0) == doctest::Approx(series200(0.75, 0.75, 0.5)).epsilon(1e-13));
  CHECK_THROWS_AS(f_profile(0.75, 0.5, 0.0), DomainError);
  CHECK_THROWS_AS(f_profile(0.4, 0.5, 1.0), DomainError);

  for (double z : {-1.0, 0.0, 0.5, 3.0}) CHECK(e_alpha(1, z) == doctest::Approx(std::exp(z)).epsilon(1e-12));
  for (double a : {0.6, 0.75, 0.9}) CHECK(e_alpha(a, 0) == 1.0);
}

TEST_CASE("1 + mu int_0^t f = E_alpha(mu t^alpha) by midpoint quadrature at m = 512") {
  const int m = 512;
  for (double alpha : {0.75, 0.9})
    for (double mu : {0.3, 0.8}) {
      const double h = 1.0 / m;
      double acc = 0, worst = 0;
      for (int i = 0; i < m; ++i) {
        acc += h * mu * f_profile(alpha, mu, (i + 0.5) * h);
        const double t = (i + 1) * h;
        worst = std::max(worst, std::abs(1 + acc - e_alpha(alpha, mu * std::pow(t, alpha))) /
                                    e_alpha(alpha, mu * std::pow(t, alpha)));
      }
      CHECK(worst < 0.005);
      // the antiderivative form is exact
      for (double t : {0.01, 0.3, 1.0})
        CHECK(1 + mu * f_integral(alpha, mu, t) == doctest::Approx(e_alpha(alpha, mu * std::pow(t, alpha))).epsilon(1e-13));
    }
}

TEST_CASE("f_profile square integral is stable under refinement") {
  for (double alpha : {0.6, 0.75, 0.9}) {
    auto quad = [&](int m) {
      double s = 0;
      for (int i = 0; i < m; ++i) {
        const double f = f_profile(alpha, 0.5, (i + 0.5) / m);
        s += f * f / m;
      }
      return s;
    };
    const double a = quad(256), b = quad(512);
    CHECK(std::isfinite(a));
    if (alpha >= 0.75) CHECK(std::abs(a - b) / b < 0.02);
    else CHECK(b > a);  // still converging from below near the singular endpoint
  }
}

TEST_CASE("f_cell_average matches the fractional cell average at mu = 0") {
  // at mu = 0, f is the Riemann-Liouville kernel
  for (int lag : {1, 2, 10, 100})
    CHECK(f_cell_average(0.75, 0.0, 1.0 / 256, lag) ==
          doctest::Approx((std::pow((lag + 0.5) / 256, 0.75) - std::pow((lag - 0.5) / 256, 0.75)) /
                          (0.75 * std::tgamma(0.75) / 256)).epsilon(1e-12));
}
