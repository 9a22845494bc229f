#include <cmath>
#include <random>

#include "doctest.h"
#include "svk/grid.hpp"

using namespace svk;

TEST_CASE("build_grid: cell width and midpoints") {
  Grid g = build_grid(0, 1, 4);
  CHECK(g.h() == doctest::Approx(0.25));
  auto mid = g.midpoints();
  REQUIRE(mid.size() == 4);
  CHECK(mid[0] == doctest::Approx(0.125));
  CHECK(mid[1] == doctest::Approx(0.375));
  CHECK(mid[2] == doctest::Approx(0.625));
  CHECK(mid[3] == doctest::Approx(0.875));

  Grid one = build_grid(0, 2, 1);
  CHECK(one.h() == doctest::Approx(2.0));
  CHECK(one.mid(0) == doctest::Approx(1.0));

  CHECK_THROWS_AS(build_grid(1, 0, 4), DomainError);
  CHECK_THROWS_AS(build_grid(0, 1, 0), DomainError);
  CHECK_THROWS_AS(build_grid(0, 0, 3), DomainError);
}

TEST_CASE("grid invariants") {
  for (int m : {1, 3, 17, 256}) {
    Grid g = build_grid(0.3, 2.1, m);
    CHECK(std::abs(g.h() * m - 1.8) < 1e-12);
    auto mid = g.midpoints();
    for (int i = 0; i < m; ++i) {
      CHECK(mid[i] > 0.3);
      CHECK(mid[i] < 2.1);
      if (i) CHECK(mid[i] > mid[i - 1]);
    }
  }
}

TEST_CASE("node_index and sub-grids") {
  Grid g = build_grid(0, 1, 8);
  CHECK(g.node_index(0.0) == 0);
  CHECK(g.node_index(0.5) == 4);
  CHECK(g.node_index(1.0) == 8);
  CHECK_THROWS_AS(g.node_index(0.3), DomainError);
  Grid s = g.sub(2, 6);
  CHECK(s.m() == 4);
  CHECK(s.s() == doctest::Approx(0.25));
  CHECK(s.t() == doctest::Approx(0.75));
  CHECK(s.h() == doctest::Approx(g.h()));
  CHECK(s.mid(0) == doctest::Approx(g.mid(2)));
  CHECK(g.with_layout(Layout::train).sub(0, 4).layout() == Layout::train);
}

TEST_CASE("simplex_count") {
  Grid g = build_grid(0, 1, 4);
  CHECK(simplex_count(g, 2) == 6);
  CHECK(simplex_count(g, 1) == 4);
  CHECK(simplex_count(build_grid(0, 1, 3), 5) == 0);
  CHECK(simplex_count(g, 0) == 1);
  CHECK(simplex_count(64, 3) == 41664);
}

TEST_CASE("rank/unrank bijection and walker order") {
  for (int m : {1, 5, 9})
    for (int a = 1; a <= 5; ++a) {
      std::uint64_t expect = 0;
      for (SimplexWalker w(m, a); w.valid(); w.next()) {
        CHECK(w.rank() == expect);
        std::vector<int> idx(w.idx(), w.idx() + a);
        for (int j = 1; j < a; ++j) CHECK(idx[j] < idx[j - 1]);
        CHECK(idx[0] < m);
        CHECK(idx[a - 1] >= 0);
        CHECK(simplex_rank(idx) == expect);
        CHECK(simplex_unrank(expect, a) == idx);
        ++expect;
      }
      CHECK(expect == simplex_count(m, a));
    }
}

TEST_CASE("rank does not depend on the number of cells") {
  // tuples over a smaller grid keep their rank on a larger one
  std::uint64_t r = 0;
  for (SimplexWalker w(6, 3); w.valid(); w.next(), ++r) {
    std::vector<int> idx(w.idx(), w.idx() + 3);
    CHECK(simplex_rank(idx) == r);
  }
  CHECK(r == simplex_count(6, 3));
}

TEST_CASE("integrate_simplex examples") {
  Grid g = build_grid(0, 1, 4);
  CHECK(integrate_simplex(std::vector<double>(6, 1.0), 2, g) == doctest::Approx(0.375));
  for (int m : {1, 7, 100}) {
    Grid gm = build_grid(0, 1, m);
    CHECK(integrate_simplex(std::vector<double>(m, 1.0), 1, gm) == doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK(integrate_simplex(std::vector<double>(6, 0.0), 2, g) == 0.0);
  CHECK(integrate_simplex(std::vector<double>{2.5}, 0, g) == 2.5);
}

TEST_CASE("integrate_simplex of the constant one converges to T^n/n!") {
  for (int m : {64, 128}) {
    const double T = 1.5;
    Grid g = build_grid(0, T, m);
    for (int n = 1; n <= 6; ++n) {
      const double v = std::pow(g.h(), n) * double(simplex_count(g, n));
      if (simplex_count(g, n) <= 20'000'000) {
        std::vector<double> ones(simplex_count(g, n), 1.0);
        CHECK(integrate_simplex(ones, n, g) == doctest::Approx(v).epsilon(1e-12));
      }
      const double exact = std::pow(T, n) / std::tgamma(n + 1.0);
      CHECK(std::abs(v - exact) / exact <= 2.0 * n * n / m);
    }
  }
}

TEST_CASE("integrate_simplex is linear") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  Grid g = build_grid(0, 2, 12);
  for (int n = 1; n <= 4; ++n) {
    const std::size_t c = simplex_count(g, n);
    std::vector<double> u(c), v(c), w(c);
    const double a = 1.7, b = -0.4;
    for (std::size_t i = 0; i < c; ++i) {
      u[i] = nd(rng);
      v[i] = nd(rng);
      w[i] = a * u[i] + b * v[i];
    }
    const double lhs = integrate_simplex(w, n, g);
    const double rhs = a * integrate_simplex(u, n, g) + b * integrate_simplex(v, n, g);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * (1 + std::abs(lhs)));
  }
}

TEST_CASE("binomial guard") {
  CHECK(choose(10, 3) == 120);
  CHECK(choose(2, 5) == 0);
  CHECK_THROWS_AS(choose(kMaxCells + 1, 2), RangeError);
}
