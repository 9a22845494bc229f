#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "svk/monte_carlo.hpp"
#include "svk/parallel.hpp"
#include "svk/solvers.hpp"
#include "test_util.hpp"

using namespace svk;
using namespace svk::testing;

namespace {

double mean(const std::vector<double>& x) {
  double s = 0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

// sample variance and the standard error of that estimate
std::pair<double, double> variance_with_stderr(const std::vector<double>& x) {
  const double mu = mean(x), n = static_cast<double>(x.size());
  double s2 = 0, s4 = 0;
  for (double v : x) {
    const double d = (v - mu) * (v - mu);
    s2 += d;
    s4 += d * d;
  }
  const double var = s2 / (n - 1);
  return {var, std::sqrt(std::max(0.0, s4 / n - var * var) / n)};
}

double stderr_of_mean(const std::vector<double>& x) { return std::sqrt(variance_with_stderr(x).first / x.size()); }

DetKernel ones(const Grid& g, int arity) { return DetKernel::constant(g, arity, 1.0); }

}  // namespace

TEST_CASE("path batches are reproducible and refine the grid") {
  const Grid g = build_grid(0, 1, 8);
  const PathBatch a = simulate_paths(g, 1, 50, 7), b = simulate_paths(g, 1, 50, 7), c = simulate_paths(g, 1, 50, 8);
  CHECK(a.increments() == b.increments());
  CHECK(a.increments() != c.increments());
  const PathBatch r = simulate_paths(g, 2, 50, 7);
  CHECK(r.steps() == 16);
  CHECK(r.step_h() == doctest::Approx(1.0 / 16));
  std::vector<double> st(16), ce(8);
  r.step_increments(3, st.data());
  r.cell_increments(3, ce.data());
  for (int i = 0; i < 8; ++i) CHECK(ce[i] == st[2 * i] + st[2 * i + 1]);
  CHECK_THROWS_AS(simulate_paths(g, 0, 10, 1), DomainError);
  CHECK_THROWS_AS(simulate_paths(g, 1, 0, 1), DomainError);
}

TEST_CASE("increment law gate") {
  const IncrementStats s = increment_stats(simulate_paths(build_grid(0, 1, 256), 1, 100'000, 11));
  MESSAGE("mean ratio " << s.max_mean_ratio << ", variance deviation " << s.max_var_dev);
  CHECK(s.pass);
  CHECK(s.max_var_dev <= 0.1);
}

TEST_CASE("results do not depend on the thread count") {
  const Grid g = build_grid(0, 1, 32, Layout::train);
  const PathBatch b = simulate_paths(g, 2, 5000, 3);
  const BuiltSystem fb = build_fractional_bs(0.8, 0.5, 0.3, 1.0, g, 3);
  const ChaosProcess x = solve_svie(fb.sys, fb.phi);
  const EulerSystem e = euler_fractional_bs(0.8, 0.5, 0.3, 1.0, b.step_h());
  set_threads(1);
  const std::vector<double> r1 = reconstruct(x, b, 31), e1 = euler_svie(e, b);
  set_threads(4);
  const std::vector<double> r4 = reconstruct(x, b, 31), e4 = euler_svie(e, b);
  set_threads(0);
  CHECK(r1 == r4);
  CHECK(e1 == e4);
}

TEST_CASE("low-order iterated integrals") {
  const Grid g = build_grid(0, 1, 64);
  const PathBatch b = simulate_paths(g, 1, 20'000, 5);
  const int t = 48;
  const std::vector<double> i0 = eval_iterated(DetKernel::constant(g, 1, 2.5), b, t);
  for (double v : i0) CHECK(v == 2.5);

  // n = 1, f ≡ 1 is W at the start of cell t
  const std::vector<double> w = eval_iterated(ones(g, 2), b, t);
  const auto [var, se] = variance_with_stderr(w);
  CHECK(std::abs(var - t * g.h()) <= 3 * se);
  CHECK(std::abs(mean(w)) <= 3 * stderr_of_mean(w));

  // n = 2, f ≡ 1: discrete Hermite identity, and (W² − t)/2 up to O(√h)
  const std::vector<double> w2 = eval_iterated(ones(g, 3), b, t);
  double worst = 0, l1 = 0;
  std::vector<double> dw(64);
  for (long p = 0; p < b.paths(); ++p) {
    b.cell_increments(p, dw.data());
    double qv = 0;
    for (int i = 0; i < t; ++i) qv += dw[i] * dw[i];
    worst = std::max(worst, std::abs(w2[p] - (w[p] * w[p] - qv) / 2));
    l1 += std::abs(w2[p] - (w[p] * w[p] - t * g.h()) / 2);
  }
  CHECK(worst <= 1e-12);
  CHECK(l1 / b.paths() <= std::sqrt(g.h()));

  CHECK_THROWS_AS(eval_iterated(ones(g, 6), b, t), DomainError);
  CHECK_THROWS_AS(eval_iterated(ones(g, 2), b, 64), DomainError);
  for (double v : eval_iterated(ones(g, 4), b, 2)) CHECK(v == 0.0);
}

TEST_CASE("dense and train evaluation agree") {
  const Grid gt = build_grid(0, 1, 12, Layout::train), gd = gt.with_layout(Layout::dense);
  const PathBatch bt = simulate_paths(gt, 1, 300, 9), bd = simulate_paths(gd, 1, 300, 9);
  std::mt19937_64 rng(4);
  for (int arity = 2; arity <= 5; ++arity) {
    const DetKernel ft = DetKernel::from_train(gt, random_train(12, arity, 2, rng));
    const DetKernel fd = densify(ft);
    CHECK(max_abs_diff(eval_iterated(ft, bt, 11), eval_iterated(fd, bd, 11)) <= 1e-12);
    CHECK(max_abs_diff(eval_iterated(ft, bt, 7), eval_iterated(fd, bd, 7)) <= 1e-12);
  }
}

TEST_CASE("Ito isometry and orthogonality at Monte Carlo scale") {
  const Grid g = build_grid(0, 1, 32);
  const PathBatch b = simulate_paths(g, 1, 40'000, 21);
  std::mt19937_64 rng(2);
  const DetKernel f1 = random_dense(g, 2, 1, 1, rng), f2 = random_dense(g, 3, 1, 1, rng);
  const int t = 31;
  const std::vector<double> i1 = eval_iterated(f1, b, t), i2 = eval_iterated(f2, b, t);
  const auto [var, se] = variance_with_stderr(i1);
  const double iso = first_index_mass(f1, t);
  MESSAGE("order-1 variance " << var << " vs " << iso << " (stderr " << se << ")");
  CHECK(std::abs(var - iso) <= 3 * se);
  std::vector<double> prod(i1.size());
  for (std::size_t p = 0; p < prod.size(); ++p) prod[p] = i1[p] * i2[p];
  CHECK(std::abs(mean(prod)) <= 3 * stderr_of_mean(prod));
}

TEST_CASE("reconstruction moments") {
  const Grid g = build_grid(0, 1, 24);
  std::mt19937_64 rng(13);
  const ChaosProcess x = random_process(g, 3, 1, 1, rng);
  const PathBatch b = simulate_paths(g, 1, 40'000, 17);
  const int t = 20;
  const std::vector<double> s = reconstruct(x, b, t);
  CHECK(std::abs(mean(s) - x[0].at({t}, 0, 0)) <= 3 * stderr_of_mean(s));
  std::vector<double> sq(s.size());
  for (std::size_t p = 0; p < s.size(); ++p) sq[p] = s[p] * s[p];
  CHECK(std::abs(mean(sq) - second_moment(x, t)) <= 3 * stderr_of_mean(sq));

  const ChaosProcess det = ChaosProcess::deterministic(DetKernel::constant(g, 1, 1.5), 3);
  for (double v : reconstruct(det, b, t)) CHECK(v == 1.5);
  CHECK_THROWS_AS(reconstruct(random_process(g, 5, 1, 1, rng), b, t), DomainError);
}

TEST_CASE("Euler scheme") {
  const Grid g = build_grid(0, 1, 64);
  const PathBatch b = simulate_paths(g, 8, 20'000, 23);
  EulerSystem none;
  none.phi = [](int i) { return 1.0 + 0.01 * i; };
  const std::vector<double> x = euler_svie(none, b);
  for (double v : x) CHECK(v == doctest::Approx(1.0 + 0.01 * 512));

  const double mu = 0.5, sigma = 0.3;
  const std::vector<double> gbm = euler_svie(euler_fractional_bs(1.0, mu, sigma, 1.0, b.step_h()), b);
  std::vector<double> sq(gbm.size());
  for (std::size_t p = 0; p < gbm.size(); ++p) sq[p] = gbm[p] * gbm[p];
  const double m1 = std::exp(mu), m2 = std::exp(2 * mu + sigma * sigma);
  MESSAGE("GBM mean " << mean(gbm) << " vs " << m1 << ", second moment " << mean(sq) << " vs " << m2);
  CHECK(std::abs(mean(gbm) - m1) <= 3 * stderr_of_mean(gbm) + 0.02 * m1);
  CHECK(std::abs(mean(sq) - m2) <= 3 * stderr_of_mean(sq) + 0.02 * m2);

  CHECK(fractional_step_weight(1.0, 0.01, 3) == 1.0);
  // weights integrate the singular kernel exactly: sum_l w h = t^α / Γ(α+1)
  double acc = 0;
  for (int lag = 1; lag <= 100; ++lag) acc += fractional_step_weight(0.75, 0.01, lag) * 0.01;
  CHECK(acc == doctest::Approx(1.0 / std::tgamma(1.75)).epsilon(1e-12));
}

TEST_CASE("moment comparison") {
  const std::vector<double> a{1, 2, 3, 4};
  const MomentComparison same = compare_moments(a, a);
  CHECK(same.mean.diff == 0.0);
  CHECK(same.pass());
  CHECK_THROWS_AS(compare_moments(a, {1, 2}), DomainError);

  const Grid g = build_grid(0, 1, 128, Layout::train);
  const PathBatch b = simulate_paths(g, 2, 20'000, 31);
  const BuiltSystem fb = build_fractional_bs(1.0, 0.5, 0.3, 1.0, g, 4);
  const std::vector<double> chaos = reconstruct(solve_svie(fb.sys, fb.phi), b, 127);
  const std::vector<double> euler = euler_svie(euler_fractional_bs(1.0, 0.5, 0.3, 1.0, b.step_h()), b);
  const MomentComparison ok = compare_moments(chaos, euler, 0.02);
  MESSAGE("mean " << ok.mean.chaos_value << " vs " << ok.mean.mc_value << ", second " << ok.second.chaos_value
                  << " vs " << ok.second.mc_value);
  CHECK(ok.pass());
  const std::vector<double> wrong = euler_svie(euler_fractional_bs(1.0, 0.5, 0.6, 1.0, b.step_h()), b);
  CHECK_FALSE(compare_moments(chaos, wrong, 0.02).pass());

  std::ostringstream os;
  write_moment_header(os);
  write_moment_row(os, same.mean);
  CHECK(os.str() == "quantity,chaos_value,mc_value,stderr,pass\nmean,2.5,2.5,0,true\n");
}

TEST_CASE("noisy-memory chaos solution matches its direct Euler scheme") {
  const Grid g = build_grid(0, 1, 128, Layout::train);
  const int N = 4;
  NoisyMemoryCoefficients c;
  c.alpha = 0.85;
  c.x0 = 1.0;
  c.j = [](double) { return 0.3; };
  c.k = [](double t) { return 0.2 + 0.1 * t; };
  c.l1 = [](double t, double s) { return 0.2 * std::exp(-(t - s)); };
  c.l2 = [](double, double) { return 0.15; };
  c.b = ChaosProcess::deterministic(DetKernel::constant(g, 1, 0.1), N);
  c.sigma = ChaosProcess::deterministic(DetKernel::constant(g, 1, 0.1), N);
  const BuiltSystem nm = build_noisy_memory(c, g, N);
  const ChaosProcess x = solve_svie(nm.sys, nm.phi);
  const PathBatch b = simulate_paths(g, 2, 20'000, 41);
  const std::vector<double> chaos = reconstruct(x, b, 127);
  const std::vector<double> euler = euler_svie(euler_noisy_memory(c, 0.0, b.step_h()), b);
  const MomentComparison r = compare_moments(chaos, euler, 0.02);
  MESSAGE("mean " << r.mean.chaos_value << " vs " << r.mean.mc_value << ", second " << r.second.chaos_value << " vs "
                  << r.second.mc_value);
  CHECK(r.pass());
}
