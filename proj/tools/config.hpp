#pragma once

#include <iosfwd>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "svk/grid.hpp"

namespace svk::cli {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat key = value text.  '#' starts a comment, "[section]" prefixes the
// following keys with "section.", and keys may also be written dotted.
class Config {
 public:
  static Config parse(std::istream& is, const std::string& origin = "config");
  static Config load(const std::string& path);

  // `key=value` override; later calls win
  void set(const std::string& key, const std::string& value);
  void set_assignment(const std::string& assignment);

  bool has(const std::string& key) const;
  std::string str(const std::string& key) const;  // required
  std::string str(const std::string& key, const std::string& def) const;
  double num(const std::string& key) const;
  double num(const std::string& key, double def) const;
  long integer(const std::string& key) const;
  long integer(const std::string& key, long def) const;
  bool flag(const std::string& key, bool def) const;

  // keys never read; loaders reject these as typos
  std::vector<std::string> unused() const;
  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
  mutable std::set<std::string> used_;
};

struct FbsSpec {
  double alpha = 1, mu = 0, sigma = 0, x0 = 1;
};

// constant coefficients; l(t, s) = value · exp(−decay (t − s))
struct NoisySpec {
  double alpha = 1, x0 = 1, j = 0, k = 0, l1 = 0, l1_decay = 0, l2 = 0, l2_decay = 0, b = 0, sigma = 0;
};

struct CustomSpec {
  std::string j_path, k_path, phi_path, psi_path;
};

struct RandomSpec {
  std::uint64_t seed = 1;
  double amp_j = 1.0, amp_k = 0.5;
  int instances = 1;
};

// deterministic J ≡ j0, K with F_0 ≡ k0 and F_1 ≡ k1, φ ≡ phi
struct ConstantSpec {
  double j0 = 0, k0 = 0, k1 = 0, phi = 1;
};

struct PsiSpec {
  std::string kind = "constant";  // constant | random | phi
  double value = 1;
  std::uint64_t seed = 7;
};

struct McSpec {
  long paths = 200'000;
  int refine = 2;
  std::uint64_t seed = 2024;
  double allowance = 0.02;
  double sigma_wrong = -1;  // negative: 2σ
  bool control = true;
};

struct ExperimentConfig {
  double s = 0, t = 1;
  int m = 0;
  Layout layout = Layout::dense;
  int order = 0;
  int d = 1;
  std::string system;  // fractional-bs | noisy-memory | custom | random | constant
  FbsSpec fbs;
  NoisySpec noisy;
  CustomSpec custom;
  RandomSpec random;
  ConstantSpec constant;
  PsiSpec psi;
  std::string resolve_kind = "aststar";  // aststar | star | ast
  double tol_resolvent = 1e-10, tol_residual = 1e-10, tol_duality = 1e-10, tol_mean = 0.02;
  std::string duality_solution;  // optional forward solution file to check instead of solving
  McSpec mc;
  std::string out_dir;

  Grid grid() const { return build_grid(s, t, m, layout); }
};

// Reads and validates every field; unknown keys are rejected.
ExperimentConfig load_experiment(const Config& c);

}  // namespace svk::cli
