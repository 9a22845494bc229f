#include "config.hpp"

#include <charconv>
#include <fstream>
#include <istream>

namespace svk::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool valid_key(const std::string& k) {
  if (k.empty() || k.front() == '.' || k.back() == '.') return false;
  for (char c : k)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-')) return false;
  return true;
}

}  // namespace

Config Config::parse(std::istream& is, const std::string& origin) {
  Config c;
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(lineno) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!section.empty() && !valid_key(section)) throw ConfigError(where + "bad section name '" + section + "'");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    std::string key = trim(line.substr(0, eq));
    if (!valid_key(key)) throw ConfigError(where + "bad key '" + key + "'");
    if (!section.empty()) key = section + "." + key;
    if (c.kv_.count(key)) throw ConfigError(where + "duplicate key '" + key + "'");
    c.kv_[key] = trim(line.substr(eq + 1));
  }
  return c;
}

Config Config::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  return parse(f, path);
}

void Config::set(const std::string& key, const std::string& value) {
  if (!valid_key(key)) throw ConfigError("bad key '" + key + "'");
  kv_[key] = value;
}

void Config::set_assignment(const std::string& a) {
  const auto eq = a.find('=');
  if (eq == std::string::npos) throw ConfigError("override must look like key=value: '" + a + "'");
  set(trim(a.substr(0, eq)), trim(a.substr(eq + 1)));
}

bool Config::has(const std::string& key) const { return kv_.count(key) > 0; }

std::string Config::str(const std::string& key) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) throw ConfigError("missing config field '" + key + "'");
  used_.insert(key);
  return it->second;
}

std::string Config::str(const std::string& key, const std::string& def) const { return has(key) ? str(key) : def; }

double Config::num(const std::string& key) const {
  const std::string v = str(key);
  double x = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError("field '" + key + "' is not a number: '" + v + "'");
  return x;
}

double Config::num(const std::string& key, double def) const { return has(key) ? num(key) : def; }

long Config::integer(const std::string& key) const {
  const std::string v = str(key);
  long x = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError("field '" + key + "' is not an integer: '" + v + "'");
  return x;
}

long Config::integer(const std::string& key, long def) const { return has(key) ? integer(key) : def; }

bool Config::flag(const std::string& key, bool def) const {
  if (!has(key)) return def;
  const std::string v = str(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("field '" + key + "' is not a boolean: '" + v + "'");
}

std::vector<std::string> Config::unused() const {
  std::vector<std::string> r;
  for (const auto& [k, v] : kv_)
    if (!used_.count(k)) r.push_back(k);
  return r;
}

ExperimentConfig load_experiment(const Config& c) {
  ExperimentConfig e;
  const auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  e.s = c.num("grid.s", 0.0);
  e.t = c.num("grid.t", 1.0);
  e.m = static_cast<int>(c.integer("grid.m"));
  require(e.t > e.s, "grid.t must exceed grid.s");
  require(e.m >= 1 && e.m <= kMaxCells, "grid.m out of range");
  try {
    e.layout = parse_layout(c.str("grid.layout", "dense"));
  } catch (const DomainError& err) {
    throw ConfigError(err.what());
  }
  e.order = static_cast<int>(c.integer("chaos.order"));
  require(e.order >= 0 && e.order <= kMaxOrder, "chaos.order must lie in [0, 7]");
  e.d = static_cast<int>(c.integer("system.d", 1));
  require(e.d >= 1, "system.d must be >= 1");
  require(e.layout == Layout::dense || e.d == 1, "the train layout holds scalar systems only (system.d = 1)");

  e.system = c.str("system.kind");
  if (e.system == "fractional-bs") {
    e.fbs.alpha = c.num("fbs.alpha");
    e.fbs.mu = c.num("fbs.mu");
    e.fbs.sigma = c.num("fbs.sigma");
    e.fbs.x0 = c.num("fbs.x0", 1.0);
    require(e.fbs.alpha > 0.5 && e.fbs.alpha <= 1.0, "fbs.alpha must lie in (1/2, 1]");
    require(e.d == 1, "fractional-bs is scalar (system.d = 1)");
    require(e.order >= 1, "fractional-bs needs chaos.order >= 1");
  } else if (e.system == "noisy-memory") {
    NoisySpec& n = e.noisy;
    n.alpha = c.num("noisy.alpha");
    n.x0 = c.num("noisy.x0", 1.0);
    n.j = c.num("noisy.j", 0.0);
    n.k = c.num("noisy.k", 0.0);
    n.l1 = c.num("noisy.l1", 0.0);
    n.l1_decay = c.num("noisy.l1_decay", 0.0);
    n.l2 = c.num("noisy.l2", 0.0);
    n.l2_decay = c.num("noisy.l2_decay", 0.0);
    n.b = c.num("noisy.b", 0.0);
    n.sigma = c.num("noisy.sigma", 0.0);
    require(n.alpha > 0.5 && n.alpha <= 1.0, "noisy.alpha must lie in (1/2, 1]");
    require(e.d == 1, "noisy-memory is scalar (system.d = 1)");
    require(e.order >= 2, "noisy-memory needs chaos.order >= 2");
  } else if (e.system == "custom") {
    e.custom.j_path = c.str("custom.j");
    e.custom.k_path = c.str("custom.k");
    e.custom.phi_path = c.str("custom.phi", "");
    e.custom.psi_path = c.str("custom.psi", "");
  } else if (e.system == "random") {
    e.random.seed = static_cast<std::uint64_t>(c.integer("random.seed", 1));
    e.random.amp_j = c.num("random.amp_j", 1.0);
    e.random.amp_k = c.num("random.amp_k", 0.5);
    e.random.instances = static_cast<int>(c.integer("random.instances", 1));
    require(e.random.instances >= 1, "random.instances must be >= 1");
  } else if (e.system == "constant") {
    e.constant.j0 = c.num("constant.j0", 0.0);
    e.constant.k0 = c.num("constant.k0", 0.0);
    e.constant.k1 = c.num("constant.k1", 0.0);
    e.constant.phi = c.num("constant.phi", 1.0);
    require(e.d == 1, "constant systems are scalar (system.d = 1)");
  } else {
    throw ConfigError("system.kind must be fractional-bs, noisy-memory, custom, random or constant");
  }

  e.psi.kind = c.str("psi.kind", "constant");
  require(e.psi.kind == "constant" || e.psi.kind == "random" || e.psi.kind == "phi",
          "psi.kind must be constant, random or phi");
  e.psi.value = c.num("psi.value", 1.0);
  e.psi.seed = static_cast<std::uint64_t>(c.integer("psi.seed", 7));

  e.resolve_kind = c.str("resolve.kind", "aststar");
  require(e.resolve_kind == "aststar" || e.resolve_kind == "star" || e.resolve_kind == "ast",
          "resolve.kind must be aststar, star or ast");
  e.tol_resolvent = c.num("tol.resolvent", 1e-10);
  e.tol_residual = c.num("tol.residual", 1e-10);
  e.tol_duality = c.num("tol.duality", 1e-10);
  e.tol_mean = c.num("tol.mean", 0.02);
  for (double v : {e.tol_resolvent, e.tol_residual, e.tol_duality, e.tol_mean}) require(v > 0, "tolerances must be > 0");
  e.duality_solution = c.str("duality.solution", "");

  e.mc.paths = c.integer("mc.paths", 200'000);
  e.mc.refine = static_cast<int>(c.integer("mc.refine", 2));
  e.mc.seed = static_cast<std::uint64_t>(c.integer("mc.seed", 2024));
  e.mc.allowance = c.num("mc.allowance", 0.02);
  e.mc.sigma_wrong = c.num("mc.sigma_wrong", -1.0);
  e.mc.control = c.flag("mc.control", true);
  require(e.mc.paths >= 1, "mc.paths must be >= 1");
  require(e.mc.refine >= 1, "mc.refine must be >= 1");
  require(e.mc.allowance >= 0, "mc.allowance must be >= 0");

  e.out_dir = c.str("output.dir", "");

  const std::vector<std::string> extra = c.unused();
  if (!extra.empty()) {
    std::string msg = "unknown or unused config field(s):";
    for (const std::string& k : extra) msg += " " + k;
    throw ConfigError(msg);
  }
  return e;
}

}  // namespace svk::cli
