#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>

#include "svk/mittag_leffler.hpp"
#include "svk/monte_carlo.hpp"
#include "svk/solvers.hpp"

namespace svk::cli {

namespace {

namespace fs = std::filesystem;

struct VerificationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string one_line(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = c == ',' ? ';' : ' ';
  return s;
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
  std::ofstream f(fs::path(dir) / name, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + (fs::path(dir) / name).string());
  return f;
}

// rows of quantity,value,threshold,pass
class Checks {
 public:
  void add(const std::string& q, double v, double thr, bool pass) { rows_.push_back({q, v, thr, pass}); }
  void le(const std::string& q, double v, double thr) { add(q, v, thr, v <= thr); }
  void info(const std::string& q, double v) { add(q, v, NAN, true); }
  bool pass() const {
    for (const Row& r : rows_)
      if (!r.pass) return false;
    return true;
  }
  void write(const std::string& dir, const std::string& name) const {
    std::ofstream f = open_out(dir, name);
    f << "quantity,value,threshold,pass\n";
    for (const Row& r : rows_)
      f << r.q << ',' << fmt(r.v) << ',' << (std::isnan(r.thr) ? "" : fmt(r.thr)) << ',' << (r.pass ? "true" : "false")
        << '\n';
  }
  void log(std::ostream& os) const {
    for (const Row& r : rows_) os << "  " << r.q << " = " << fmt(r.v) << (r.pass ? "" : "  [FAIL]") << '\n';
  }

 private:
  struct Row {
    std::string q;
    double v, thr;
    bool pass;
  };
  std::vector<Row> rows_;
};

struct Problem {
  LinearSystem sys;
  ChaosProcess phi, psi;
};

NoisyMemoryCoefficients noisy_coefficients(const NoisySpec& n, const Grid& g, int order) {
  NoisyMemoryCoefficients c;
  c.alpha = n.alpha;
  c.x0 = n.x0;
  if (n.j != 0) c.j = [v = n.j](double) { return v; };
  if (n.k != 0) c.k = [v = n.k](double) { return v; };
  if (n.l1 != 0) c.l1 = [v = n.l1, a = n.l1_decay](double t, double s) { return v * std::exp(-a * (t - s)); };
  if (n.l2 != 0) c.l2 = [v = n.l2, a = n.l2_decay](double t, double s) { return v * std::exp(-a * (t - s)); };
  if (n.b != 0) c.b = ChaosProcess::deterministic(DetKernel::constant(g, 1, n.b), order);
  if (n.sigma != 0) c.sigma = ChaosProcess::deterministic(DetKernel::constant(g, 1, n.sigma), order);
  return c;
}

ChaosProcess read_process(const std::string& path, const Grid& g) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open '" + path + "'");
  return read_chaos_csv(f, g);
}

ChaosProcess make_psi(const ExperimentConfig& e, const Grid& g, const ChaosProcess& phi) {
  if (e.system == "custom" && !e.custom.psi_path.empty()) return read_process(e.custom.psi_path, g);
  if (e.psi.kind == "phi") return phi;
  if (e.psi.kind == "random") {
    std::mt19937_64 rng(e.psi.seed);
    return random_process(g, e.order, e.d, 1, rng);
  }
  return ChaosProcess::deterministic(DetKernel::constant(g, 1, Matrix::Constant(e.d, 1, e.psi.value)), e.order);
}

Problem build_problem(const ExperimentConfig& e, int instance = 0) {
  const Grid g = e.grid();
  Problem p;
  if (e.system == "fractional-bs") {
    BuiltSystem b = build_fractional_bs(e.fbs.alpha, e.fbs.mu, e.fbs.sigma, e.fbs.x0, g, e.order);
    p.sys = std::move(b.sys);
    p.phi = std::move(b.phi);
  } else if (e.system == "noisy-memory") {
    BuiltSystem b = build_noisy_memory(noisy_coefficients(e.noisy, g, e.order), g, e.order);
    p.sys = std::move(b.sys);
    p.phi = std::move(b.phi);
  } else if (e.system == "custom") {
    std::ifstream fj(e.custom.j_path), fk(e.custom.k_path);
    if (!fj) throw ConfigError("cannot open '" + e.custom.j_path + "'");
    if (!fk) throw ConfigError("cannot open '" + e.custom.k_path + "'");
    p.sys = LinearSystem(read_ast_csv(fj, g), read_star_csv(fk, g));
    if (p.sys.order() != e.order || p.sys.d() != e.d)
      throw ConfigError("custom kernels do not match chaos.order / system.d");
    p.phi = e.custom.phi_path.empty() ? ChaosProcess::deterministic(DetKernel::constant(g, 1, Matrix::Ones(e.d, 1)), e.order)
                                      : read_process(e.custom.phi_path, g);
  } else if (e.system == "random") {
    std::mt19937_64 rng(e.random.seed + static_cast<std::uint64_t>(instance));
    p.sys = random_system(g, e.order, e.d, rng, e.random.amp_j, e.random.amp_k);
    p.phi = random_process(g, e.order, e.d, 1, rng);
    if (e.psi.kind == "random") {
      p.psi = random_process(g, e.order, e.d, 1, rng);
      return p;
    }
  } else {  // constant
    std::vector<DetKernel> jc{DetKernel::constant(g, 2, e.constant.j0)};
    for (int n = 1; n <= e.order; ++n) jc.push_back(DetKernel::zero(g, n + 2));
    std::vector<DetKernel> kc{DetKernel::constant(g, 1, e.constant.k0)};
    if (e.order >= 1) kc.push_back(DetKernel::constant(g, 2, e.constant.k1));
    for (int n = 2; n <= e.order; ++n) kc.push_back(DetKernel::zero(g, n + 1));
    p.sys = LinearSystem(AstKernel(std::move(jc)), StarKernel(std::move(kc)));
    p.phi = ChaosProcess::deterministic(DetKernel::constant(g, 1, e.constant.phi), e.order);
  }
  p.psi = make_psi(e, g, p.phi);
  return p;
}

// (∗,⋆)-resolvent via both constructions; the report is written before any failure is raised
AstStarResolvent resolve_checked(const Problem& p, const ExperimentConfig& e, const std::string& dir,
                                 const std::string& report_name) {
  AstStarResolvent a = aststar_construction_i(p.sys.j, p.sys.k, e.tol_resolvent);
  const AstStarResolvent b = aststar_construction_ii(p.sys.j, p.sys.k, e.tol_resolvent);
  a.disagreement = std::max(rel_distance(a.q, b.q), rel_distance(a.r, b.r));
  {
    std::ofstream f = open_out(dir, report_name);
    f << "construction,";
    write_report_header(f);
    f << "i,";
    write_report_row(f, a.report);
    f << "ii,";
    write_report_row(f, b.report);
    f << "disagreement," << fmt(a.disagreement) << '\n';
  }
  if (!a.report.converged || !b.report.converged)
    throw ConvergenceError("resolvent did not converge: " + (a.report.note.empty() ? b.report.note : a.report.note));
  if (a.disagreement > 10 * e.tol_resolvent)
    throw ConsistencyError("resolvent constructions disagree by " + fmt(a.disagreement));
  return a;
}

void write_process(const std::string& dir, const std::string& name, const ChaosProcess& x) {
  std::ofstream f = open_out(dir, name);
  write_csv(f, x);
}

// per-cell mean and second moment of a scalar process
void write_moments(const std::string& dir, const std::string& name, const ChaosProcess& x) {
  std::ofstream f = open_out(dir, name);
  f << "cell,t,mean,second_moment\n";
  const Grid& g = x.grid();
  for (int i = 0; i < g.m(); ++i)
    f << i << ',' << fmt(g.mid(i)) << ',' << fmt(x[0].at({i}, 0, 0)) << ',' << fmt(second_moment(x, i)) << '\n';
}

void verify(const Checks& c, const std::string& what) {
  if (!c.pass()) throw VerificationFailure(what + " failed");
}

void cmd_resolve(const ExperimentConfig& e, const std::string& dir, std::ostream& log) {
  const Problem p = build_problem(e);
  if (e.resolve_kind == "star") {
    const StarResolvent r = star_resolvent(p.sys.k, e.tol_resolvent);
    {
      std::ofstream f = open_out(dir, "resolve_report.csv");
      write_report_header(f);
      write_report_row(f, r.report);
    }
    if (!r.report.converged) throw ConvergenceError("star resolvent: " + r.report.note);
    std::ofstream f = open_out(dir, "resolvent_r.csv");
    write_csv(f, r.r);
    log << "star resolvent converged, residual " << fmt(r.report.residual_star) << '\n';
    return;
  }
  if (e.resolve_kind == "ast") {
    const AstResolvent q = ast_resolvent(p.sys.j, e.tol_resolvent);
    {
      std::ofstream f = open_out(dir, "resolve_report.csv");
      write_report_header(f);
      write_report_row(f, q.report);
    }
    if (!q.report.converged) throw ConvergenceError("ast resolvent: " + q.report.note);
    std::ofstream f = open_out(dir, "resolvent_q.csv");
    write_csv(f, q.q);
    log << "ast resolvent converged, residual " << fmt(q.report.residual_ast) << ", sigma " << fmt(q.report.sigma)
        << '\n';
    return;
  }
  const AstStarResolvent r = resolve_checked(p, e, dir, "resolve_report.csv");
  std::ofstream fq = open_out(dir, "resolvent_q.csv"), fr = open_out(dir, "resolvent_r.csv");
  write_csv(fq, r.q);
  write_csv(fr, r.r);
  log << "(ast,star) resolvent converged: residuals " << fmt(r.report.residual_ast) << ", "
      << fmt(r.report.residual_star) << "; constructions agree to " << fmt(r.disagreement) << '\n';
}

void cmd_solve(const ExperimentConfig& e, const std::string& dir, std::ostream& log, bool forward) {
  const Problem p = build_problem(e);
  const std::string tag = forward ? "solve_svie" : "solve_bsvie";
  const AstStarResolvent r = resolve_checked(p, e, dir, tag + "_resolvent.csv");
  Checks c;
  if (forward) {
    const ChaosProcess x = solve_svie(r, p.phi);
    write_process(dir, "solution.csv", x);
    if (x.rows() == 1) write_moments(dir, "moments.csv", x);
    c.le("svie_residual", svie_residual(p.sys, p.phi, x), e.tol_residual);
  } else {
    const ChaosProcess y = solve_bsvie(r, p.psi);
    write_process(dir, "solution_backward.csv", y);
    c.le("bsvie_residual", bsvie_residual(p.sys, p.psi, y), e.tol_residual);
  }
  c.info("resolvent_disagreement", r.disagreement);
  c.write(dir, tag + "_report.csv");
  c.log(log);
  verify(c, tag);
}

void cmd_duality(const ExperimentConfig& e, const std::string& dir, std::ostream& log) {
  const int count = e.system == "random" ? e.random.instances : 1;
  std::ofstream f = open_out(dir, "duality.csv");
  f << "instance,inner_x_psi,inner_phi_y,gap,tol,pass\n";
  bool ok = true;
  for (int i = 0; i < count; ++i) {
    const Problem p = build_problem(e, i);
    const AstStarResolvent r = resolve_checked(p, e, dir, "duality_resolvent.csv");
    const ChaosProcess x = e.duality_solution.empty() ? solve_svie(r, p.phi) : read_process(e.duality_solution, e.grid());
    const ChaosProcess y = solve_bsvie(r, p.psi);
    const double a = inner_product(x, p.psi), b = inner_product(p.phi, y);
    const double gap = std::abs(a - b) / (1 + std::abs(a));
    const bool pass = gap <= e.tol_duality;
    ok = ok && pass;
    f << i << ',' << fmt(a) << ',' << fmt(b) << ',' << fmt(gap) << ',' << fmt(e.tol_duality) << ','
      << (pass ? "true" : "false") << '\n';
    log << "  instance " << i << ": gap " << fmt(gap) << (pass ? "" : "  [FAIL]") << '\n';
  }
  f.close();
  if (!ok) throw VerificationFailure("duality check failed");
}

void cmd_mc_verify(const ExperimentConfig& e, const std::string& dir, std::ostream& log) {
  if (e.system != "fractional-bs" && e.system != "noisy-memory")
    throw ConfigError("mc-verify needs a fractional-bs or noisy-memory system");
  if (e.order > kMaxMcOrder) throw ConfigError("mc-verify supports chaos.order <= 4");
  const Grid g = e.grid();
  const Problem p = build_problem(e);
  const AstStarResolvent r = resolve_checked(p, e, dir, "mc_resolvent.csv");
  const ChaosProcess x = solve_svie(r, p.phi);
  const PathBatch batch = simulate_paths(g, e.mc.refine, e.mc.paths, e.mc.seed);
  const double h = batch.step_h();
  EulerSystem euler, control;
  if (e.system == "fractional-bs") {
    const FbsSpec& f = e.fbs;
    const double wrong = e.mc.sigma_wrong >= 0 ? e.mc.sigma_wrong : 2 * f.sigma;
    euler = euler_fractional_bs(f.alpha, f.mu, f.sigma, f.x0, h);
    control = euler_fractional_bs(f.alpha, f.mu, wrong, f.x0, h);
  } else {
    NoisySpec n = e.noisy;
    euler = euler_noisy_memory(noisy_coefficients(n, g, e.order), g.s(), h);
    n.k = e.mc.sigma_wrong >= 0 ? e.mc.sigma_wrong : 2 * n.k;
    control = euler_noisy_memory(noisy_coefficients(n, g, e.order), g.s(), h);
  }
  const std::vector<double> chaos = reconstruct(x, batch, g.m() - 1);
  const MomentComparison main = compare_moments(chaos, euler_svie(euler, batch), e.mc.allowance);
  std::ofstream f = open_out(dir, "mc_moments.csv");
  write_moment_header(f);
  write_moment_row(f, main.mean);
  write_moment_row(f, main.second);
  bool control_failed = true;
  if (e.mc.control) {
    const MomentComparison neg = compare_moments(chaos, euler_svie(control, batch), e.mc.allowance, "control");
    write_moment_row(f, neg.mean);
    write_moment_row(f, neg.second);
    control_failed = !neg.pass();
  }
  f.close();
  for (const MomentRow* row : {&main.mean, &main.second})
    log << "  " << row->quantity << ": chaos " << fmt(row->chaos_value) << ", euler " << fmt(row->mc_value)
        << ", stderr " << fmt(row->stderr_) << (row->pass ? "" : "  [FAIL]") << '\n';
  if (e.mc.control) log << "  negative control " << (control_failed ? "rejected as expected" : "PASSED (unexpected)") << '\n';
  if (!main.pass()) throw VerificationFailure("Monte Carlo moments disagree");
  if (!control_failed) throw VerificationFailure("negative control was not rejected");
}

void cmd_fbs_example(const ExperimentConfig& e, const std::string& dir, std::ostream& log) {
  if (e.system != "fractional-bs") throw ConfigError("fbs-example needs system.kind = fractional-bs");
  const FbsSpec& fb = e.fbs;
  const Problem p = build_problem(e);
  const AstStarResolvent r = resolve_checked(p, e, dir, "fbs_resolvent.csv");
  const ChaosProcess x = solve_svie(r, p.phi);
  write_process(dir, "fbs_solution.csv", x);
  const Grid& g = x.grid();
  double worst = 0;
  {
    std::ofstream f = open_out(dir, "fbs_mean.csv");
    f << "cell,t,mean,oracle,rel_error\n";
    for (int i = 0; i < g.m(); ++i) {
      const double t = g.mid(i), v = x[0].at({i}, 0, 0);
      const double o = fb.x0 * e_alpha(fb.alpha, fb.mu * std::pow(t - g.s(), fb.alpha));
      const double err = std::abs(v - o) / std::abs(o);
      worst = std::max(worst, err);
      f << i << ',' << fmt(t) << ',' << fmt(v) << ',' << fmt(o) << ',' << fmt(err) << '\n';
    }
  }
  Checks c;
  c.le("svie_residual", svie_residual(p.sys, p.phi, x), e.tol_residual);
  c.le("max_rel_mean_error", worst, e.tol_mean);
  if (fb.alpha == 1.0) {
    const int last = g.m() - 1;
    const double t = g.mid(last) - g.s();
    const double exact = fb.x0 * fb.x0 * std::exp((2 * fb.mu + fb.sigma * fb.sigma) * t);
    double tail = 0, term = 1;
    for (int n = 1; n <= 60; ++n) {
      term *= fb.sigma * fb.sigma * t / n;
      if (n > e.order) tail += term;
    }
    tail *= fb.x0 * fb.x0 * std::exp(2 * fb.mu * t);
    const double err = std::abs(second_moment(x, last) - exact) / exact;
    c.le("rel_second_moment_error_T", err, e.tol_mean + tail / exact);
  }
  c.write(dir, "fbs_report.csv");
  c.log(log);
  verify(c, "fbs-example");
}

void cmd_noisy_memory(const ExperimentConfig& e, const std::string& dir, std::ostream& log) {
  if (e.system != "noisy-memory") throw ConfigError("noisy-memory needs system.kind = noisy-memory");
  const Problem p = build_problem(e);
  const AstStarResolvent r = resolve_checked(p, e, dir, "noisy_resolvent.csv");
  const ChaosProcess x = solve_svie(r, p.phi), y = solve_bsvie(r, p.psi);
  write_process(dir, "noisy_solution.csv", x);
  write_process(dir, "noisy_backward.csv", y);
  write_moments(dir, "noisy_moments.csv", x);
  Checks c;
  c.le("svie_residual", svie_residual(p.sys, p.phi, x), e.tol_residual);
  c.le("bsvie_residual", bsvie_residual(p.sys, p.psi, y), e.tol_residual);
  c.le("duality_gap", duality_gap(r, p.phi, p.psi), e.tol_duality);
  c.info("resolvent_disagreement", r.disagreement);
  c.write(dir, "noisy_report.csv");
  c.log(log);
  verify(c, "noisy-memory");
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> n{"resolve", "solve-svie", "solve-bsvie", "duality-check",
                                          "mc-verify", "fbs-example", "noisy-memory"};
  return n;
}

void write_status(const std::string& out_dir, const std::string& command, int code, const std::string& message) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  std::ofstream f(fs::path(out_dir) / (command + "_status.csv"), std::ios::binary);
  if (!f) return;
  const char* status = code == kOk                ? "ok"
                       : code == kConfigError     ? "config_error"
                       : code == kNonConvergence  ? "non_convergence"
                                                  : "verification_failure";
  f << "command,status,exit_code,message\n" << command << ',' << status << ',' << code << ',' << one_line(message) << '\n';
}

int run_command(const std::string& name, const ExperimentConfig& e, const std::string& out_dir, std::ostream& log) {
  int code = kOk;
  std::string message;
  try {
    fs::create_directories(out_dir);
    if (name == "resolve") cmd_resolve(e, out_dir, log);
    else if (name == "solve-svie") cmd_solve(e, out_dir, log, true);
    else if (name == "solve-bsvie") cmd_solve(e, out_dir, log, false);
    else if (name == "duality-check") cmd_duality(e, out_dir, log);
    else if (name == "mc-verify") cmd_mc_verify(e, out_dir, log);
    else if (name == "fbs-example") cmd_fbs_example(e, out_dir, log);
    else if (name == "noisy-memory") cmd_noisy_memory(e, out_dir, log);
    else throw ConfigError("unknown command '" + name + "'");
  } catch (const ConfigError& err) {
    code = kConfigError;
    message = err.what();
  } catch (const DomainError& err) {
    code = kConfigError;
    message = err.what();
  } catch (const ConvergenceError& err) {
    code = kNonConvergence;
    message = err.what();
  } catch (const ConsistencyError& err) {
    code = kNonConvergence;
    message = err.what();
  } catch (const VerificationFailure& err) {
    code = kVerificationFailure;
    message = err.what();
  } catch (const RangeError& err) {
    code = kConfigError;
    message = err.what();
  }
  write_status(out_dir, name, code, message);
  if (code != kOk) log << name << ": " << message << '\n';
  return code;
}

}  // namespace svk::cli
