#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"
#include "svk/parallel.hpp"

using namespace svk::cli;

int main(int argc, char** argv) {
  CLI::App app{"Linear stochastic Volterra integral equations via chaos expansions"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  std::vector<std::string> overrides;
  int threads = 0;
  app.add_option("--threads", threads, "worker cap (0 = hardware concurrency)")->check(CLI::NonNegativeNumber);

  for (const std::string& name : command_names()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("config", config_path, "experiment config file")->required();
    sub->add_option("-o,--out", out_dir, "output directory (default: output.dir, then $SVK_OUTPUT_DIR, then .)");
    sub->add_option("-s,--set", overrides, "override a config key, key=value (repeatable)");
    sub->add_option("--threads", threads, "worker cap (0 = hardware concurrency)")->check(CLI::NonNegativeNumber);
  }
  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();
  svk::set_threads(threads);

  const char* env = std::getenv("SVK_OUTPUT_DIR");
  const std::string fallback = out_dir.empty() ? (env && *env ? env : ".") : out_dir;
  ExperimentConfig e;
  try {
    Config c = Config::load(config_path);
    for (const std::string& o : overrides) c.set_assignment(o);
    e = load_experiment(c);
  } catch (const std::exception& err) {
    std::cerr << command << ": " << err.what() << '\n';
    write_status(fallback, command, kConfigError, err.what());
    return kConfigError;
  }
  const std::string dir = !out_dir.empty() ? out_dir : !e.out_dir.empty() ? e.out_dir : fallback;
  return run_command(command, e, dir, std::cout);
}
