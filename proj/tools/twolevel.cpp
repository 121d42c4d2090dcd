// Command-line front end: one process runs one experiment.
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "twolevel/config.hpp"
#include "twolevel/error.hpp"
#include "twolevel/experiment.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;

struct Args {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::size_t threads = 1;
};

void add_common(CLI::App* sub, Args& a) {
  sub->add_option("--config", a.config, "experiment description (JSON)")->required()->check(CLI::ExistingFile);
  sub->add_option("--seed", a.seed, "master seed, overrides run.seed");
  sub->add_option("--out", a.out, "output directory (default $TWOLEVEL_OUT/<hash>, else out/<hash>)");
  sub->add_option("--threads", a.threads, "replicate worker threads")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-level host/cell population simulator and limit solvers"};
  app.require_subcommand(1);
  Args args;
  struct Entry {
    const char* name;
    const char* help;
    twolevel::Command cmd;
  };
  const Entry entries[] = {
      {"simulate", "run stochastic replicates", twolevel::Command::Simulate},
      {"solve", "run the configured limit solver", twolevel::Command::Solve},
      {"equilibrium", "classify the cell equilibrium and the stationary state", twolevel::Command::Equilibrium},
      {"analyze", "replicates with martingale residuals and quadratic variations", twolevel::Command::Analyze},
      {"compare", "replicates against the limit solver", twolevel::Command::Compare},
  };
  for (const auto& e : entries) add_common(app.add_subcommand(e.name, e.help), args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfigError;
  }

  twolevel::Command cmd = twolevel::Command::Simulate;
  for (const auto& e : entries)
    if (app.got_subcommand(e.name)) cmd = e.cmd;

  try {
    twolevel::ExperimentConfig cfg = twolevel::load_config(args.config);
    if (args.seed) cfg = twolevel::with_seed(cfg, *args.seed);
    twolevel::RunOptions opt;
    opt.threads = args.threads;
    if (!args.out.empty()) {
      opt.out_dir = args.out;
    } else {
      const char* root = std::getenv("TWOLEVEL_OUT");
      opt.out_dir = std::filesystem::path(root && *root ? root : "out") / cfg.hash_hex();
    }
    twolevel::run_experiment(cfg, cmd, opt);
    std::cout << opt.out_dir.string() << '\n';
    return 0;
  } catch (const twolevel::Error& e) {
    std::cerr << e.what() << '\n';
    return twolevel::is_config_error(e.code()) ? kConfigError : kNumericalError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumericalError;
  }
}
