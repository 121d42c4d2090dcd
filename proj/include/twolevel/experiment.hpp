#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "twolevel/config.hpp"
#include "twolevel/engine.hpp"

namespace twolevel {

enum class Command { Simulate, Solve, Equilibrium, Analyze, Compare };

std::string_view command_name(Command c);

struct RunOptions {
  std::filesystem::path out_dir = "out";
  std::size_t threads = 1;
};

struct StageRecord {
  std::string name;
  std::string status;  // ok | failed
  double wall_seconds = 0.0;
  std::string error_code;
  std::string message;
};

struct ExperimentOutcome {
  std::vector<StageRecord> stages;
  std::vector<std::string> files;  // relative to out_dir, in write order
  std::vector<std::uint64_t> replicate_seeds;
  bool moment_flag = false;
};

/// Runs one command and writes its artifacts into opt.out_dir:
///   resolved_config.json, manifest.json, report.csv and, per command,
///   trajectory_NNN.csv (simulate, analyze, compare), density_NNN.csv or measure_NNN.csv (solve, compare),
///   picard.csv (transport).
/// Module errors are recorded in the manifest under the failing stage and rethrown.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg, Command cmd, const RunOptions& opt);

/// Individuals for replicate r. Sampler configs draw from `rng`; the other kinds ignore it.
std::vector<Individual> initial_individuals(const ExperimentConfig& cfg, Rng& rng);

/// Deterministic initial measure for the particle solvers (rescaled by the regime).
Measure initial_measure(const ExperimentConfig& cfg);

/// Initial density on cfg.solver.grid for the grid solvers.
DensityGrid initial_density(const ExperimentConfig& cfg);

/// printf("%.17g")
std::string format_double(double v);

}  // namespace twolevel
