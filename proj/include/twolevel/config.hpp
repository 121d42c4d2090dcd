#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "twolevel/density.hpp"
#include "twolevel/measure.hpp"
#include "twolevel/model.hpp"
#include "twolevel/ode.hpp"
#include "twolevel/reaction_diffusion.hpp"
#include "twolevel/test_function.hpp"

namespace twolevel {

enum class InitialKind { Particles, Sampler, Measure, Density };

/// Individuals with uniform traits in [lower, upper] and Poisson (or fixed) cell counts.
struct SamplerSpec {
  std::size_t count = 10;
  Trait lower;
  Trait upper;
  double n1_mean = 0.0;
  double n2_mean = 0.0;
  bool poisson = true;
};

/// Gaussian bump in y (and optionally in x) scaled to the given total mass.
struct DensityBump {
  double x_center = 0.5;
  double x_width = 0.0;  // 0: flat in x
  double y1_center = 0.5;
  double y2_center = 0.5;
  double width = 0.1;
  double mass = 1.0;
};

struct InitialCondition {
  InitialKind kind = InitialKind::Particles;
  std::vector<Individual> particles;
  SamplerSpec sampler;
  Measure measure;
  DensityBump bump;
};

struct RunBlock {
  double T = 1.0;
  std::size_t grid_intervals = 10;
  std::size_t replicates = 1;
  std::uint64_t seed = 1;
  std::uint64_t event_budget = 1'000'000'000ULL;
  std::uint64_t audit_interval = 10'000;
  std::size_t tree_threshold = 128;
  double mass_ceiling = 1e9;
  double second_moment_ceiling = 1e12;
};

struct AnalysisBlock {
  std::vector<TestFunction> test_functions;
  double se_band = 3.0;
  double qv_tolerance = 0.1;
  double slope_tolerance = 0.15;
};

enum class SolverKind { MeanField, Characteristic, Transport, ReactionDiffusion };

std::string_view solver_name(SolverKind k);

struct SolverBlock {
  SolverKind kind = SolverKind::MeanField;
  GridSpec grid;
  double dt = 0.01;
  double dt_out = 0.1;
  double picard_tol = 1e-8;
  std::size_t picard_max = 50;
  OdeOptions ode;
  DiffusionConvention convention = DiffusionConvention::Printed;
  bool require_ellipticity = true;
  double second_moment_ceiling = 1e12;
  Trait equilibrium_trait;
};

struct ExperimentConfig {
  ModelParams base;     // validated, unscaled
  ModelParams params;   // with the regime applied
  ScalingRegime regime;
  InitialCondition initial;
  RunBlock run;
  AnalysisBlock analysis;
  SolverBlock solver;
  std::string resolved_json;  // canonical document with every default filled in
  std::uint64_t hash = 0;     // FNV-1a of resolved_json

  std::string hash_hex() const;
};

/// Parses and validates a JSON experiment description. Throws ParseError (not JSON),
/// SchemaError (message starts with the field path) or UnknownRateForm.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
/// Same experiment with run.seed replaced; the resolved document and hash follow.
ExperimentConfig with_seed(const ExperimentConfig& cfg, std::uint64_t seed);

std::uint64_t fnv1a(std::string_view bytes);

}  // namespace twolevel
