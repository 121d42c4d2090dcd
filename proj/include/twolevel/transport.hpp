#pragma once

#include <cstddef>
#include <vector>

#include "twolevel/density.hpp"
#include "twolevel/model.hpp"
#include "twolevel/ode.hpp"

namespace twolevel {

struct TransportOptions {
  double dt = 0.01;      // slab length
  double dt_out = 0.1;   // snapshot spacing, a multiple of dt
  double picard_tol = 1e-8;
  std::size_t picard_max = 50;
  std::size_t divergence_window = 5;
  OdeOptions ode;
};

struct TransportResult {
  std::vector<DensityGrid> snapshots;
  /// Successive L1 distances of the Picard iterates, one list per slab.
  std::vector<std::vector<double>> picard_history;
  std::size_t unconverged_slabs = 0;
  double picard_tol = 0.0;
  double ode_atol = 0.0;
  double ode_rtol = 0.0;
};

/// Characteristic solver for the transport equation with birth, mutation, death and
/// competition on a one-dimensional trait grid. Each slab carries cell contents along the
/// cell flow (mass-conserving remap) and runs a Picard iteration: sources from the previous
/// iterate, the death/competition sink through a trapezoidal exponential factor.
TransportResult transport_mild_solve(const DensityGrid& phi0, const ModelParams& params, double T,
                                     const TransportOptions& opt = {});

/// Fraction of the truncated mutation kernel sent from trait cell j to trait cell i (rows: i).
std::vector<std::vector<double>> mutation_transfer(const GridSpec& spec, const ModelParams& params);

}  // namespace twolevel
