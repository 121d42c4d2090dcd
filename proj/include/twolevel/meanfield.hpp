#pragma once

#include <vector>

#include "twolevel/measure.hpp"
#include "twolevel/model.hpp"
#include "twolevel/ode.hpp"

namespace twolevel {

struct MeanFieldOptions {
  OdeOptions ode;
  double second_moment_ceiling = 1e12;  // ceiling on <v_t, y1^2 + y2^2>
};

struct MeanFieldResult {
  std::vector<double> times;
  std::vector<double> mass;
  std::vector<Measure> snapshots;
  double sup_second_moment = 0.0;
  bool moment_flag = false;
};

/// Solution of m' = R m - a m^2 with m(0) = m0.
double logistic_mass(double m0, double R, double a, double t);

/// Mean-field case (constant B, D, alpha, U and p = 0): particles move along the
/// Lotka-Volterra flow of their own trait and every weight is rescaled by the
/// common logistic mass.
MeanFieldResult meanfield_constant_solve(const Measure& v0, const ModelParams& params, double T, double dt_out,
                                         const MeanFieldOptions& opt = {});

/// General p = 0 case: weights follow w' = w (B - D - alpha U*v) at the particle's (x, y)
/// and positions follow the flow; weights and positions are integrated together.
MeanFieldResult characteristic_particle_solve(const Measure& v0, const ModelParams& params, double T, double dt_out,
                                              const MeanFieldOptions& opt = {});

/// Empirical variance of (y1, y2) under the normalized measure, summed over both coordinates.
double cell_state_variance(const Measure& m);

}  // namespace twolevel
