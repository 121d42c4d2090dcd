#pragma once

#include <vector>

#include "twolevel/measure.hpp"
#include "twolevel/model.hpp"
#include "twolevel/population.hpp"

namespace twolevel {

/// Individual rates read as B(x, n1/K1, n2/K2), kernel U/K, lambda_ij/K_j;
/// everything else unchanged.
ModelParams rescale_params_h2(const ModelParams& base, const ScalingRegime& regime);

/// Adds the accelerated parts K^eta Gamma to B and D, K_i gamma to b_i and d_i,
/// and uses mutation standard deviation sigma / K^(eta/2), on top of the H2 substitutions.
/// Throws EllipticityViolated when p, sigma, gamma or Gamma has a nonpositive sampled lower bound
/// (unless `require_ellipticity` is false).
ModelParams rescale_params_h3(const ModelParams& base, const ScalingRegime& regime, bool require_ellipticity = true);

/// Dispatches on regime.tag; tag None returns the base parameters with unit scaling.
ModelParams rescale_params(const ModelParams& base, const ScalingRegime& regime);

struct RescaledMeasure {
  Measure atoms;
  ScalingRegime regime;

  double mass() const { return total_mass(atoms); }
};

RescaledMeasure empirical_measure(const std::vector<Individual>& members, const ScalingRegime& regime);
RescaledMeasure empirical_measure(const Population& pop);

}  // namespace twolevel
