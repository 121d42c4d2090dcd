#include "twolevel/scaling.hpp"

#include <cmath>

#include "twolevel/error.hpp"

namespace twolevel {

double total_mass(const Measure& m) {
  double s = 0.0;
  for (const auto& a : m) s += a.w;
  return s;
}

ModelParams rescale_params_h2(const ModelParams& base, const ScalingRegime& regime) {
  if (regime.tag != RegimeTag::H2) throw Error(ErrorCode::InvalidArgument, "rescale_params_h2 needs an H2 regime");
  regime.validate();
  ModelParams p = base;
  p.scaling = EffectiveScaling{regime, 0.0, {0.0, 0.0}};
  return p;
}

ModelParams rescale_params_h3(const ModelParams& base, const ScalingRegime& regime, bool require_ellipticity) {
  if (regime.tag != RegimeTag::H3Deterministic && regime.tag != RegimeTag::H3Super)
    throw Error(ErrorCode::InvalidArgument, "rescale_params_h3 needs an H3 regime");
  regime.validate();
  if (!base.acceleration) throw Error(ErrorCode::EllipticityViolated, "accelerated regime without Gamma, gamma, sigma");
  const Acceleration& acc = *base.acceleration;
  if (require_ellipticity) {
    double low_p = INFINITY, low_sigma = INFINITY, low_gamma = INFINITY, low_Gamma = INFINITY;
    constexpr double ys[] = {0.0, 0.5, 1.0, 2.0, 5.0, 10.0};
    for (const Trait& x : base.box.lattice(11)) {
      low_p = std::min(low_p, base.mutation_prob(x));
      low_sigma = std::min(low_sigma, acc.sigma(x));
      low_gamma = std::min(low_gamma, acc.gamma(x));
      for (double y1 : ys)
        for (double y2 : ys) low_Gamma = std::min(low_Gamma, acc.Gamma(x, y1, y2));
    }
    if (!(low_p > 0.0)) throw Error(ErrorCode::EllipticityViolated, "mutation probability not bounded below");
    if (!(low_sigma > 0.0)) throw Error(ErrorCode::EllipticityViolated, "sigma not bounded below");
    if (!(low_gamma > 0.0)) throw Error(ErrorCode::EllipticityViolated, "gamma not bounded below");
    if (!(low_Gamma > 0.0)) throw Error(ErrorCode::EllipticityViolated, "Gamma not bounded below");
  }
  ModelParams p = base;
  const double accel = std::pow(regime.K, regime.eta);
  p.scaling = EffectiveScaling{regime, accel, {regime.K1, regime.K2}};
  p.mutation_sd = acc.sigma.scaled(1.0 / std::sqrt(accel));
  p.envelopes.mutation = Envelopes::kUnset;
  p.envelopes.mutation_sd = Envelopes::kUnset;
  return validate_params(p);
}

ModelParams rescale_params(const ModelParams& base, const ScalingRegime& regime) {
  switch (regime.tag) {
    case RegimeTag::None: {
      ModelParams p = base;
      p.scaling = EffectiveScaling{};
      return p;
    }
    case RegimeTag::H2: return rescale_params_h2(base, regime);
    case RegimeTag::H3Deterministic:
    case RegimeTag::H3Super: return rescale_params_h3(base, regime);
  }
  return base;
}

RescaledMeasure empirical_measure(const std::vector<Individual>& members, const ScalingRegime& regime) {
  RescaledMeasure m;
  m.regime = regime;
  m.atoms.reserve(members.size());
  const double w = 1.0 / regime.K;
  for (const auto& ind : members)
    m.atoms.push_back({ind.trait, static_cast<double>(ind.n1) / regime.K1, static_cast<double>(ind.n2) / regime.K2, w});
  return m;
}

RescaledMeasure empirical_measure(const Population& pop) {
  return empirical_measure(pop.members(), pop.params().scaling.regime);
}

}  // namespace twolevel
