#include "twolevel/model.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <sstream>

#include "twolevel/error.hpp"

namespace twolevel {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

std::string describe(const Trait& x, double n1, double n2) {
  std::ostringstream os;
  os << "x=(";
  for (std::size_t k = 0; k < x.dim(); ++k) os << (k ? "," : "") << x[k];
  os << "), n1=" << n1 << ", n2=" << n2;
  return os.str();
}

void check_bound(double& envelope, double sup, std::string_view what) {
  if (std::isnan(envelope)) {
    envelope = sup;
  } else if (sup > envelope * (1.0 + 1e-12) + 1e-300) {
    std::ostringstream os;
    os << what << " reaches " << sup << " above its envelope " << envelope;
    throw Error(ErrorCode::EnvelopeViolated, os.str());
  }
}

constexpr std::array<double, 10> kCellLattice{0, 1, 2, 3, 5, 8, 13, 21, 34, 55};

}  // namespace

std::string_view regime_name(RegimeTag tag) {
  switch (tag) {
    case RegimeTag::None: return "none";
    case RegimeTag::H2: return "H2";
    case RegimeTag::H3Deterministic: return "H3-deterministic";
    case RegimeTag::H3Super: return "H3-super";
  }
  return "?";
}

void ScalingRegime::validate() const {
  if (!(K > 0.0 && K1 > 0.0 && K2 > 0.0))
    throw Error(ErrorCode::InvalidArgument, "K, K1, K2 must be positive");
  if (!(eta > 0.0 && eta <= 1.0)) throw Error(ErrorCode::InvalidArgument, "eta must lie in (0, 1]");
  if (tag == RegimeTag::H3Super && eta != 1.0)
    throw Error(ErrorCode::InvalidArgument, "H3-super requires eta = 1");
  if (tag == RegimeTag::H3Deterministic && eta >= 1.0)
    throw Error(ErrorCode::InvalidArgument, "H3-deterministic requires eta < 1");
}

std::string_view channel_name(Channel c) {
  switch (c) {
    case Channel::ClonalBirth: return "clonal_birth";
    case Channel::MutantBirth: return "mutant_birth";
    case Channel::Death: return "death";
    case Channel::CellBirth1: return "cell1_birth";
    case Channel::CellBirth2: return "cell2_birth";
    case Channel::CellDeath1: return "cell1_death";
    case Channel::CellDeath2: return "cell2_death";
  }
  return "?";
}

double ChannelRates::total() const noexcept {
  double s = 0.0;
  for (double r : rate) s += r;
  return s;
}

TraitCoefficients trait_coefficients(const Trait& x, const ModelParams& params) {
  TraitCoefficients tc;
  tc.p = std::clamp(params.mutation_prob(x), 0.0, 1.0);
  tc.mutation_sd = params.mutation_sd(x);
  const double g = params.acceleration ? params.acceleration->gamma(x) : 0.0;
  for (std::size_t i = 0; i < 2; ++i) {
    const double accel = params.scaling.cell_accel[i] * g;
    tc.b[i] = accel + params.cell_birth[i](x);
    tc.d[i] = accel + params.cell_death[i](x);
    tc.beta[i] = params.cell_competition[i](x);
  }
  return tc;
}

IndividualRates individual_rates(const Trait& x, std::int64_t n1, std::int64_t n2, const ModelParams& params) {
  const auto& reg = params.scaling.regime;
  const double y1 = static_cast<double>(n1) / reg.K1;
  const double y2 = static_cast<double>(n2) / reg.K2;
  IndividualRates r;
  double accel = 0.0;
  if (params.acceleration && params.scaling.individual_accel != 0.0)
    accel = params.scaling.individual_accel * params.acceleration->Gamma(x, y1, y2);
  r.birth = accel + params.birth(x, y1, y2);
  r.death = accel + params.death(x, y1, y2);
  r.selection = params.selection(x, y1, y2);
  return r;
}

double cell_death_per_cell(std::size_t i, const TraitCoefficients& tc, std::int64_t n1, std::int64_t n2,
                           const ModelParams& params) {
  const auto& reg = params.scaling.regime;
  const double load = params.lambda[i][0] / reg.K1 * static_cast<double>(n1) +
                      params.lambda[i][1] / reg.K2 * static_cast<double>(n2);
  return tc.d[i] + tc.beta[i] * load;
}

ChannelRates channel_rates(const Individual& ind, const TraitCoefficients& tc, double competition_sum,
                           const ModelParams& params) {
  return channel_rates(ind, tc, individual_rates(ind.trait, ind.n1, ind.n2, params), competition_sum, params);
}

ChannelRates channel_rates(const Individual& ind, const TraitCoefficients& tc, const IndividualRates& ir,
                           double competition_sum, const ModelParams& params) {
  const double n1 = static_cast<double>(ind.n1);
  const double n2 = static_cast<double>(ind.n2);
  ChannelRates out;
  out[Channel::ClonalBirth] = ir.birth * (1.0 - tc.p);
  out[Channel::MutantBirth] = ir.birth * tc.p;
  out[Channel::Death] = ir.death + ir.selection * competition_sum / params.scaling.regime.K;
  out[Channel::CellBirth1] = tc.b[0] * n1;
  out[Channel::CellBirth2] = tc.b[1] * n2;
  out[Channel::CellDeath1] = ind.n1 > 0 ? cell_death_per_cell(0, tc, ind.n1, ind.n2, params) * n1 : 0.0;
  out[Channel::CellDeath2] = ind.n2 > 0 ? cell_death_per_cell(1, tc, ind.n1, ind.n2, params) * n2 : 0.0;
#ifndef NDEBUG
  for (double r : out.rate) assert(r >= 0.0);
#endif
  return out;
}

ChannelRates channel_rates(const Individual& ind, double competition_sum, const ModelParams& params) {
  return channel_rates(ind, trait_coefficients(ind.trait, params), competition_sum, params);
}

double box_mass(const TraitBox& box, const Trait& x, double sd) {
  double m = 1.0;
  for (std::size_t k = 0; k < box.dim(); ++k)
    m *= normal_cdf((box.upper[k] - x[k]) / sd) - normal_cdf((box.lower[k] - x[k]) / sd);
  return m;
}

double truncated_gaussian_envelope(const TraitBox& box, double sd_min, double sd_max) {
  double c = std::pow(sd_max / sd_min, static_cast<double>(box.dim()));
  for (std::size_t k = 0; k < box.dim(); ++k) c /= normal_cdf(box.side(k) / sd_max) - 0.5;
  return c;
}

ModelParams validate_params(const ModelParams& raw) {
  ModelParams p = raw;
  for (const auto& row : p.lambda)
    for (double v : row)
      if (!(v >= 0.0)) throw Error(ErrorCode::BadMatrix, "interaction matrix has a negative entry");
  if (p.box.lower.dim() != p.box.upper.dim() || p.box.dim() == 0)
    throw Error(ErrorCode::InvalidArgument, "trait box bounds have inconsistent dimensions");
  for (std::size_t k = 0; k < p.box.dim(); ++k)
    if (!(p.box.upper[k] > p.box.lower[k])) throw Error(ErrorCode::InvalidArgument, "empty trait box");

  std::size_t per_dim = 11;
  if (p.box.dim() > 1) per_dim = std::max<std::size_t>(4, static_cast<std::size_t>(std::ceil(std::pow(11.0, 1.0 / p.box.dim()))));
  const auto traits = p.box.lattice(per_dim);

  double sup_b = 0, sup_d = 0, sup_a = 0, sup_u = 0;
  double sd_min = std::numeric_limits<double>::infinity(), sd_max = 0.0;
  bool mutates = false;
  p.r_min = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  p.r_max = {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};

  for (const Trait& x : traits) {
    const double prob = p.mutation_prob(x);
    if (prob < 0.0 || prob > 1.0)
      throw Error(ErrorCode::InvalidArgument, "mutation probability outside [0,1] at " + describe(x, 0, 0));
    for (std::size_t i = 0; i < 2; ++i) {
      const double b = p.cell_birth[i](x), d = p.cell_death[i](x), beta = p.cell_competition[i](x);
      if (b < 0.0 || d < 0.0 || beta < 0.0)
        throw Error(ErrorCode::NegativeRate, "negative cell rate at " + describe(x, 0, 0));
      p.r_min[i] = std::min(p.r_min[i], b - d);
      p.r_max[i] = std::max(p.r_max[i], b - d);
    }
    if (prob > 0.0) {
      mutates = true;
      const double sd = p.mutation_sd(x);
      sd_min = std::min(sd_min, sd);
      sd_max = std::max(sd_max, sd);
    }
    if (p.acceleration) {
      if (p.acceleration->gamma(x) < 0.0 || p.acceleration->sigma(x) < 0.0)
        throw Error(ErrorCode::NegativeRate, "negative acceleration coefficient at " + describe(x, 0, 0));
    }
    for (double n1 : kCellLattice) {
      for (double n2 : kCellLattice) {
        const double b = p.birth(x, n1, n2), d = p.death(x, n1, n2), a = p.selection(x, n1, n2);
        if (b < 0.0 || d < 0.0 || a < 0.0)
          throw Error(ErrorCode::NegativeRate, "negative individual rate at " + describe(x, n1, n2));
        if (p.acceleration && p.acceleration->Gamma(x, n1, n2) < 0.0)
          throw Error(ErrorCode::NegativeRate, "negative Gamma at " + describe(x, n1, n2));
        const double n = std::max(n1 + n2, 1.0);
        sup_b = std::max(sup_b, b);
        sup_d = std::max(sup_d, d / n);
        sup_a = std::max(sup_a, a / n);
      }
    }
    for (const Trait& xp : traits) {
      const double u = p.competition(x - xp);
      if (u < 0.0) throw Error(ErrorCode::NegativeRate, "negative competition kernel");
      sup_u = std::max(sup_u, u);
    }
  }

  check_bound(p.envelopes.birth, sup_b, "birth rate");
  check_bound(p.envelopes.death, sup_d, "death rate per cell");
  check_bound(p.envelopes.selection, sup_a, "selection rate per cell");
  check_bound(p.envelopes.kernel, sup_u, "competition kernel");

  if (mutates) {
    if (!(sd_min > 0.0)) throw Error(ErrorCode::EnvelopeViolated, "mutation standard deviation must be positive");
    if (std::isnan(p.envelopes.mutation_sd)) {
      p.envelopes.mutation_sd = sd_max;
    } else if (p.envelopes.mutation_sd < sd_max) {
      throw Error(ErrorCode::EnvelopeViolated, "envelope standard deviation below the kernel's");
    }
    const double need = truncated_gaussian_envelope(p.box, sd_min, p.envelopes.mutation_sd);
    check_bound(p.envelopes.mutation, need, "mutation kernel ratio");
  } else {
    if (std::isnan(p.envelopes.mutation)) p.envelopes.mutation = 1.0;
    if (std::isnan(p.envelopes.mutation_sd)) p.envelopes.mutation_sd = sd_max;
  }
  p.validated = true;
  return p;
}

Trait sample_mutant_trait(const Trait& x, double sd, const ModelParams& params, Rng& rng) {
  if (!(sd > 0.0)) return x;
  const double sbar = params.envelopes.mutation_sd;
  const double cbar = params.envelopes.mutation;
  const double d = static_cast<double>(x.dim());
  const double mass = box_mass(params.box, x, sd);
  const double shape = 1.0 / (sd * sd) - 1.0 / (sbar * sbar);
  const double lead = std::pow(sbar / sd, d) / (mass * cbar);
  for (std::size_t attempt = 0; attempt < kRejectionLimit; ++attempt) {
    Trait cand = x;
    for (std::size_t k = 0; k < x.dim(); ++k) cand[k] += sbar * rng.normal();
    if (!params.box.contains(cand)) continue;
    const double z2 = (cand - x).squared_norm();
    const double ratio = lead * std::exp(-0.5 * z2 * shape);
    if (ratio > 1.0 + 1e-9) throw Error(ErrorCode::EnvelopeViolated, "mutation kernel exceeds its envelope");
    if (rng.uniform() < ratio) return cand;
  }
  throw Error(ErrorCode::RejectionStall, "mutation sampler rejected 1e6 consecutive proposals");
}

Trait sample_mutant_trait(const Trait& x, const ModelParams& params, Rng& rng) {
  return sample_mutant_trait(x, trait_coefficients(x, params).mutation_sd, params, rng);
}

}  // namespace twolevel
