#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <optional>
#include <string_view>

#include "twolevel/forms.hpp"
#include "twolevel/rng.hpp"
#include "twolevel/trait.hpp"

namespace twolevel {

enum class RegimeTag { None, H2, H3Deterministic, H3Super };

std::string_view regime_name(RegimeTag tag);

struct ScalingRegime {
  double K = 1.0;
  double K1 = 1.0;
  double K2 = 1.0;
  double eta = 1.0;
  RegimeTag tag = RegimeTag::None;

  /// Throws InvalidArgument when K's are not positive or the tag disagrees with eta.
  void validate() const;

  friend bool operator==(const ScalingRegime&, const ScalingRegime&) = default;
};

/// Gamma(x, y), gamma(x), sigma(x) used by the accelerated regime.
struct Acceleration {
  RateForm Gamma = RateForm::constant(0.0);
  TraitForm gamma = TraitForm::constant(0.0);
  TraitForm sigma = TraitForm::constant(0.0);

  friend bool operator==(const Acceleration&, const Acceleration&) = default;
};

/// Bounds B <= birth, D <= death * max(n, 1), alpha <= selection * max(n, 1),
/// U <= kernel, M(x, .) <= mutation * Mbar with Mbar = N(0, mutation_sd^2 Id).
/// NaN means "not supplied": validation fills it from the sampled supremum.
struct Envelopes {
  static constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();
  double birth = kUnset;
  double death = kUnset;
  double selection = kUnset;
  double kernel = kUnset;
  double mutation = kUnset;
  double mutation_sd = kUnset;
};

/// Effective scale factors applied by channel_rates. All ones and zeros for the raw process.
struct EffectiveScaling {
  ScalingRegime regime;
  double individual_accel = 0.0;          // K^eta, multiplies Gamma
  std::array<double, 2> cell_accel{};     // K_i, multiplies gamma
};

struct ModelParams {
  TraitBox box = TraitBox::unit(1);
  RateForm birth = RateForm::constant(0.0);
  RateForm death = RateForm::constant(0.0);
  RateForm selection = RateForm::constant(0.0);
  KernelForm competition = KernelForm::constant(0.0);
  TraitForm mutation_prob = TraitForm::constant(0.0);
  TraitForm mutation_sd = TraitForm::constant(0.1);
  std::array<TraitForm, 2> cell_birth{TraitForm::constant(0.0), TraitForm::constant(0.0)};
  std::array<TraitForm, 2> cell_death{TraitForm::constant(0.0), TraitForm::constant(0.0)};
  std::array<TraitForm, 2> cell_competition{TraitForm::constant(0.0), TraitForm::constant(0.0)};
  std::array<std::array<double, 2>, 2> lambda{};
  std::optional<Acceleration> acceleration;
  Envelopes envelopes;
  EffectiveScaling scaling;
  bool validated = false;
  /// Sampled ranges of r_i = b_i - d_i on the trait lattice.
  std::array<double, 2> r_min{};
  std::array<double, 2> r_max{};

  double net_cell_growth(std::size_t i, const Trait& x) const { return cell_birth[i](x) - cell_death[i](x); }
};

enum class Channel : std::size_t {
  ClonalBirth = 0,
  MutantBirth = 1,
  Death = 2,
  CellBirth1 = 3,
  CellBirth2 = 4,
  CellDeath1 = 5,
  CellDeath2 = 6,
};

inline constexpr std::size_t kChannelCount = 7;

std::string_view channel_name(Channel c);

struct ChannelRates {
  std::array<double, kChannelCount> rate{};

  double operator[](Channel c) const noexcept { return rate[static_cast<std::size_t>(c)]; }
  double& operator[](Channel c) noexcept { return rate[static_cast<std::size_t>(c)]; }
  double total() const noexcept;

  friend bool operator==(const ChannelRates&, const ChannelRates&) = default;
};

/// Per-individual quantities that depend on the trait only, with scaling already applied.
struct TraitCoefficients {
  double p = 0.0;
  double mutation_sd = 0.0;
  std::array<double, 2> b{};      // K_i gamma + b_i
  std::array<double, 2> d{};      // K_i gamma + d_i
  std::array<double, 2> beta{};
};

TraitCoefficients trait_coefficients(const Trait& x, const ModelParams& params);

/// Individual-level rates B_kappa, D_kappa and alpha_kappa at raw cell counts.
struct IndividualRates {
  double birth = 0.0;
  double death = 0.0;
  double selection = 0.0;
};

IndividualRates individual_rates(const Trait& x, std::int64_t n1, std::int64_t n2, const ModelParams& params);

/// Cell death rate per cell of type i (before multiplying by n_i), with lambda_ij / K_j applied.
double cell_death_per_cell(std::size_t i, const TraitCoefficients& tc, std::int64_t n1, std::int64_t n2,
                           const ModelParams& params);

/// `competition_sum` is sum_j U(x - x^j) over the whole population, self term included, before
/// the 1/K factor.
ChannelRates channel_rates(const Individual& ind, double competition_sum, const ModelParams& params);
ChannelRates channel_rates(const Individual& ind, const TraitCoefficients& tc, double competition_sum,
                           const ModelParams& params);
ChannelRates channel_rates(const Individual& ind, const TraitCoefficients& tc, const IndividualRates& ir,
                           double competition_sum, const ModelParams& params);

/// Checks the envelope bounds on a deterministic lattice of at least 1000 points and returns
/// a copy with every envelope constant filled in.
ModelParams validate_params(const ModelParams& raw);

/// Lower bound on C in M(x, z) <= C Mbar(z) for the truncated Gaussian kernel on the box.
double truncated_gaussian_envelope(const TraitBox& box, double sd_min, double sd_max);

/// Probability that x + N(0, sd^2 Id) lands in the box.
double box_mass(const TraitBox& box, const Trait& x, double sd);

/// Draws the mutant trait x + z with z from the Gaussian kernel truncated to box - x,
/// by rejection against the envelope in params.envelopes.
Trait sample_mutant_trait(const Trait& x, double sd, const ModelParams& params, Rng& rng);
Trait sample_mutant_trait(const Trait& x, const ModelParams& params, Rng& rng);

inline constexpr std::size_t kRejectionLimit = 1'000'000;

}  // namespace twolevel
