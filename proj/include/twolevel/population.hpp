#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "twolevel/model.hpp"
#include "twolevel/rate_index.hpp"
#include "twolevel/trait.hpp"

namespace twolevel {

/// Finite collection of individuals with incrementally maintained rates.
///
/// With a constant competition kernel (mean-field) the competition sum is
/// U0 * I for everybody, so the selection part of every death rate is kept in
/// a separate index and scaled by one global factor; individual births and
/// deaths then cost O(1) index updates. Otherwise each individual carries its
/// own competition sum, updated in O(I) on individual births and deaths and
/// untouched by cell events.
class Population {
 public:
  struct Selection {
    std::size_t index = 0;
    Channel channel = Channel::ClonalBirth;
  };

  explicit Population(const ModelParams& params, std::size_t tree_threshold = 128);
  Population(const ModelParams& params, const std::vector<Individual>& members,
             std::size_t tree_threshold = 128);

  const ModelParams& params() const noexcept { return *params_; }
  bool mean_field() const noexcept { return mean_field_; }

  std::size_t size() const noexcept { return members_.size(); }
  bool empty() const noexcept { return members_.empty(); }
  const Individual& operator[](std::size_t i) const noexcept { return members_[i]; }
  const std::vector<Individual>& members() const noexcept { return members_; }
  const TraitCoefficients& coefficients(std::size_t i) const noexcept { return coeffs_[i]; }

  /// sum_j U(x^i - x^j) over all members, self term included, before the 1/K factor.
  double competition_sum(std::size_t i) const noexcept;
  ChannelRates rates(std::size_t i) const;

  double total_rate() const noexcept;
  std::array<double, kChannelCount> channel_totals() const;

  /// Maps u in [0, total_rate()) to an (individual, channel) pair.
  Selection select(double u) const;

  void add(const Individual& ind);
  void add(const Individual& ind, const TraitCoefficients& tc);
  /// Removes member i by moving the last member into its slot.
  void remove(std::size_t i);
  void set_cells(std::size_t i, std::int64_t n1, std::int64_t n2);

  std::int64_t sum_n1() const noexcept { return sum_n1_; }
  std::int64_t sum_n2() const noexcept { return sum_n2_; }
  /// sum_i (n1^i + n2^i)^2
  std::int64_t sum_n_squared() const noexcept { return sum_nsq_; }
  std::int64_t sum_n1_squared() const noexcept { return sum_n1sq_; }
  std::int64_t sum_n2_squared() const noexcept { return sum_n2sq_; }

  /// Relative deviation between the cached total rate and a from-scratch recomputation.
  double audit() const;
  /// Recomputes competition sums, cached rates and indices from scratch.
  void rebuild();

  /// Total rate computed from scratch (double loop over pairs unless the kernel is constant).
  double brute_force_total_rate() const;

 private:
  double field_factor() const noexcept;
  void refresh(std::size_t i);
  double base_weight(const ChannelRates& r) const noexcept { return r.total(); }

  const ModelParams* params_;
  bool mean_field_;
  std::vector<Individual> members_;
  std::vector<TraitCoefficients> coeffs_;
  std::vector<ChannelRates> cached_;   // death entry holds D only in mean-field mode
  std::vector<double> selection_;      // alpha_i, mean-field mode
  std::vector<double> comp_;           // competition sums, pairwise mode
  RateIndex base_;
  RateIndex alpha_;
  std::int64_t sum_n1_ = 0;
  std::int64_t sum_n2_ = 0;
  std::int64_t sum_nsq_ = 0;
  std::int64_t sum_n1sq_ = 0;
  std::int64_t sum_n2sq_ = 0;
};

/// sum_j U(x - x^j) / K over every member of pop (the focal individual's own U(0) included
/// when x is a member's trait).
double competition_field(const Trait& x, const Population& pop);

}  // namespace twolevel
