#include "twolevel/population.hpp"

#include <algorithm>
#include <cmath>

namespace twolevel {

Population::Population(const ModelParams& params, std::size_t tree_threshold)
    : params_(&params),
      mean_field_(params.competition.is_constant()),
      base_(tree_threshold),
      alpha_(tree_threshold) {}

Population::Population(const ModelParams& params, const std::vector<Individual>& members,
                       std::size_t tree_threshold)
    : Population(params, tree_threshold) {
  members_ = members;
  coeffs_.reserve(members.size());
  for (const auto& m : members) coeffs_.push_back(trait_coefficients(m.trait, params));
  rebuild();
}

double Population::field_factor() const noexcept {
  return params_->competition.u0 * static_cast<double>(members_.size()) / params_->scaling.regime.K;
}

double Population::competition_sum(std::size_t i) const noexcept {
  if (mean_field_) return params_->competition.u0 * static_cast<double>(members_.size());
  return comp_[i];
}

ChannelRates Population::rates(std::size_t i) const {
  ChannelRates r = cached_[i];
  if (mean_field_) r[Channel::Death] += selection_[i] * field_factor();
  return r;
}

double Population::total_rate() const noexcept {
  if (members_.empty()) return 0.0;
  double t = base_.total();
  if (mean_field_) t += field_factor() * alpha_.total();
  return t;
}

std::array<double, kChannelCount> Population::channel_totals() const {
  std::array<double, kChannelCount> out{};
  for (std::size_t i = 0; i < members_.size(); ++i) {
    const ChannelRates r = rates(i);
    for (std::size_t c = 0; c < kChannelCount; ++c) out[c] += r.rate[c];
  }
  return out;
}

Population::Selection Population::select(double u) const {
  const double b = base_.total();
  if (mean_field_ && u >= b && alpha_.total() > 0.0 && field_factor() > 0.0) {
    const auto [i, rem] = alpha_.find((u - b) / field_factor());
    (void)rem;
    return {i, Channel::Death};
  }
  const auto [i, rem] = base_.find(u);
  const ChannelRates& r = cached_[i];
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    if (r.rate[c] <= 0.0) continue;
    acc += r.rate[c];
    last = c;
    if (rem < acc) return {i, static_cast<Channel>(c)};
  }
  return {i, static_cast<Channel>(last)};
}

void Population::refresh(std::size_t i) {
  const Individual& ind = members_[i];
  const IndividualRates ir = individual_rates(ind.trait, ind.n1, ind.n2, *params_);
  if (mean_field_) {
    cached_[i] = channel_rates(ind, coeffs_[i], ir, 0.0, *params_);
    selection_[i] = ir.selection;
    base_.set(i, cached_[i].total());
    alpha_.set(i, ir.selection);
  } else {
    cached_[i] = channel_rates(ind, coeffs_[i], ir, comp_[i], *params_);
    selection_[i] = ir.selection;
    base_.set(i, cached_[i].total());
  }
}

void Population::add(const Individual& ind) { add(ind, trait_coefficients(ind.trait, *params_)); }

void Population::add(const Individual& ind, const TraitCoefficients& tc) {
  members_.push_back(ind);
  coeffs_.push_back(tc);
  cached_.emplace_back();
  selection_.push_back(0.0);
  base_.push_back(0.0);
  const std::int64_t n = ind.n1 + ind.n2;
  sum_n1_ += ind.n1;
  sum_n2_ += ind.n2;
  sum_nsq_ += n * n;
  sum_n1sq_ += ind.n1 * ind.n1;
  sum_n2sq_ += ind.n2 * ind.n2;
  const std::size_t j = members_.size() - 1;
  if (mean_field_) {
    alpha_.push_back(0.0);
    refresh(j);
    return;
  }
  const double K = params_->scaling.regime.K;
  double own = 0.0;
  for (std::size_t k = 0; k < j; ++k) {
    const double u = params_->competition(members_[k].trait - ind.trait);
    own += params_->competition(ind.trait - members_[k].trait);
    comp_[k] += u;
    cached_[k][Channel::Death] += selection_[k] * u / K;
  }
  own += params_->competition(ind.trait - ind.trait);
  comp_.push_back(own);
  std::vector<double> w(j + 1);
  for (std::size_t k = 0; k < j; ++k) w[k] = cached_[k].total();
  if (base_.tree_mode()) {
    refresh(j);
    w[j] = cached_[j].total();
    base_.assign(w);
  } else {
    for (std::size_t k = 0; k < j; ++k) base_.set(k, w[k]);
    refresh(j);
  }
}

void Population::remove(std::size_t i) {
  const Individual gone = members_[i];
  const std::int64_t n = gone.n1 + gone.n2;
  sum_n1_ -= gone.n1;
  sum_n2_ -= gone.n2;
  sum_nsq_ -= n * n;
  sum_n1sq_ -= gone.n1 * gone.n1;
  sum_n2sq_ -= gone.n2 * gone.n2;
  const std::size_t last = members_.size() - 1;
  if (i != last) {
    members_[i] = members_[last];
    coeffs_[i] = coeffs_[last];
    cached_[i] = cached_[last];
    selection_[i] = selection_[last];
    base_.set(i, base_.get(last));
    if (mean_field_) alpha_.set(i, alpha_.get(last));
    else comp_[i] = comp_[last];
  }
  members_.pop_back();
  coeffs_.pop_back();
  cached_.pop_back();
  selection_.pop_back();
  base_.pop_back();
  if (mean_field_) {
    alpha_.pop_back();
    return;
  }
  comp_.pop_back();
  const double K = params_->scaling.regime.K;
  std::vector<double> w(members_.size());
  for (std::size_t k = 0; k < members_.size(); ++k) {
    const double u = params_->competition(members_[k].trait - gone.trait);
    comp_[k] -= u;
    cached_[k][Channel::Death] = std::max(0.0, cached_[k][Channel::Death] - selection_[k] * u / K);
    w[k] = cached_[k].total();
  }
  if (base_.tree_mode()) {
    base_.assign(w);
  } else {
    for (std::size_t k = 0; k < w.size(); ++k) base_.set(k, w[k]);
  }
}

void Population::set_cells(std::size_t i, std::int64_t n1, std::int64_t n2) {
  Individual& ind = members_[i];
  const std::int64_t before = ind.n1 + ind.n2;
  const std::int64_t after = n1 + n2;
  sum_n1_ += n1 - ind.n1;
  sum_n2_ += n2 - ind.n2;
  sum_nsq_ += after * after - before * before;
  sum_n1sq_ += n1 * n1 - ind.n1 * ind.n1;
  sum_n2sq_ += n2 * n2 - ind.n2 * ind.n2;
  ind.n1 = n1;
  ind.n2 = n2;
  refresh(i);
}

double Population::brute_force_total_rate() const {
  double total = 0.0;
  const double constant_sum = params_->competition.u0 * static_cast<double>(members_.size());
  for (std::size_t i = 0; i < members_.size(); ++i) {
    double comp = constant_sum;
    if (!mean_field_) {
      comp = 0.0;
      for (const auto& other : members_) comp += params_->competition(members_[i].trait - other.trait);
    }
    total += channel_rates(members_[i], comp, *params_).total();
  }
  return total;
}

double Population::audit() const {
  const double cached = total_rate();
  const double fresh = brute_force_total_rate();
  if (fresh == 0.0) return cached == 0.0 ? 0.0 : 1.0;
  return std::abs(cached - fresh) / std::abs(fresh);
}

void Population::rebuild() {
  const std::size_t n = members_.size();
  cached_.assign(n, ChannelRates{});
  selection_.assign(n, 0.0);
  sum_n1_ = sum_n2_ = sum_nsq_ = sum_n1sq_ = sum_n2sq_ = 0;
  for (const auto& m : members_) {
    sum_n1sq_ += m.n1 * m.n1;
    sum_n2sq_ += m.n2 * m.n2;
    sum_n1_ += m.n1;
    sum_n2_ += m.n2;
    sum_nsq_ += (m.n1 + m.n2) * (m.n1 + m.n2);
  }
  std::vector<double> w(n, 0.0), a(n, 0.0);
  if (!mean_field_) {
    comp_.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) comp_[i] += params_->competition(members_[i].trait - members_[k].trait);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Individual& ind = members_[i];
    const IndividualRates ir = individual_rates(ind.trait, ind.n1, ind.n2, *params_);
    cached_[i] = channel_rates(ind, coeffs_[i], ir, mean_field_ ? 0.0 : comp_[i], *params_);
    selection_[i] = ir.selection;
    w[i] = cached_[i].total();
    a[i] = ir.selection;
  }
  base_.assign(w);
  if (mean_field_) alpha_.assign(a);
}

double competition_field(const Trait& x, const Population& pop) {
  const ModelParams& params = pop.params();
  double s = 0.0;
  for (const auto& m : pop.members()) s += params.competition(x - m.trait);
  return s / params.scaling.regime.K;
}

}  // namespace twolevel
