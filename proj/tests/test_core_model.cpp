#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "twolevel/error.hpp"
#include "twolevel/model.hpp"
#include "twolevel/population.hpp"

using namespace twolevel;

namespace {

ModelParams with_birth(double b, double bbar) {
  ModelParams p;
  p.birth = RateForm::constant(b);
  p.envelopes.birth = bbar;
  return p;
}

ErrorCode code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::InvalidArgument;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

TEST_CASE("validate_params accepts a tight birth bound and rejects a violated one") {
  CHECK(validate_params(with_birth(2.0, 2.0)).validated);
  CHECK(code_of([] { validate_params(with_birth(2.0, 1.0)); }) == ErrorCode::EnvelopeViolated);
}

TEST_CASE("death rate n1 + n2 meets the per-cell bound with equality") {
  ModelParams p;
  p.death = RateForm::affine(0.0, 1.0, 1.0);
  p.envelopes.death = 1.0;
  CHECK_NOTHROW(validate_params(p));
  p.envelopes.death = 0.99;
  CHECK(code_of([&] { validate_params(p); }) == ErrorCode::EnvelopeViolated);
}

TEST_CASE("negative interaction entry is a bad matrix") {
  ModelParams p;
  p.lambda = {{{1.0, -0.1}, {0.0, 1.0}}};
  CHECK(code_of([&] { validate_params(p); }) == ErrorCode::BadMatrix);
}

TEST_CASE("validation fills unset envelopes with sampled suprema and records r_i") {
  ModelParams p;
  p.birth = RateForm::product(TraitForm::linear(1.0, 1.0), 1.0, 0.0, 0.0);
  p.competition = KernelForm::gaussian(0.7, 0.2);
  p.cell_birth = {TraitForm::constant(2.0), TraitForm::linear(1.0, 0.5)};
  p.cell_death = {TraitForm::constant(0.5), TraitForm::constant(1.0)};
  const ModelParams v = validate_params(p);
  CHECK(v.envelopes.birth == doctest::Approx(2.0));
  CHECK(v.envelopes.kernel == doctest::Approx(0.7));
  CHECK(v.r_min[0] == doctest::Approx(1.5));
  CHECK(v.r_max[0] == doctest::Approx(1.5));
  CHECK(v.r_min[1] == doctest::Approx(0.0));
  CHECK(v.r_max[1] == doctest::Approx(0.5));
}

TEST_CASE("mutation envelope below the truncation bound is rejected") {
  ModelParams p;
  p.mutation_prob = TraitForm::constant(0.5);
  p.mutation_sd = TraitForm::constant(0.1);
  p.envelopes.mutation = 1.5;  // truncation at a corner needs 2
  CHECK(code_of([&] { validate_params(p); }) == ErrorCode::EnvelopeViolated);
  p.envelopes.mutation = Envelopes::kUnset;
  const auto v = validate_params(p);
  CHECK(v.envelopes.mutation == doctest::Approx(1.0 / (normal_cdf(10.0) - 0.5)));
}

TEST_CASE("channel rates follow the transition list") {
  ModelParams p;
  p.birth = RateForm::constant(2.0);
  p.mutation_prob = TraitForm::constant(0.5);
  p.cell_death = {TraitForm::constant(1.0), TraitForm::constant(0.0)};
  p.cell_competition = {TraitForm::constant(1.0), TraitForm::constant(0.0)};
  p.lambda = {{{1.0, 0.0}, {0.0, 0.0}}};
  p = validate_params(p);

  const auto frozen = channel_rates(Individual{Trait{0.5}, 0, 0}, 0.0, p);
  CHECK(frozen[Channel::ClonalBirth] == 1.0);
  CHECK(frozen[Channel::MutantBirth] == 1.0);
  CHECK(frozen[Channel::CellBirth1] == 0.0);
  CHECK(frozen[Channel::CellDeath1] == 0.0);

  const auto r = channel_rates(Individual{Trait{0.5}, 3, 0}, 0.0, p);
  CHECK(r[Channel::CellDeath1] == 12.0);
}

TEST_CASE("all seven rates are nonnegative and pure on random states") {
  ModelParams p;
  p.birth = RateForm::product(TraitForm::gaussian(1.5, 0.3, 0.4), 1.0, 0.1, 0.2);
  p.death = RateForm::affine(0.1, 0.05, 0.02);
  p.selection = RateForm::proportion(TraitForm::constant(1.0), 0.2, 0.5);
  p.competition = KernelForm::gaussian(1.0, 0.3);
  p.mutation_prob = TraitForm::linear(0.1, 0.2);
  p.cell_birth = {TraitForm::constant(1.0), TraitForm::linear(0.5, 1.0)};
  p.cell_death = {TraitForm::constant(0.2), TraitForm::constant(0.3)};
  p.cell_competition = {TraitForm::constant(0.1), TraitForm::constant(0.2)};
  p.lambda = {{{1.0, 0.5}, {0.3, 1.0}}};
  p = validate_params(p);
  Rng rng(7);
  for (int k = 0; k < 2000; ++k) {
    const Individual ind{Trait{rng.uniform()}, static_cast<std::int64_t>(rng.below(60)),
                         static_cast<std::int64_t>(rng.below(60))};
    const double comp = 10.0 * rng.uniform();
    const auto a = channel_rates(ind, comp, p);
    const auto b = channel_rates(ind, comp, p);
    CHECK(a == b);
    for (double v : a.rate) CHECK(v >= 0.0);
    if (ind.n1 == 0) CHECK(a[Channel::CellBirth1] + a[Channel::CellDeath1] == 0.0);
    if (ind.n2 == 0) CHECK(a[Channel::CellBirth2] + a[Channel::CellDeath2] == 0.0);
  }
}

TEST_CASE("competition field examples") {
  ModelParams p;
  p.competition = KernelForm::gaussian(1.0, 0.2);
  p = validate_params(p);
  Population single(p, {Individual{Trait{0.4}, 0, 0}});
  CHECK(competition_field(Trait{0.4}, single) == 1.0);
  Population none(p);
  CHECK(competition_field(Trait{0.4}, none) == 0.0);

  ModelParams c;
  c.competition = KernelForm::constant(0.3);
  c = validate_params(c);
  std::vector<Individual> five(5, Individual{Trait{0.1}, 1, 1});
  Population pc(c, five);
  CHECK(competition_field(Trait{0.9}, pc) == doctest::Approx(1.5));
}

TEST_CASE("incremental competition sums match the brute-force double loop") {
  ModelParams p;
  p.birth = RateForm::constant(1.0);
  p.death = RateForm::constant(0.5);
  p.selection = RateForm::constant(1.0);
  p.competition = KernelForm::gaussian(1.0, 0.15);
  p = validate_params(p);
  Rng rng(11);
  Population pop(p);
  for (int k = 0; k < 600; ++k) pop.add(Individual{Trait{rng.uniform()}, 0, 0});
  for (int k = 0; k < 300; ++k) pop.remove(rng.below(pop.size()));
  for (int k = 0; k < 400; ++k) pop.add(Individual{Trait{rng.uniform()}, 0, 0});
  double worst = 0.0;
  for (std::size_t i = 0; i < pop.size(); ++i) {
    double brute = 0.0;
    for (std::size_t j = 0; j < pop.size(); ++j) brute += p.competition(pop[i].trait - pop[j].trait);
    worst = std::max(worst, std::abs(pop.competition_sum(i) - brute) / brute);
  }
  CHECK(worst < 1e-12);
  CHECK(pop.audit() < 1e-12);
}

TEST_CASE("zero measure has zero rates") {
  ModelParams p;
  p.birth = RateForm::constant(3.0);
  p.competition = KernelForm::constant(1.0);
  p = validate_params(p);
  Population pop(p);
  CHECK(pop.total_rate() == 0.0);
  for (double v : pop.channel_totals()) CHECK(v == 0.0);
}

TEST_CASE("mutant traits stay in the box and are centred in the interior") {
  ModelParams p;
  p.mutation_prob = TraitForm::constant(1.0);
  p.mutation_sd = TraitForm::constant(0.05);
  p = validate_params(p);
  Rng rng(3);
  const int n = 100000;
  double s = 0.0, s2 = 0.0;
  for (int k = 0; k < n; ++k) {
    const Trait y = sample_mutant_trait(Trait{0.5}, p, rng);
    REQUIRE(p.box.contains(y));
    const double z = y[0] - 0.5;
    s += z;
    s2 += z * z;
  }
  const double mean = s / n;
  const double se = std::sqrt((s2 / n - mean * mean) / n);
  CHECK(std::abs(mean) < 3.0 * se);
}

TEST_CASE("mutant traits near an edge follow the truncated Gaussian") {
  ModelParams p;
  p.mutation_prob = TraitForm::constant(1.0);
  p.mutation_sd = TraitForm::constant(0.2);
  p = validate_params(p);
  Rng rng(6);
  const int n = 50000;
  std::vector<double> draws(n);
  for (auto& v : draws) v = sample_mutant_trait(Trait{0.05}, p, rng)[0];
  std::sort(draws.begin(), draws.end());
  const double lo = normal_cdf((0.0 - 0.05) / 0.2), hi = normal_cdf((1.0 - 0.05) / 0.2);
  double ks = 0.0;
  for (int k = 0; k < n; ++k) {
    const double F = (normal_cdf((draws[k] - 0.05) / 0.2) - lo) / (hi - lo);
    ks = std::max({ks, std::abs(F - static_cast<double>(k) / n), std::abs(F - static_cast<double>(k + 1) / n)});
  }
  // 1% critical value of the one-sample KS statistic
  CHECK(ks < 1.63 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("box lattice spans the box with endpoints") {
  const TraitBox box{Trait{0.0, -1.0}, Trait{1.0, 1.0}};
  const auto pts = box.lattice(3);
  CHECK(pts.size() == 9);
  CHECK(pts.front() == Trait{0.0, -1.0});
  CHECK(pts.back() == Trait{1.0, 1.0});
  for (const auto& x : pts) CHECK(box.contains(x));
}
