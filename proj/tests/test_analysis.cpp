#include <cmath>

#include "doctest.h"
#include "test_support.hpp"
#include "twolevel/analysis.hpp"
#include "twolevel/error.hpp"
#include "twolevel/meanfield.hpp"
#include "twolevel/scaling.hpp"

using namespace twolevel;

namespace {

TestFunction tf_y1() { return {"y1", ScalarForm::constant(1.0), ScalarForm::identity()}; }
TestFunction tf_exp() {
  return {"exp", ScalarForm::constant(1.0), ScalarForm::exponential(1.0), ScalarForm::exponential(1.0)};
}
TestFunction tf_mixed() {
  return {"mixed", ScalarForm::gaussian(0.4, 0.3), ScalarForm::power(2), ScalarForm::exponential(0.5)};
}

ModelParams rich_params(KernelForm kernel) {
  ModelParams p;
  p.birth = RateForm::affine(1.0, 0.3, 0.1);
  p.death = RateForm::constant(0.4);
  p.selection = RateForm::affine(0.5, 0.1, 0.0);
  p.competition = kernel;
  p.mutation_prob = TraitForm::constant(0.2);
  p.mutation_sd = TraitForm::linear(0.05, 0.1);
  p.cell_birth = {TraitForm::constant(2.0), TraitForm::linear(1.0, 0.5)};
  p.cell_death = {TraitForm::constant(0.5), TraitForm::constant(0.2)};
  p.cell_competition = {TraitForm::constant(1.0), TraitForm::constant(0.5)};
  p.lambda = {{{2.0, 1.0}, {0.5, 1.0}}};
  p.acceleration = Acceleration{RateForm::affine(1.0, 0.2, 0.0), TraitForm::constant(0.3), TraitForm::constant(0.8)};
  return validate_params(p);
}

std::vector<Individual> random_state(Rng& rng, std::size_t n) {
  std::vector<Individual> v;
  for (std::size_t i = 0; i < n; ++i)
    v.push_back({Trait{rng.uniform()}, static_cast<std::int64_t>(rng.below(30)), static_cast<std::int64_t>(rng.below(30))});
  return v;
}

}  // namespace

TEST_CASE("pair: constant function, empty measure, single atom") {
  const Measure m{{Trait{0.2}, 1.0, 2.0, 1.5}, {Trait{0.7}, 0.0, 3.0, 0.5}};
  CHECK(pair(m, TestFunction::one()) == 2.0);
  CHECK(pair(Measure{}, tf_exp()) == 0.0);
  const TestFunction prod{"y1y2", ScalarForm::constant(1.0), ScalarForm::identity(), ScalarForm::identity()};
  CHECK(pair(Measure{{Trait{0.3}, 1.0, 2.0, 1.0}}, prod) == 2.0);
}

TEST_CASE("pair is additive over concatenated measures") {
  Rng rng(1);
  Measure a, b;
  for (int i = 0; i < 50; ++i) a.push_back({Trait{rng.uniform()}, rng.uniform(), rng.uniform(), rng.uniform()});
  for (int i = 0; i < 30; ++i) b.push_back({Trait{rng.uniform()}, rng.uniform(), rng.uniform(), rng.uniform()});
  Measure ab = a;
  ab.insert(ab.end(), b.begin(), b.end());
  for (const auto& tf : {tf_y1(), tf_exp(), tf_mixed()})
    CHECK(pair(ab, tf) == doctest::Approx(pair(a, tf) + pair(b, tf)).epsilon(1e-15));
}

TEST_CASE("rates view of the drift equals the generator written out") {
  Rng rng(2);
  const ModelParams base = rich_params(KernelForm::gaussian(1.0, 0.3));
  const std::vector<ModelParams> variants{
      base, rescale_params_h2(base, ScalingRegime{20, 10, 15, 1.0, RegimeTag::H2}),
      rescale_params_h3(base, ScalingRegime{20, 10, 15, 0.5, RegimeTag::H3Deterministic}),
      rescale_params_h2(rich_params(KernelForm::constant(0.7)), ScalingRegime{20, 10, 15, 1.0, RegimeTag::H2})};
  for (const auto& params : variants) {
    for (int trial = 0; trial < 10; ++trial) {
      const auto members = random_state(rng, 25);
      const Population pop(params, members);
      for (const auto& tf : {TestFunction::one(), tf_y1(), tf_exp(), tf_mixed()}) {
        const DriftQv a = rates_drift(pop, tf), b = generator_drift(members, tf, params);
        CHECK(a.drift == doctest::Approx(b.drift).epsilon(1e-9));
        CHECK(a.qv == doctest::Approx(b.qv).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("truncated Gaussian mean by quadrature") {
  // untruncated: E[exp(-a u)] = exp(-a x + a^2 sd^2 / 2)
  const double v = truncated_gaussian_mean(0.5, -10.0, 10.0, 0.2, ScalarForm::exponential(1.5));
  CHECK(v == doctest::Approx(std::exp(-0.75 + 1.5 * 1.5 * 0.04 / 2)).epsilon(1e-9));
  // truncated at the mean: E[u] = x + sd sqrt(2/pi)
  const double h = truncated_gaussian_mean(0.0, 0.0, 10.0, 0.3, ScalarForm::identity());
  CHECK(h == doctest::Approx(0.3 * std::sqrt(2.0 / M_PI)).epsilon(1e-6));
}

TEST_CASE("martingale residuals of the pure-birth process") {
  ModelParams p;
  p.birth = RateForm::constant(1.0);
  p = validate_params(p);
  const double T = 1.0;
  SimulationOptions opt;
  opt.horizon = T;
  opt.grid = uniform_grid(T, 10);
  const auto init = [](std::size_t, Rng&) { return std::vector<Individual>(10, Individual{Trait{0.5}, 0, 0}); };
  const auto results = run_replicates(p, init, opt, 11, 10000, 1, [&](std::size_t) {
    return std::make_unique<MartingaleTracker>(p, std::vector<TestFunction>{TestFunction::one()}, opt.grid, T);
  });
  std::vector<const MartingaleTracker*> trackers;
  for (const auto& r : results) trackers.push_back(static_cast<const MartingaleTracker*>(r.observer.get()));
  const MartingaleReport rep = martingale_report(trackers, 0);
  for (const auto& r : rep.residuals) CHECK(r.front() == 0.0);
  for (std::size_t g = 1; g < rep.times.size(); ++g) CHECK(std::abs(rep.mean[g]) <= 3.0 * rep.se[g]);
  // E <M>_t = int_0^t B E[I_s] ds = I0 (e^t - 1)
  const double exact = 10.0 * (std::exp(T) - 1.0);
  CHECK(std::abs(rep.empirical_qv.back() - exact) / exact < 0.1);
  CHECK(std::abs(rep.model_qv.back() - exact) / exact < 0.1);
  for (const auto* tr : trackers) {
    const auto& q = tr->paths()[0].empirical_qv;
    for (std::size_t g = 1; g < q.size(); ++g) CHECK(q[g] >= q[g - 1]);
    CHECK(q.front() >= 0.0);
  }
}

TEST_CASE("tracker and event-log replay agree") {
  const ModelParams params =
      rescale_params_h2(rich_params(KernelForm::gaussian(1.0, 0.3)), ScalingRegime{10, 5, 5, 1.0, RegimeTag::H2});
  Rng rng(3);
  const auto init = random_state(rng, 10);
  SimulationOptions opt;
  opt.horizon = 2.0;
  opt.grid = uniform_grid(2.0, 8);
  opt.record_events = true;
  opt.pairings = {tf_exp()};
  MartingaleTracker live(params, {tf_exp()}, opt.grid, opt.horizon);
  const Trajectory traj = simulate(params, init, opt, 5, &live);
  CHECK(traj.events > 0);
  const MartingaleReport replay = martingale_residuals(init, traj, tf_exp(), params, opt.grid, opt.horizon);
  const auto& path = live.paths()[0];
  REQUIRE(path.residual.size() == replay.residuals[0].size());
  for (std::size_t g = 0; g < path.residual.size(); ++g) {
    CHECK(path.residual[g] == doctest::Approx(replay.residuals[0][g]).epsilon(1e-12));
    CHECK(path.pairing[g] == doctest::Approx(traj.observations[g].pairings[0]).epsilon(1e-12));
  }
  CHECK(replay.residuals[0][0] == 0.0);
}

TEST_CASE("tier requirements") {
  const TestFunction rough{"capped", ScalarForm::constant(1.0), ScalarForm::capped(1.0)};
  const ModelParams base = rich_params(KernelForm::constant(1.0));
  CHECK_NOTHROW(check_tier(rough, base));
  const ModelParams h2 = rescale_params_h2(base, ScalingRegime{10, 10, 10, 1.0, RegimeTag::H2});
  CHECK_THROWS_WITH_AS(check_tier(rough, h2), doctest::Contains("TierMismatch"), Error);
  CHECK_THROWS_AS(MartingaleTracker(h2, {rough}, {0.0}, 1.0), Error);
  CHECK_NOTHROW(check_tier(tf_exp(), h2));
  const TestFunction rough_x{"capped-x", ScalarForm::capped(0.5)};
  const ModelParams h3 = rescale_params_h3(base, ScalingRegime{10, 10, 10, 0.5, RegimeTag::H3Deterministic});
  CHECK_THROWS_AS(check_tier(rough_x, h3), Error);
  CHECK_NOTHROW(check_tier(rough_x, h2));
  CHECK_THROWS_AS(limit_drift(Measure{{Trait{0.5}, 1, 1, 1}}, rough, base), Error);
}

TEST_CASE("deterministic input has zero residual") {
  ModelParams p;
  p.birth = RateForm::constant(1.0);
  p.death = RateForm::constant(0.5);
  p.selection = RateForm::constant(1.0);
  p.competition = KernelForm::constant(0.25);
  p.cell_birth = {TraitForm::constant(1.0), TraitForm::constant(1.0)};
  p.cell_competition = {TraitForm::constant(1.0), TraitForm::constant(1.0)};
  p.lambda = {{{2.0, 1.0}, {1.0, 2.0}}};
  p = validate_params(p);
  const Measure v0{{Trait{0.2}, 0.8, 0.1, 0.3}, {Trait{0.6}, 0.2, 0.9, 0.2}};
  const auto sol = meanfield_constant_solve(v0, p, 5.0, 0.005);
  for (const auto& tf : {TestFunction::one(), tf_y1(), tf_exp()}) {
    const auto r = deterministic_residuals(sol.times, sol.snapshots, tf, p);
    CHECK(r.front() == 0.0);
    for (double v : r) CHECK(std::abs(v) < 1e-5);
  }
}

TEST_CASE("weak distance") {
  const TraitBox box = TraitBox::unit(1);
  const std::vector<TestFunction> lip{{"cap", ScalarForm::constant(1.0), ScalarForm::capped(1.0)},
                                       {"one", ScalarForm::constant(1.0)}};
  const Measure a{{Trait{0.5}, 0.3, 0.2, 1.0}};
  CHECK(weak_distance(a, a, lip, box) == 0.0);
  const Measure b{{Trait{0.5}, 0.3 + 1e-3, 0.2, 1.0}};
  CHECK(weak_distance(a, b, lip, box) <= 1e-3 + 1e-15);
  Rng rng(4);
  Measure cloud, uniform;
  for (int i = 0; i < 40; ++i) cloud.push_back({Trait{rng.uniform()}, rng.uniform(), rng.uniform(), 0.025});
  uniform = cloud;
  for (auto& atom : uniform) atom.w = 1.0 / 40.0;
  CHECK(weak_distance(cloud, uniform, {tf_y1(), tf_exp(), tf_mixed()}, box) == 0.0);
}

TEST_CASE("scaling exponent fit") {
  std::vector<std::pair<double, double>> inv, flat;
  for (double K : {64.0, 256.0, 1024.0, 4096.0}) {
    inv.push_back({K, 3.0 / K});
    flat.push_back({K, 0.7});
  }
  const ScalingFit a = scaling_exponent_fit(inv);
  CHECK(std::abs(a.slope + 1.0) < 0.01);
  CHECK(a.ci_low <= a.slope + 1e-12);
  CHECK(a.ci_high >= a.slope - 1e-12);
  CHECK(std::abs(scaling_exponent_fit(flat).slope) < 1e-12);
  CHECK_THROWS_WITH_AS(scaling_exponent_fit({{64.0, 1.0}, {256.0, 0.0}, {1024.0, 1.0}}),
                       doctest::Contains("DegenerateSeries"), Error);
  CHECK_THROWS_AS(scaling_exponent_fit({{64.0, 1.0}, {256.0, 1.0}}), Error);

  Rng rng(5);
  std::vector<ScalingSeries> series;
  for (double K : {64.0, 256.0, 1024.0}) {
    ScalingSeries s{K, {}};
    for (int r = 0; r < 400; ++r) s.samples.push_back(rng.normal() * std::sqrt(2.0 / std::sqrt(K)));
    series.push_back(s);
  }
  const ScalingFit b = scaling_exponent_fit(series, 1000, 9);
  CHECK(b.resamples == 1000);
  CHECK(b.ci_low < -0.5);
  CHECK(b.ci_high > -0.5);
  CHECK(std::abs(b.slope + 0.5) < 0.15);
}
