#include <cmath>
#include <vector>

#include "doctest.h"
#include "test_support.hpp"
#include "twolevel/engine.hpp"
#include "twolevel/error.hpp"

using namespace twolevel;

namespace {

ModelParams birth_only(double b) {
  ModelParams p;
  p.birth = RateForm::constant(b);
  return validate_params(p);
}

ModelParams mixed_params(KernelForm kernel) {
  ModelParams p;
  p.birth = RateForm::affine(1.0, 0.02, 0.0);
  p.death = RateForm::affine(0.2, 0.0, 0.01);
  p.selection = RateForm::constant(0.02);
  p.competition = kernel;
  p.mutation_prob = TraitForm::constant(0.1);
  p.mutation_sd = TraitForm::constant(0.05);
  p.cell_birth = {TraitForm::constant(1.0), TraitForm::linear(0.5, 0.5)};
  p.cell_death = {TraitForm::constant(0.2), TraitForm::constant(0.1)};
  p.cell_competition = {TraitForm::constant(0.05), TraitForm::constant(0.05)};
  p.lambda = {{{1.0, 0.5}, {0.5, 1.0}}};
  return validate_params(p);
}

std::vector<Individual> cloud(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Individual> v;
  for (std::size_t i = 0; i < n; ++i)
    v.push_back({Trait{rng.uniform()}, static_cast<std::int64_t>(rng.below(10)), static_cast<std::int64_t>(rng.below(10))});
  return v;
}

}  // namespace

TEST_CASE("total rate examples") {
  const ModelParams p = birth_only(2.0);
  CHECK(Population(p).total_rate() == 0.0);
  CHECK(Population(p, {Individual{Trait{0.5}, 0, 0}}).total_rate() == 2.0);

  ModelParams q;
  q.birth = RateForm::constant(1.5);
  q.death = RateForm::constant(0.25);
  q.cell_birth = {TraitForm::constant(0.5), TraitForm::constant(0.0)};
  q = validate_params(q);
  const Individual one{Trait{0.3}, 2, 0};
  const double rho = Population(q, {one}).total_rate();
  CHECK(rho == doctest::Approx(2.75));
  CHECK(Population(q, {one, one, one}).total_rate() == doctest::Approx(3.0 * rho));
}

TEST_CASE("incremental total rate matches brute force in both index modes") {
  for (std::size_t threshold : {std::size_t{8}, std::size_t{4096}}) {
    for (KernelForm k : {KernelForm::constant(1.0), KernelForm::gaussian(1.0, 0.2)}) {
      const ModelParams p = mixed_params(k);
      Simulation sim(p, cloud(40, 1), 99, threshold);
      for (int e = 0; e < 3000 && sim.total_rate() > 0.0; ++e) sim.step();
      const double cached = sim.total_rate();
      const double fresh = sim.population().brute_force_total_rate();
      CHECK(std::abs(cached - fresh) <= 1e-9 * fresh);
    }
  }
}

TEST_CASE("clonal birth copies the parent exactly") {
  const ModelParams p = birth_only(1.0);
  Simulation sim(p, {Individual{Trait{0.25}, 4, 7}}, 1);
  const Event ev = sim.step();
  CHECK(ev.kind == Channel::ClonalBirth);
  REQUIRE(sim.population().size() == 2);
  CHECK(sim.population()[1] == Individual{Trait{0.25}, 4, 7});
  CHECK(sim.population()[0] == Individual{Trait{0.25}, 4, 7});
}

TEST_CASE("cell-1 birth changes only n1 of the actor") {
  ModelParams p;
  p.cell_birth = {TraitForm::constant(1.0), TraitForm::constant(0.0)};
  p = validate_params(p);
  Simulation sim(p, {Individual{Trait{0.1}, 3, 2}, Individual{Trait{0.9}, 0, 5}}, 2);
  const Event ev = sim.step();
  CHECK(ev.kind == Channel::CellBirth1);
  CHECK(ev.actor == 0);
  CHECK(sim.population()[0] == Individual{Trait{0.1}, 4, 2});
  CHECK(sim.population()[1] == Individual{Trait{0.9}, 0, 5});
}

TEST_CASE("death of a singleton empties the population") {
  ModelParams p;
  p.death = RateForm::constant(1.0);
  p = validate_params(p);
  Simulation sim(p, {Individual{Trait{0.5}, 1, 1}}, 3);
  const Event ev = sim.step();
  CHECK(ev.kind == Channel::Death);
  CHECK(sim.population().empty());
  CHECK(sim.total_rate() == 0.0);
  try {
    sim.step();
    FAIL("expected Extinct");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Extinct);
  }
}

TEST_CASE("pure death: mass nonincreasing, absorbed at zero") {
  ModelParams p;
  p.death = RateForm::constant(1.0);
  p = validate_params(p);
  SimulationOptions opt;
  opt.horizon = 20.0;
  opt.grid = uniform_grid(20.0, 200);
  const auto traj = simulate(p, std::vector<Individual>(20, Individual{Trait{0.5}, 0, 0}), opt, 5);
  CHECK(traj.extinct);
  CHECK(traj.events_after_extinction == 0);
  for (std::size_t k = 1; k < traj.observations.size(); ++k)
    CHECK(traj.observations[k].individuals <= traj.observations[k - 1].individuals);
  CHECK(traj.observations.back().individuals == 0);
  for (const auto& o : traj.observations)
    if (o.time >= traj.extinction_time) CHECK(o.individuals == 0);
}

TEST_CASE("all rates zero: trajectory stays at the initial state") {
  ModelParams p = validate_params(ModelParams{});
  SimulationOptions opt;
  opt.horizon = 5.0;
  opt.grid = uniform_grid(5.0, 5);
  const auto init = cloud(7, 4);
  const auto traj = simulate(p, init, opt, 1);
  CHECK(traj.events == 0);
  CHECK(traj.observations.size() == 6);
  for (const auto& o : traj.observations) CHECK(o.individuals == 7);
  CHECK(traj.final_state == init);
}

TEST_CASE("linear birth-death mean follows I0 e^{(B-D)t}") {
  ModelParams p;
  p.birth = RateForm::constant(2.0);
  p.death = RateForm::constant(1.0);
  p = validate_params(p);
  SimulationOptions opt;
  opt.horizon = 1.0;
  opt.grid = {0.5, 1.0};
  const auto runs = run_replicates(
      p, [](std::size_t, Rng&) { return std::vector<Individual>(5, Individual{Trait{0.5}, 0, 0}); }, opt, 2024, 10000);
  for (std::size_t g = 0; g < 2; ++g) {
    std::vector<double> v;
    for (const auto& r : runs) v.push_back(static_cast<double>(r.trajectory.observations[g].individuals));
    const auto ms = support::mean_se(v);
    const double expect = 5.0 * std::exp(opt.grid[g]);
    CHECK(std::abs(ms.mean - expect) < 3.0 * ms.se);
  }
}

TEST_CASE("identical seed and config give bit-identical trajectories") {
  const ModelParams p = mixed_params(KernelForm::gaussian(1.0, 0.3));
  SimulationOptions opt;
  opt.horizon = 3.0;
  opt.grid = uniform_grid(3.0, 30);
  opt.record_events = true;
  const auto a = simulate(p, cloud(30, 8), opt, 77);
  const auto b = simulate(p, cloud(30, 8), opt, 77);
  REQUIRE(a.events == b.events);
  REQUIRE(a.observations.size() == b.observations.size());
  for (std::size_t k = 0; k < a.observations.size(); ++k) {
    CHECK(a.observations[k].individuals == b.observations[k].individuals);
    CHECK(a.observations[k].n1 == b.observations[k].n1);
    CHECK(a.observations[k].n2 == b.observations[k].n2);
  }
  CHECK(a.final_state == b.final_state);
}

TEST_CASE("replicate results do not depend on the worker count") {
  const ModelParams p = mixed_params(KernelForm::constant(1.0));
  SimulationOptions opt;
  opt.horizon = 1.0;
  opt.grid = {1.0};
  auto init = [](std::size_t, Rng& rng) {
    std::vector<Individual> v;
    for (int i = 0; i < 10; ++i) v.push_back({Trait{rng.uniform()}, 3, 3});
    return v;
  };
  const auto one = run_replicates(p, init, opt, 5, 12, 1);
  const auto four = run_replicates(p, init, opt, 5, 12, 4);
  for (std::size_t r = 0; r < 12; ++r) {
    CHECK(one[r].trajectory.events == four[r].trajectory.events);
    CHECK(one[r].trajectory.final_state == four[r].trajectory.final_state);
  }
}

TEST_CASE("cache audits stay within 1e-9 over long runs") {
  for (KernelForm k : {KernelForm::constant(1.0), KernelForm::gaussian(1.0, 0.2)}) {
    const ModelParams p = mixed_params(k);
    SimulationOptions opt;
    opt.horizon = 8.0;
    opt.grid = {8.0};
    opt.audit_interval = 1000;
    opt.tree_threshold = 16;
    const auto traj = simulate(p, cloud(30, 3), opt, 17);
    CHECK(traj.audits > 5);
    CHECK(traj.max_audit_deviation <= 1e-9);
    CHECK_FALSE(traj.moment_flag);
  }
}

TEST_CASE("mutant births record an offset and land in the box") {
  ModelParams p;
  p.birth = RateForm::constant(1.0);
  p.mutation_prob = TraitForm::constant(1.0);
  p.mutation_sd = TraitForm::constant(0.2);
  p = validate_params(p);
  SimulationOptions opt;
  opt.horizon = 3.0;
  opt.grid = {3.0};
  opt.record_events = true;
  const auto traj = simulate(p, {Individual{Trait{0.02}, 0, 0}}, opt, 12);
  REQUIRE(!traj.events_log.empty());
  for (const auto& ev : traj.events_log) {
    CHECK(ev.kind == Channel::MutantBirth);
    CHECK(p.box.contains(ev.after.trait));
    CHECK(ev.after.trait == ev.before.trait + ev.offset);
  }
}

TEST_CASE("clonal-only parameters never sample a mutation") {
  ModelParams p;
  p.birth = RateForm::constant(1.0);
  p.death = RateForm::constant(0.5);
  p = validate_params(p);
  SimulationOptions opt;
  opt.horizon = 4.0;
  opt.grid = {4.0};
  opt.record_events = true;
  const auto traj = simulate(p, cloud(10, 2), opt, 1);
  for (const auto& ev : traj.events_log) CHECK(ev.kind != Channel::MutantBirth);
}

TEST_CASE("event budget guards runaway runs") {
  const ModelParams p = birth_only(5.0);
  SimulationOptions opt;
  opt.horizon = 100.0;
  opt.event_budget = 1000;
  try {
    simulate(p, {Individual{Trait{0.5}, 0, 0}}, opt, 1);
    FAIL("expected EventBudgetExceeded");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EventBudgetExceeded);
  }
}

TEST_CASE("moment monitor flags a crossed ceiling") {
  const ModelParams p = birth_only(1.0);
  SimulationOptions opt;
  opt.horizon = 3.0;
  opt.ceilings.mass = 5.0;
  const auto traj = simulate(p, {Individual{Trait{0.5}, 0, 0}}, opt, 3);
  CHECK(traj.sup_mass > 5.0);
  CHECK(traj.moment_flag);
}

TEST_CASE("law does not depend on storage order") {
  const ModelParams p = mixed_params(KernelForm::gaussian(1.0, 0.3));
  SimulationOptions opt;
  opt.horizon = 1.5;
  opt.grid = {1.5};
  const auto base = cloud(12, 21);
  auto reversed = base;
  std::reverse(reversed.begin(), reversed.end());
  const std::size_t n = 1000;
  auto a = run_replicates(p, [&](std::size_t, Rng&) { return base; }, opt, 101, n);
  auto b = run_replicates(p, [&](std::size_t, Rng&) { return reversed; }, opt, 202, n);
  std::vector<double> xa, xb, ya, yb;
  for (std::size_t r = 0; r < n; ++r) {
    xa.push_back(static_cast<double>(a[r].trajectory.observations[0].individuals));
    xb.push_back(static_cast<double>(b[r].trajectory.observations[0].individuals));
    ya.push_back(static_cast<double>(a[r].trajectory.observations[0].n1));
    yb.push_back(static_cast<double>(b[r].trajectory.observations[0].n1));
  }
  CHECK(support::ks_statistic(xa, xb) < support::ks_critical_1pct(n, n));
  CHECK(support::ks_statistic(ya, yb) < support::ks_critical_1pct(n, n));
}
