#include "twolevel/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "twolevel/error.hpp"

namespace twolevel {

Simulation::Simulation(const ModelParams& params, const std::vector<Individual>& init, std::uint64_t seed,
                       std::size_t tree_threshold)
    : params_(params), pop_(params, init, tree_threshold), rng_(seed) {}

double Simulation::draw_holding_time() {
  const double rate = pop_.total_rate();
  if (!(rate > 0.0)) return std::numeric_limits<double>::infinity();
  return rng_.exponential(rate);
}

Event Simulation::fire(double t) {
  const double rate = pop_.total_rate();
  const auto sel = pop_.select(rng_.uniform() * rate);
  Event ev;
  ev.kind = sel.channel;
  ev.actor = sel.index;
  ev.time = t;
  ev.before = pop_[sel.index];
  const Individual& ind = ev.before;
  switch (sel.channel) {
    case Channel::ClonalBirth:
      ev.after = ind;
      pop_.add(ind, pop_.coefficients(sel.index));
      break;
    case Channel::MutantBirth: {
      const Trait y = sample_mutant_trait(ind.trait, pop_.coefficients(sel.index).mutation_sd, params_, rng_);
      ev.offset = y - ind.trait;
      ev.after = Individual{y, ind.n1, ind.n2};
      pop_.add(ev.after);
      break;
    }
    case Channel::Death:
      ev.after = ind;
      pop_.remove(sel.index);
      break;
    case Channel::CellBirth1:
      ev.after = Individual{ind.trait, ind.n1 + 1, ind.n2};
      pop_.set_cells(sel.index, ind.n1 + 1, ind.n2);
      break;
    case Channel::CellBirth2:
      ev.after = Individual{ind.trait, ind.n1, ind.n2 + 1};
      pop_.set_cells(sel.index, ind.n1, ind.n2 + 1);
      break;
    case Channel::CellDeath1:
      ev.after = Individual{ind.trait, ind.n1 - 1, ind.n2};
      pop_.set_cells(sel.index, ind.n1 - 1, ind.n2);
      break;
    case Channel::CellDeath2:
      ev.after = Individual{ind.trait, ind.n1, ind.n2 - 1};
      pop_.set_cells(sel.index, ind.n1, ind.n2 - 1);
      break;
  }
  time_ = t;
  ++events_;
  return ev;
}

Event Simulation::step() {
  if (!(pop_.total_rate() > 0.0)) throw Error(ErrorCode::Extinct, "total rate is zero");
  const double wait = draw_holding_time();
  return fire(time_ + wait);
}

std::vector<double> uniform_grid(double horizon, std::size_t intervals) {
  std::vector<double> g(intervals + 1);
  for (std::size_t k = 0; k <= intervals; ++k)
    g[k] = k == intervals ? horizon : horizon * static_cast<double>(k) / static_cast<double>(intervals);
  return g;
}

Observation observe(const Population& pop, double t, const std::vector<TestFunction>& pairings) {
  const auto& reg = pop.params().scaling.regime;
  Observation o;
  o.time = t;
  o.individuals = pop.size();
  o.n1 = pop.sum_n1();
  o.n2 = pop.sum_n2();
  o.n_squared = pop.sum_n_squared();
  o.mass = static_cast<double>(pop.size()) / reg.K;
  o.cells1 = static_cast<double>(pop.sum_n1()) / reg.K1 / reg.K;
  o.cells2 = static_cast<double>(pop.sum_n2()) / reg.K2 / reg.K;
  o.second_moment = (static_cast<double>(pop.sum_n1_squared()) / (reg.K1 * reg.K1) +
                     static_cast<double>(pop.sum_n2_squared()) / (reg.K2 * reg.K2)) /
                    reg.K;
  o.pairings.assign(pairings.size(), 0.0);
  for (std::size_t k = 0; k < pairings.size(); ++k) {
    double s = 0.0;
    for (const auto& m : pop.members())
      s += pairings[k](m.trait, static_cast<double>(m.n1) / reg.K1, static_cast<double>(m.n2) / reg.K2);
    o.pairings[k] = s / reg.K;
  }
  return o;
}

namespace {

void monitor(const Population& pop, const MomentCeilings& ceil, Trajectory& traj) {
  const auto& reg = pop.params().scaling.regime;
  const double mass = static_cast<double>(pop.size()) / reg.K;
  const double second = (static_cast<double>(pop.sum_n1_squared()) / (reg.K1 * reg.K1) +
                         static_cast<double>(pop.sum_n2_squared()) / (reg.K2 * reg.K2)) /
                        reg.K;
  traj.sup_mass = std::max(traj.sup_mass, mass);
  traj.sup_second_moment = std::max(traj.sup_second_moment, second);
  if (traj.moment_flag) return;
  if (!std::isfinite(mass) || mass > ceil.mass) {
    traj.moment_flag = true;
    traj.moment_flag_reason = "mass above ceiling";
  } else if (!std::isfinite(second) || second > ceil.second_moment) {
    traj.moment_flag = true;
    traj.moment_flag_reason = "second cell moment above ceiling";
  }
}

}  // namespace

Trajectory simulate(const ModelParams& params, const std::vector<Individual>& init, const SimulationOptions& options,
                    std::uint64_t seed, EventObserver* observer) {
  Simulation sim(params, init, seed, options.tree_threshold);
  Population& pop = sim.population();
  Trajectory traj;
  traj.seed = seed;
  const double T = options.horizon;
  std::vector<double> grid = options.grid;
  std::sort(grid.begin(), grid.end());
  std::size_t g = 0;

  auto record = [&](double t) {
    traj.observations.push_back(observe(pop, t, options.pairings));
    if (options.record_snapshots) traj.snapshots.push_back(pop.members());
  };

  if (observer) observer->start(pop, 0.0);
  monitor(pop, options.ceilings, traj);
  std::uint64_t since_audit = 0;

  while (true) {
    const double t = sim.time();
    if (pop.empty()) {
      traj.extinct = true;
      traj.extinction_time = t;
      // extinction is absorbing: the empty state must have zero total rate
      if (std::isfinite(sim.draw_holding_time())) ++traj.events_after_extinction;
      if (observer) observer->hold(pop, t, T);
      break;
    }
    const double wait = sim.draw_holding_time();
    const double next = t + wait;
    while (g < grid.size() && grid[g] < next && grid[g] <= T) record(grid[g++]);
    if (next > T) {
      if (observer) observer->hold(pop, t, T);
      break;
    }
    if (sim.event_count() >= options.event_budget)
      throw Error(ErrorCode::EventBudgetExceeded, "event budget of " + std::to_string(options.event_budget) +
                                                      " exhausted at t=" + std::to_string(t));
    if (observer) observer->hold(pop, t, next);
    Event ev = sim.fire(next);
    if (observer) observer->jump(pop, ev);
    if (options.record_events) traj.events_log.push_back(std::move(ev));
    monitor(pop, options.ceilings, traj);
    if (options.audit_interval > 0 && ++since_audit >= options.audit_interval) {
      since_audit = 0;
      traj.max_audit_deviation = std::max(traj.max_audit_deviation, pop.audit());
      ++traj.audits;
      pop.rebuild();
    }
  }
  while (g < grid.size() && grid[g] <= T) record(grid[g++]);
  traj.events = sim.event_count();
  traj.final_state = pop.members();
  return traj;
}

std::vector<ReplicateResult> run_replicates(const ModelParams& params, const InitSampler& init,
                                            const SimulationOptions& options, std::uint64_t master_seed,
                                            std::size_t count, std::size_t threads,
                                            const ObserverFactory& make_observer) {
  std::vector<ReplicateResult> out(count);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto worker = [&]() {
    while (!failed.load()) {
      const std::size_t r = next.fetch_add(1);
      if (r >= count) return;
      try {
        const std::uint64_t seed = replicate_seed(master_seed, r);
        Rng init_rng(mix_seed(seed ^ 0x5bd1e995ULL));
        const auto members = init(r, init_rng);
        if (make_observer) out[r].observer = make_observer(r);
        out[r].trajectory = simulate(params, members, options, seed, out[r].observer.get());
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
        return;
      }
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace twolevel
