#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "twolevel/model.hpp"
#include "twolevel/population.hpp"
#include "twolevel/rng.hpp"
#include "twolevel/test_function.hpp"

namespace twolevel {

struct Event {
  Channel kind = Channel::ClonalBirth;
  std::size_t actor = 0;
  double time = 0.0;
  Trait offset;           // mutant births only
  Individual before;      // actor before the jump
  Individual after;       // actor after a cell event; newborn for births; removed individual for deaths
};

/// Receives the piecewise-constant path: `hold` covers [t0, t1) with the
/// population as it is, `jump` follows every applied event.
class EventObserver {
 public:
  virtual ~EventObserver() = default;
  virtual void start(const Population&, double /*t0*/) {}
  virtual void hold(const Population&, double /*t0*/, double /*t1*/) {}
  virtual void jump(const Population&, const Event&) {}
};

/// Exact event-driven simulation of one replicate (Gillespie direct method).
class Simulation {
 public:
  Simulation(const ModelParams& params, const std::vector<Individual>& init, std::uint64_t seed,
             std::size_t tree_threshold = 128);

  const Population& population() const noexcept { return pop_; }
  Population& population() noexcept { return pop_; }
  double time() const noexcept { return time_; }
  std::uint64_t event_count() const noexcept { return events_; }
  Rng& rng() noexcept { return rng_; }
  double total_rate() const noexcept { return pop_.total_rate(); }

  /// Waits Exp(total rate), then applies one transition. Throws Extinct when the total rate is 0.
  Event step();

  /// Draws the holding time of the current state (infinite when the total rate is 0).
  double draw_holding_time();
  /// Picks a channel with probability rate / total and applies it at time t.
  Event fire(double t);

 private:
  const ModelParams& params_;
  Population pop_;
  Rng rng_;
  double time_ = 0.0;
  std::uint64_t events_ = 0;
};

struct MomentCeilings {
  double mass = 1e9;            // ceiling on <Y, 1>
  double second_moment = 1e12;  // ceiling on <Y, y1^2 + y2^2>
};

struct SimulationOptions {
  double horizon = 1.0;
  std::vector<double> grid;                   // observation times in [0, horizon]
  std::uint64_t event_budget = 1'000'000'000ULL;
  std::uint64_t audit_interval = 10'000;
  double audit_tolerance = 1e-9;
  std::size_t tree_threshold = 128;
  bool record_events = false;
  bool record_snapshots = false;
  std::vector<TestFunction> pairings;         // evaluated on the rescaled measure
  MomentCeilings ceilings;
};

struct Observation {
  double time = 0.0;
  std::size_t individuals = 0;
  std::int64_t n1 = 0;
  std::int64_t n2 = 0;
  std::int64_t n_squared = 0;   // sum_i (n1 + n2)^2
  double mass = 0.0;            // <Y, 1> = I / K
  double cells1 = 0.0;          // <Y, y1>
  double cells2 = 0.0;          // <Y, y2>
  double second_moment = 0.0;   // <Y, y1^2 + y2^2>
  std::vector<double> pairings;
};

struct Trajectory {
  std::uint64_t seed = 0;
  std::vector<Observation> observations;
  std::uint64_t events = 0;
  bool extinct = false;
  double extinction_time = std::numeric_limits<double>::infinity();
  std::uint64_t events_after_extinction = 0;
  double max_audit_deviation = 0.0;
  std::uint64_t audits = 0;
  double sup_mass = 0.0;
  double sup_second_moment = 0.0;
  bool moment_flag = false;
  std::string moment_flag_reason;
  std::vector<Event> events_log;
  std::vector<std::vector<Individual>> snapshots;  // one per observation when requested
  std::vector<Individual> final_state;
};

/// Evenly spaced grid 0, T/n, ..., T.
std::vector<double> uniform_grid(double horizon, std::size_t intervals);

Observation observe(const Population& pop, double t, const std::vector<TestFunction>& pairings);

/// Runs one replicate up to the horizon or extinction. Deterministic in (params, init, options, seed).
Trajectory simulate(const ModelParams& params, const std::vector<Individual>& init, const SimulationOptions& options,
                    std::uint64_t seed, EventObserver* observer = nullptr);

using InitSampler = std::function<std::vector<Individual>(std::size_t replicate, Rng& rng)>;
using ObserverFactory = std::function<std::unique_ptr<EventObserver>(std::size_t replicate)>;

struct ReplicateResult {
  Trajectory trajectory;
  std::unique_ptr<EventObserver> observer;
};

/// Runs `count` replicates with seeds replicate_seed(master, r), spread over `threads`
/// workers. Results are ordered by replicate index.
std::vector<ReplicateResult> run_replicates(const ModelParams& params, const InitSampler& init,
                                            const SimulationOptions& options, std::uint64_t master_seed,
                                            std::size_t count, std::size_t threads = 1,
                                            const ObserverFactory& make_observer = {});

}  // namespace twolevel
