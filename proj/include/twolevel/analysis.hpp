#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "twolevel/engine.hpp"
#include "twolevel/measure.hpp"
#include "twolevel/model.hpp"
#include "twolevel/population.hpp"
#include "twolevel/test_function.hpp"

namespace twolevel {

double pair(const Measure& m, const TestFunction& tf);

/// Smoothness the regime's drift needs from the cell part of tf: bounded for the raw process,
/// C1 under H2 (the limit drift has g'), C2 under H3 (it has the Laplacian). Mutation under H3
/// also needs f in C2.
Smoothness required_tier(RegimeTag tag);
/// Throws TierMismatch when tf is rougher than the regime requires.
void check_tier(const TestFunction& tf, const ModelParams& params);

/// E[h(x_c + z)] with z ~ N(0, sd^2) truncated to the box along coordinate c.
double truncated_gaussian_mean(double x, double lo, double hi, double sd, const ScalarForm& h, bool squared = false);

/// Drift and compensator of <Y, tf> at a state.
struct DriftQv {
  double drift = 0.0;
  double qv = 0.0;
};

/// From the channel rates of the population (incremental index values).
DriftQv rates_drift(const Population& pop, const TestFunction& tf);
/// From the generator written out term by term on the raw model functions and the regime.
DriftQv generator_drift(const std::vector<Individual>& members, const TestFunction& tf, const ModelParams& params);

/// Per-replicate martingale bookkeeping for a list of test functions, evaluated on the
/// observation grid. Between jumps the drift and compensator are constant and integrated exactly.
class MartingaleTracker : public EventObserver {
 public:
  struct Path {
    std::vector<double> pairing;
    std::vector<double> residual;
    std::vector<double> empirical_qv;
    std::vector<double> model_qv;   // integrated compensator of the jump process
    std::vector<double> limit_qv;   // integral of 2 Gamma <Y, tf^2> (zero without acceleration)
  };

  MartingaleTracker(const ModelParams& params, std::vector<TestFunction> tfs, std::vector<double> grid,
                    double horizon);

  void start(const Population& pop, double t0) override;
  void hold(const Population& pop, double t0, double t1) override;
  void jump(const Population& pop, const Event& ev) override;

  const std::vector<Path>& paths() const noexcept { return paths_; }
  const std::vector<double>& grid() const noexcept { return grid_; }

 private:
  struct Parts {
    double drift_a = 0.0, drift_b = 0.0, qv_a = 0.0, qv_b = 0.0, limit = 0.0;
  };
  Parts contribution(const Individual& ind, const TestFunction& tf) const;
  void recompute(const Population& pop);
  double value(const Individual& ind, const TestFunction& tf) const;

  const ModelParams& params_;
  std::vector<TestFunction> tfs_;
  std::vector<double> grid_;
  double horizon_;
  std::size_t next_ = 0;
  std::uint64_t since_recompute_ = 0;
  bool mean_field_ = true;
  std::vector<Parts> sums_;
  std::vector<double> current_, initial_, drift_int_, emp_qv_, model_qv_, limit_qv_;
  std::vector<Path> paths_;
};

struct MartingaleReport {
  std::string test_function;
  std::vector<double> times;
  std::vector<std::vector<double>> residuals;  // per replicate
  std::vector<double> mean;
  std::vector<double> se;
  std::vector<double> empirical_qv;  // cross-replicate means
  std::vector<double> model_qv;
  std::vector<double> limit_qv;
};

/// Aggregates tracker paths of test function `k` over replicates, in replicate order.
MartingaleReport martingale_report(const std::vector<const MartingaleTracker*>& trackers, std::size_t k);

/// Replays a recorded event log from `init` and returns the residual report of one replicate.
MartingaleReport martingale_residuals(const std::vector<Individual>& init, const Trajectory& traj,
                                      const TestFunction& tf, const ModelParams& params,
                                      const std::vector<double>& grid, double horizon);

/// Drift of the large-population limit at a deterministic measure (first-order in y, needs C1 g).
double limit_drift(const Measure& v, const TestFunction& tf, const ModelParams& params);

/// Residual of a deterministic measure path against the limit drift, trapezoidal in time.
std::vector<double> deterministic_residuals(const std::vector<double>& times, const std::vector<Measure>& path,
                                            const TestFunction& tf, const ModelParams& params);

/// max over tfs of |<mA, tf> - <mB, tf>| with each tf divided by max(1, sup|tf|) on the box
/// and the cell range spanned by the two measures.
double weak_distance(const Measure& a, const Measure& b, const std::vector<TestFunction>& tfs, const TraitBox& box);

struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t resamples = 0;
};

struct ScalingSeries {
  double K = 0.0;
  std::vector<double> samples;  // replicate values of the statistic
};

/// Least-squares slope of log variance against log K. Bootstrap resamples replicates within
/// each K; 95% percentile interval.
ScalingFit scaling_exponent_fit(const std::vector<ScalingSeries>& series, std::size_t resamples = 1000,
                                std::uint64_t seed = 1);
/// Same fit from precomputed (K, variance) pairs; the interval comes from resampling residuals.
ScalingFit scaling_exponent_fit(const std::vector<std::pair<double, double>>& k_variance,
                                std::size_t resamples = 1000, std::uint64_t seed = 1);

double sample_variance(const std::vector<double>& v);

}  // namespace twolevel
