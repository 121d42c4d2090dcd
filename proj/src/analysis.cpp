#include "twolevel/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "twolevel/error.hpp"
#include "twolevel/lotka_volterra.hpp"
#include "twolevel/rng.hpp"

namespace twolevel {

namespace {

constexpr std::uint64_t kRecomputeInterval = 4096;

double cell_y(std::int64_t n, double Ki) { return static_cast<double>(n) / Ki; }

bool accelerated(const ModelParams& params) {
  const RegimeTag tag = params.scaling.regime.tag;
  return params.acceleration && (tag == RegimeTag::H3Deterministic || tag == RegimeTag::H3Super);
}

/// E[f(x+z)] and E[f(x+z)^2] along the test function's coordinate.
std::pair<double, double> mutant_moments(const Trait& x, double sd, const TestFunction& tf, const TraitBox& box) {
  const std::size_t c = tf.coord;
  const double lo = box.lower[c], hi = box.upper[c];
  return {truncated_gaussian_mean(x[c], lo, hi, sd, tf.f, false),
          truncated_gaussian_mean(x[c], lo, hi, sd, tf.f, true)};
}

}  // namespace

double pair(const Measure& m, const TestFunction& tf) {
  double s = 0.0;
  for (const auto& a : m) s += a.w * tf(a.x, a.y1, a.y2);
  return s;
}

Smoothness required_tier(RegimeTag tag) {
  switch (tag) {
    case RegimeTag::None: return Smoothness::Bounded;
    case RegimeTag::H2: return Smoothness::C1;
    case RegimeTag::H3Deterministic:
    case RegimeTag::H3Super: return Smoothness::C2;
  }
  return Smoothness::Bounded;
}

void check_tier(const TestFunction& tf, const ModelParams& params) {
  const RegimeTag tag = params.scaling.regime.tag;
  const Smoothness need = required_tier(tag);
  if (static_cast<int>(tf.cell_tier()) < static_cast<int>(need))
    throw Error(ErrorCode::TierMismatch, "test function '" + tf.name + "' has cell part of tier " +
                                             std::string(smoothness_name(tf.cell_tier())) + ", regime " +
                                             std::string(regime_name(tag)) + " needs " +
                                             std::string(smoothness_name(need)));
  if (need == Smoothness::C2 && static_cast<int>(tf.f.tier()) < static_cast<int>(Smoothness::C2)) {
    bool mutates = false;
    for (const Trait& x : params.box.lattice(11)) mutates = mutates || params.mutation_prob(x) > 0.0;
    if (mutates)
      throw Error(ErrorCode::TierMismatch, "test function '" + tf.name + "' needs a C2 trait part under mutation");
  }
}

double truncated_gaussian_mean(double x, double lo, double hi, double sd, const ScalarForm& h, bool squared) {
  auto val = [&](double u) {
    const double v = h(u);
    return squared ? v * v : v;
  };
  if (h.is_constant() || sd <= 0.0) return val(x);
  const double a = std::max(lo, x - 8.0 * sd), b = std::min(hi, x + 8.0 * sd);
  if (!(b > a)) return val(std::clamp(x, lo, hi));
  constexpr int n = 400;
  const double step = (b - a) / n;
  double num = 0.0, den = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double u = a + step * k;
    const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    const double z = (u - x) / sd;
    const double dens = w * std::exp(-0.5 * z * z);
    num += dens * val(u);
    den += dens;
  }
  return num / den;
}

DriftQv rates_drift(const Population& pop, const TestFunction& tf) {
  const ModelParams& params = pop.params();
  const auto& reg = params.scaling.regime;
  DriftQv out;
  for (std::size_t i = 0; i < pop.size(); ++i) {
    const Individual& ind = pop[i];
    const ChannelRates r = pop.rates(i);
    const double y1 = cell_y(ind.n1, reg.K1), y2 = cell_y(ind.n2, reg.K2);
    const double phi = tf(ind.trait, y1, y2), g = tf.g(y1, y2);
    const auto [m1, m2] = mutant_moments(ind.trait, pop.coefficients(i).mutation_sd, tf, params.box);
    const double up1 = tf(ind.trait, y1 + 1.0 / reg.K1, y2) - phi, dn1 = tf(ind.trait, y1 - 1.0 / reg.K1, y2) - phi;
    const double up2 = tf(ind.trait, y1, y2 + 1.0 / reg.K2) - phi, dn2 = tf(ind.trait, y1, y2 - 1.0 / reg.K2) - phi;
    out.drift += r[Channel::ClonalBirth] * phi + r[Channel::MutantBirth] * m1 * g - r[Channel::Death] * phi +
                 r[Channel::CellBirth1] * up1 + r[Channel::CellBirth2] * up2 + r[Channel::CellDeath1] * dn1 +
                 r[Channel::CellDeath2] * dn2;
    out.qv += (r[Channel::ClonalBirth] + r[Channel::Death]) * phi * phi + r[Channel::MutantBirth] * m2 * g * g +
              r[Channel::CellBirth1] * up1 * up1 + r[Channel::CellBirth2] * up2 * up2 +
              r[Channel::CellDeath1] * dn1 * dn1 + r[Channel::CellDeath2] * dn2 * dn2;
  }
  out.drift /= reg.K;
  out.qv /= reg.K * reg.K;
  return out;
}

DriftQv generator_drift(const std::vector<Individual>& members, const TestFunction& tf, const ModelParams& params) {
  const auto& reg = params.scaling.regime;
  const bool acc = accelerated(params);
  const double Keta = acc ? std::pow(reg.K, reg.eta) : 0.0;
  const std::array<double, 2> Kc{reg.K1, reg.K2};
  DriftQv out;
  for (const auto& ind : members) {
    const Trait& x = ind.trait;
    const double y1 = ind.n1 / reg.K1, y2 = ind.n2 / reg.K2;
    const double Gamma = acc ? params.acceleration->Gamma(x, y1, y2) : 0.0;
    const double gam = acc ? params.acceleration->gamma(x) : 0.0;
    const double B = params.birth(x, y1, y2) + Keta * Gamma;
    const double D = params.death(x, y1, y2) + Keta * Gamma;
    const double alpha = params.selection(x, y1, y2);
    double field = 0.0;
    for (const auto& other : members) field += params.competition(x - other.trait);
    field /= reg.K;
    const double p = std::clamp(params.mutation_prob(x), 0.0, 1.0);
    const double sd = acc ? params.acceleration->sigma(x) / std::sqrt(Keta) : params.mutation_sd(x);
    const double phi = tf(x, y1, y2), g = tf.g1(y1) * tf.g2(y2);
    const double Ef = truncated_gaussian_mean(x[tf.coord], params.box.lower[tf.coord], params.box.upper[tf.coord], sd,
                                              tf.f, false);
    const double Ef2 = truncated_gaussian_mean(x[tf.coord], params.box.lower[tf.coord], params.box.upper[tf.coord], sd,
                                               tf.f, true);
    double drift = (B * (1.0 - p) - (D + alpha * field)) * phi + p * B * Ef * g;
    double qv = (B * (1.0 - p) + D + alpha * field) * phi * phi + p * B * Ef2 * g * g;
    const std::array<double, 2> y{y1, y2};
    const std::array<double, 2> n{static_cast<double>(ind.n1), static_cast<double>(ind.n2)};
    for (std::size_t i = 0; i < 2; ++i) {
      const std::size_t j = 1 - i;
      const double birth = params.cell_birth[i](x) + Kc[i] * gam;
      const double death = params.cell_death[i](x) + Kc[i] * gam +
                           params.cell_competition[i](x) * (params.lambda[i][i] * y[i] + params.lambda[i][j] * y[j]);
      std::array<double, 2> up = y, down = y;
      up[i] += 1.0 / Kc[i];
      down[i] -= 1.0 / Kc[i];
      const double du = tf(x, up[0], up[1]) - phi, dd = tf(x, down[0], down[1]) - phi;
      drift += (du * birth + dd * death) * n[i];
      qv += (du * du * birth + dd * dd * death) * n[i];
    }
    out.drift += drift;
    out.qv += qv;
  }
  out.drift /= reg.K;
  out.qv /= reg.K * reg.K;
  return out;
}

MartingaleTracker::MartingaleTracker(const ModelParams& params, std::vector<TestFunction> tfs,
                                     std::vector<double> grid, double horizon)
    : params_(params), tfs_(std::move(tfs)), grid_(std::move(grid)), horizon_(horizon) {
  std::sort(grid_.begin(), grid_.end());
  for (const auto& tf : tfs_) check_tier(tf, params_);
  const std::size_t k = tfs_.size();
  sums_.assign(k, Parts{});
  current_.assign(k, 0.0);
  initial_.assign(k, 0.0);
  drift_int_.assign(k, 0.0);
  emp_qv_.assign(k, 0.0);
  model_qv_.assign(k, 0.0);
  limit_qv_.assign(k, 0.0);
  paths_.assign(k, Path{});
}

double MartingaleTracker::value(const Individual& ind, const TestFunction& tf) const {
  const auto& reg = params_.scaling.regime;
  return tf(ind.trait, cell_y(ind.n1, reg.K1), cell_y(ind.n2, reg.K2)) / reg.K;
}

MartingaleTracker::Parts MartingaleTracker::contribution(const Individual& ind, const TestFunction& tf) const {
  const auto& reg = params_.scaling.regime;
  const TraitCoefficients tc = trait_coefficients(ind.trait, params_);
  const IndividualRates ir = individual_rates(ind.trait, ind.n1, ind.n2, params_);
  const ChannelRates r = channel_rates(ind, tc, ir, 0.0, params_);
  const double per_unit = channel_rates(ind, tc, ir, 1.0, params_)[Channel::Death] - r[Channel::Death];
  const double y1 = cell_y(ind.n1, reg.K1), y2 = cell_y(ind.n2, reg.K2);
  const double phi = tf(ind.trait, y1, y2), g = tf.g(y1, y2);
  const auto [m1, m2] = mutant_moments(ind.trait, tc.mutation_sd, tf, params_.box);
  const double up1 = tf(ind.trait, y1 + 1.0 / reg.K1, y2) - phi, dn1 = tf(ind.trait, y1 - 1.0 / reg.K1, y2) - phi;
  const double up2 = tf(ind.trait, y1, y2 + 1.0 / reg.K2) - phi, dn2 = tf(ind.trait, y1, y2 - 1.0 / reg.K2) - phi;
  Parts p;
  p.drift_a = (r[Channel::ClonalBirth] * phi + r[Channel::MutantBirth] * m1 * g - r[Channel::Death] * phi +
               r[Channel::CellBirth1] * up1 + r[Channel::CellBirth2] * up2 + r[Channel::CellDeath1] * dn1 +
               r[Channel::CellDeath2] * dn2) /
              reg.K;
  p.drift_b = -per_unit * phi / reg.K;
  p.qv_a = ((r[Channel::ClonalBirth] + r[Channel::Death]) * phi * phi + r[Channel::MutantBirth] * m2 * g * g +
            r[Channel::CellBirth1] * up1 * up1 + r[Channel::CellBirth2] * up2 * up2 +
            r[Channel::CellDeath1] * dn1 * dn1 + r[Channel::CellDeath2] * dn2 * dn2) /
           (reg.K * reg.K);
  p.qv_b = per_unit * phi * phi / (reg.K * reg.K);
  if (params_.acceleration) p.limit = 2.0 * params_.acceleration->Gamma(ind.trait, y1, y2) * phi * phi / reg.K;
  return p;
}

void MartingaleTracker::recompute(const Population& pop) {
  for (std::size_t k = 0; k < tfs_.size(); ++k) {
    Parts s;
    for (std::size_t i = 0; i < pop.size(); ++i) {
      const Parts c = contribution(pop[i], tfs_[k]);
      s.limit += c.limit;
      if (mean_field_) {
        s.drift_a += c.drift_a;
        s.drift_b += c.drift_b;
        s.qv_a += c.qv_a;
        s.qv_b += c.qv_b;
      } else {
        const double comp = pop.competition_sum(i);
        s.drift_a += c.drift_a + comp * c.drift_b;
        s.qv_a += c.qv_a + comp * c.qv_b;
      }
    }
    sums_[k] = s;
  }
  since_recompute_ = 0;
}

void MartingaleTracker::start(const Population& pop, double) {
  mean_field_ = pop.mean_field();
  for (std::size_t k = 0; k < tfs_.size(); ++k) {
    double s = 0.0;
    for (const auto& ind : pop.members()) s += value(ind, tfs_[k]);
    current_[k] = initial_[k] = s;
  }
  recompute(pop);
}

void MartingaleTracker::hold(const Population& pop, double t0, double t1) {
  const double comp = mean_field_ ? params_.competition.u0 * static_cast<double>(pop.size()) : 0.0;
  const std::size_t first = next_;
  const bool final_hold = t1 >= horizon_;
  for (std::size_t k = 0; k < tfs_.size(); ++k) {
    const double drift = sums_[k].drift_a + comp * sums_[k].drift_b;
    const double qv = sums_[k].qv_a + comp * sums_[k].qv_b;
    const double limit = sums_[k].limit;
    std::size_t g = first;
    for (; g < grid_.size() && (grid_[g] < t1 || (final_hold && grid_[g] <= t1)); ++g) {
      const double dt = grid_[g] - t0;
      Path& path = paths_[k];
      path.pairing.push_back(current_[k]);
      path.residual.push_back(current_[k] - initial_[k] - (drift_int_[k] + drift * dt));
      path.empirical_qv.push_back(emp_qv_[k]);
      path.model_qv.push_back(model_qv_[k] + qv * dt);
      path.limit_qv.push_back(limit_qv_[k] + limit * dt);
    }
    if (k + 1 == tfs_.size()) next_ = g;
    drift_int_[k] += drift * (t1 - t0);
    model_qv_[k] += qv * (t1 - t0);
    limit_qv_[k] += limit * (t1 - t0);
  }
  if (tfs_.empty()) return;
}

void MartingaleTracker::jump(const Population& pop, const Event& ev) {
  for (std::size_t k = 0; k < tfs_.size(); ++k) {
    const TestFunction& tf = tfs_[k];
    double delta = 0.0;
    switch (ev.kind) {
      case Channel::ClonalBirth:
      case Channel::MutantBirth:
        delta = value(ev.after, tf);
        break;
      case Channel::Death:
        delta = -value(ev.after, tf);
        break;
      default:
        delta = value(ev.after, tf) - value(ev.before, tf);
        break;
    }
    current_[k] += delta;
    emp_qv_[k] += delta * delta;
    if (!mean_field_) continue;
    auto add = [&](const Individual& ind, double sign) {
      const Parts c = contribution(ind, tf);
      sums_[k].drift_a += sign * c.drift_a;
      sums_[k].drift_b += sign * c.drift_b;
      sums_[k].qv_a += sign * c.qv_a;
      sums_[k].qv_b += sign * c.qv_b;
      sums_[k].limit += sign * c.limit;
    };
    switch (ev.kind) {
      case Channel::ClonalBirth:
      case Channel::MutantBirth:
        add(ev.after, 1.0);
        break;
      case Channel::Death:
        add(ev.after, -1.0);
        break;
      default:
        add(ev.before, -1.0);
        add(ev.after, 1.0);
        break;
    }
  }
  if (!mean_field_ || ++since_recompute_ >= kRecomputeInterval) recompute(pop);
}

MartingaleReport martingale_report(const std::vector<const MartingaleTracker*>& trackers, std::size_t k) {
  MartingaleReport rep;
  if (trackers.empty()) return rep;
  rep.times = trackers.front()->grid();
  const std::size_t n = rep.times.size();
  const double reps = static_cast<double>(trackers.size());
  rep.mean.assign(n, 0.0);
  rep.se.assign(n, 0.0);
  rep.empirical_qv.assign(n, 0.0);
  rep.model_qv.assign(n, 0.0);
  rep.limit_qv.assign(n, 0.0);
  for (const auto* tr : trackers) {
    const auto& path = tr->paths().at(k);
    if (path.residual.size() != n) throw Error(ErrorCode::InvalidArgument, "tracker path does not cover the grid");
    rep.residuals.push_back(path.residual);
    for (std::size_t g = 0; g < n; ++g) {
      rep.mean[g] += path.residual[g] / reps;
      rep.empirical_qv[g] += path.empirical_qv[g] / reps;
      rep.model_qv[g] += path.model_qv[g] / reps;
      rep.limit_qv[g] += path.limit_qv[g] / reps;
    }
  }
  if (trackers.size() > 1)
    for (std::size_t g = 0; g < n; ++g) {
      double ss = 0.0;
      for (const auto& r : rep.residuals) ss += (r[g] - rep.mean[g]) * (r[g] - rep.mean[g]);
      rep.se[g] = std::sqrt(ss / (reps - 1.0) / reps);
    }
  return rep;
}

MartingaleReport martingale_residuals(const std::vector<Individual>& init, const Trajectory& traj,
                                      const TestFunction& tf, const ModelParams& params,
                                      const std::vector<double>& grid, double horizon) {
  if (traj.events > 0 && traj.events_log.size() != traj.events)
    throw Error(ErrorCode::InvalidArgument, "trajectory was recorded without its event log");
  Population pop(params, init);
  MartingaleTracker tracker(params, {tf}, grid, horizon);
  tracker.start(pop, 0.0);
  double t = 0.0;
  for (const Event& ev : traj.events_log) {
    tracker.hold(pop, t, ev.time);
    switch (ev.kind) {
      case Channel::ClonalBirth:
      case Channel::MutantBirth: pop.add(ev.after); break;
      case Channel::Death: pop.remove(ev.actor); break;
      default: pop.set_cells(ev.actor, ev.after.n1, ev.after.n2); break;
    }
    tracker.jump(pop, ev);
    t = ev.time;
  }
  tracker.hold(pop, t, horizon);
  MartingaleReport rep = martingale_report({&tracker}, 0);
  rep.test_function = tf.name;
  return rep;
}

double limit_drift(const Measure& v, const TestFunction& tf, const ModelParams& params) {
  if (static_cast<int>(tf.cell_tier()) < static_cast<int>(Smoothness::C1))
    throw Error(ErrorCode::TierMismatch, "limit drift needs a C1 cell part, got '" + tf.name + "'");
  double s = 0.0;
  for (const auto& a : v) {
    double field = 0.0;
    for (const auto& b : v) field += b.w * params.competition(a.x - b.x);
    const double p = std::clamp(params.mutation_prob(a.x), 0.0, 1.0);
    const double B = params.birth(a.x, a.y1, a.y2);
    const double phi = tf(a.x, a.y1, a.y2), fx = tf.fx(a.x);
    const double Ef = mutant_moments(a.x, params.mutation_sd(a.x), tf, params.box).first;
    const Vec2 c = lv_velocity(LVParams::at(params, a.x), {a.y1, a.y2});
    const double transport = fx * (tf.g1.d1(a.y1) * tf.g2(a.y2) * c[0] + tf.g1(a.y1) * tf.g2.d1(a.y2) * c[1]);
    s += a.w * ((B * (1.0 - p) - params.death(a.x, a.y1, a.y2) - params.selection(a.x, a.y1, a.y2) * field) * phi +
                p * B * Ef * tf.g(a.y1, a.y2) + transport);
  }
  return s;
}

std::vector<double> deterministic_residuals(const std::vector<double>& times, const std::vector<Measure>& path,
                                            const TestFunction& tf, const ModelParams& params) {
  if (times.size() != path.size()) throw Error(ErrorCode::InvalidArgument, "times and path differ in length");
  std::vector<double> out;
  if (path.empty()) return out;
  const double p0 = pair(path.front(), tf);
  double integral = 0.0, prev = limit_drift(path.front(), tf, params);
  out.push_back(0.0);
  for (std::size_t k = 1; k < path.size(); ++k) {
    const double cur = limit_drift(path[k], tf, params);
    integral += 0.5 * (prev + cur) * (times[k] - times[k - 1]);
    prev = cur;
    out.push_back(pair(path[k], tf) - p0 - integral);
  }
  return out;
}

double weak_distance(const Measure& a, const Measure& b, const std::vector<TestFunction>& tfs, const TraitBox& box) {
  double ymax = 0.0;
  for (const Measure* m : {&a, &b})
    for (const auto& atom : *m) ymax = std::max({ymax, atom.y1, atom.y2});
  double d = 0.0;
  for (const auto& tf : tfs) {
    const double scale = std::max(1.0, tf.sup_bound(box, ymax));
    d = std::max(d, std::abs(pair(a, tf) - pair(b, tf)) / scale);
  }
  return d;
}

double sample_variance(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

namespace {

std::pair<double, double> least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

void check_series(const std::vector<double>& K, const std::vector<double>& var) {
  std::vector<double> distinct = K;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 3) throw Error(ErrorCode::DegenerateSeries, "need at least three distinct K");
  for (std::size_t i = 0; i < K.size(); ++i) {
    if (!(K[i] > 0.0)) throw Error(ErrorCode::DegenerateSeries, "K must be positive");
    if (!(var[i] > 0.0) || !std::isfinite(var[i]))
      throw Error(ErrorCode::DegenerateSeries, "variance at K=" + std::to_string(K[i]) + " is not positive");
  }
}

void percentile_interval(std::vector<double>& slopes, ScalingFit& fit) {
  fit.resamples = slopes.size();
  if (slopes.empty()) {
    fit.ci_low = fit.ci_high = fit.slope;
    return;
  }
  std::sort(slopes.begin(), slopes.end());
  auto at = [&](double q) {
    const double pos = q * static_cast<double>(slopes.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, slopes.size() - 1);
    return slopes[lo] + (pos - static_cast<double>(lo)) * (slopes[hi] - slopes[lo]);
  };
  fit.ci_low = at(0.025);
  fit.ci_high = at(0.975);
}

}  // namespace

ScalingFit scaling_exponent_fit(const std::vector<ScalingSeries>& series, std::size_t resamples, std::uint64_t seed) {
  std::vector<double> K, var;
  for (const auto& s : series) {
    K.push_back(s.K);
    var.push_back(sample_variance(s.samples));
  }
  check_series(K, var);
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < K.size(); ++i) {
    lx.push_back(std::log(K[i]));
    ly.push_back(std::log(var[i]));
  }
  ScalingFit fit;
  std::tie(fit.slope, fit.intercept) = least_squares(lx, ly);
  Rng rng(seed);
  std::vector<double> slopes, boot;
  for (std::size_t b = 0; b < resamples; ++b) {
    std::vector<double> by;
    bool ok = true;
    for (const auto& s : series) {
      boot.resize(s.samples.size());
      for (auto& v : boot) v = s.samples[rng.below(s.samples.size())];
      const double v = sample_variance(boot);
      if (!(v > 0.0)) {
        ok = false;
        break;
      }
      by.push_back(std::log(v));
    }
    if (ok) slopes.push_back(least_squares(lx, by).first);
  }
  percentile_interval(slopes, fit);
  return fit;
}

ScalingFit scaling_exponent_fit(const std::vector<std::pair<double, double>>& k_variance, std::size_t resamples,
                                std::uint64_t seed) {
  std::vector<double> K, var;
  for (const auto& [k, v] : k_variance) {
    K.push_back(k);
    var.push_back(v);
  }
  check_series(K, var);
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < K.size(); ++i) {
    lx.push_back(std::log(K[i]));
    ly.push_back(std::log(var[i]));
  }
  ScalingFit fit;
  std::tie(fit.slope, fit.intercept) = least_squares(lx, ly);
  std::vector<double> resid;
  for (std::size_t i = 0; i < lx.size(); ++i) resid.push_back(ly[i] - (fit.intercept + fit.slope * lx[i]));
  Rng rng(seed);
  std::vector<double> slopes;
  for (std::size_t b = 0; b < resamples; ++b) {
    std::vector<double> by;
    for (std::size_t i = 0; i < lx.size(); ++i)
      by.push_back(fit.intercept + fit.slope * lx[i] + resid[rng.below(resid.size())]);
    slopes.push_back(least_squares(lx, by).first);
  }
  percentile_interval(slopes, fit);
  return fit;
}

}  // namespace twolevel
