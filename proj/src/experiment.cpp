#include "twolevel/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>

#include "json.hpp"
#include "twolevel/analysis.hpp"
#include "twolevel/error.hpp"
#include "twolevel/lotka_volterra.hpp"
#include "twolevel/meanfield.hpp"
#include "twolevel/scaling.hpp"
#include "twolevel/stationary.hpp"
#include "twolevel/transport.hpp"

#ifndef TWOLEVEL_VERSION
#define TWOLEVEL_VERSION "0.0.0"
#endif

namespace twolevel {

using json = nlohmann::json;

std::string_view command_name(Command c) {
  switch (c) {
    case Command::Simulate: return "simulate";
    case Command::Solve: return "solve";
    case Command::Equilibrium: return "equilibrium";
    case Command::Analyze: return "analyze";
    case Command::Compare: return "compare";
  }
  return "?";
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string numbered(const char* stem, std::size_t k) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%03zu.csv", stem, k);
  return buf;
}

/// Wide table: one row per time, columns added in order.
struct Table {
  std::vector<double> times;
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;

  void add(std::string name, std::vector<double> values) {
    names.push_back(std::move(name));
    columns.push_back(std::move(values));
  }
};

class Writer {
 public:
  Writer(const std::filesystem::path& dir, ExperimentOutcome& out) : dir_(dir), out_(out) {}

  std::ofstream open(const std::string& name) {
    std::ofstream f(dir_ / name, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::InvalidArgument, "cannot write " + (dir_ / name).string());
    out_.files.push_back(name);
    return f;
  }

  void table(const std::string& name, const std::string& hash, const Table& t) {
    auto f = open(name);
    f << "config_hash,time";
    for (const auto& n : t.names) f << ',' << n;
    f << '\n';
    for (std::size_t r = 0; r < t.times.size(); ++r) {
      f << hash << ',' << format_double(t.times[r]);
      for (const auto& c : t.columns) f << ',' << format_double(r < c.size() ? c[r] : std::nan(""));
      f << '\n';
    }
  }

 private:
  std::filesystem::path dir_;
  ExperimentOutcome& out_;
};

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double se_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  return std::sqrt(sample_variance(v) / static_cast<double>(v.size()));
}

std::string column_name(const std::string& prefix, const TestFunction& tf) { return prefix + "_" + tf.name; }

// ----- initial conditions

std::vector<Individual> from_measure(const Measure& m, const ScalingRegime& regime) {
  std::vector<Individual> out;
  for (const auto& a : m) {
    const auto copies = static_cast<std::int64_t>(std::llround(a.w * regime.K));
    const Individual ind{a.x, std::llround(a.y1 * regime.K1), std::llround(a.y2 * regime.K2)};
    for (std::int64_t c = 0; c < copies; ++c) out.push_back(ind);
  }
  return out;
}

Trait lerp(const Trait& lo, const Trait& hi, double s) {
  Trait t = lo;
  for (std::size_t k = 0; k < lo.dim(); ++k) t[k] = lo[k] + s * (hi[k] - lo[k]);
  return t;
}

double bump_value(const DensityBump& b, double x, double y1, double y2) {
  const double dy = (y1 - b.y1_center) * (y1 - b.y1_center) + (y2 - b.y2_center) * (y2 - b.y2_center);
  double v = std::exp(-dy / (2.0 * b.width * b.width));
  if (b.x_width > 0.0) v *= std::exp(-(x - b.x_center) * (x - b.x_center) / (2.0 * b.x_width * b.x_width));
  return v;
}

}  // namespace

std::vector<Individual> initial_individuals(const ExperimentConfig& cfg, Rng& rng) {
  const auto& ic = cfg.initial;
  switch (ic.kind) {
    case InitialKind::Particles:
      return ic.particles;
    case InitialKind::Measure:
      return from_measure(ic.measure, cfg.regime);
    case InitialKind::Sampler: {
      std::vector<Individual> out;
      out.reserve(ic.sampler.count);
      for (std::size_t k = 0; k < ic.sampler.count; ++k) {
        Trait x = ic.sampler.lower;
        for (std::size_t c = 0; c < x.dim(); ++c) x[c] += rng.uniform() * (ic.sampler.upper[c] - ic.sampler.lower[c]);
        const auto n1 = ic.sampler.poisson ? static_cast<std::int64_t>(rng.poisson(ic.sampler.n1_mean))
                                           : std::llround(ic.sampler.n1_mean);
        const auto n2 = ic.sampler.poisson ? static_cast<std::int64_t>(rng.poisson(ic.sampler.n2_mean))
                                           : std::llround(ic.sampler.n2_mean);
        out.push_back({x, n1, n2});
      }
      return out;
    }
    case InitialKind::Density:
      throw Error(ErrorCode::SchemaError, "initial.kind: density initial conditions are for grid solvers only");
  }
  return {};
}

Measure initial_measure(const ExperimentConfig& cfg) {
  const auto& ic = cfg.initial;
  switch (ic.kind) {
    case InitialKind::Particles:
      return empirical_measure(ic.particles, cfg.regime).atoms;
    case InitialKind::Measure:
      return ic.measure;
    case InitialKind::Sampler: {
      // expected configuration: evenly spread traits at the mean cell counts
      Measure m;
      const std::size_t n = ic.sampler.count;
      for (std::size_t k = 0; k < n; ++k) {
        const double s = n == 1 ? 0.5 : static_cast<double>(k) / static_cast<double>(n - 1);
        m.push_back({lerp(ic.sampler.lower, ic.sampler.upper, s), ic.sampler.n1_mean / cfg.regime.K1,
                     ic.sampler.n2_mean / cfg.regime.K2, 1.0 / cfg.regime.K});
      }
      return m;
    }
    case InitialKind::Density:
      return initial_density(cfg).to_measure();
  }
  return {};
}

DensityGrid initial_density(const ExperimentConfig& cfg) {
  const GridSpec& g = cfg.solver.grid;
  g.validate();
  if (cfg.initial.kind == InitialKind::Density) {
    const DensityBump& b = cfg.initial.bump;
    DensityGrid d = DensityGrid::sample(g, [&](double x, double y1, double y2) { return bump_value(b, x, y1, y2); });
    const double m = d.mass();
    if (!(m > 0.0)) throw Error(ErrorCode::InvalidArgument, "initial.density: bump has no mass on the grid");
    for (double& v : d.values) v *= b.mass / m;
    return d;
  }
  // deposit atoms into the cell containing them
  DensityGrid d(g);
  auto cell = [](double v, double lo, double step, std::size_t n) {
    const double u = std::floor((v - lo) / step);
    return static_cast<std::size_t>(std::clamp(u, 0.0, static_cast<double>(n - 1)));
  };
  for (const auto& a : initial_measure(cfg)) {
    if (a.y1 > g.y1_max || a.y2 > g.y2_max)
      throw Error(ErrorCode::InvalidArgument, "initial condition lies outside solver.grid");
    d.at(cell(a.x[0], g.x_lo, g.dx(), g.nx), cell(a.y1, 0.0, g.dy1(), g.ny1), cell(a.y2, 0.0, g.dy2(), g.ny2)) +=
        a.w / g.volume();
  }
  return d;
}

namespace {

struct Context {
  const ExperimentConfig& cfg;
  const RunOptions& opt;
  ExperimentOutcome out;
  Writer writer;
  json notes = json::object();

  Context(const ExperimentConfig& c, const RunOptions& o) : cfg(c), opt(o), writer(o.out_dir, out) {}

  void manifest(Command cmd) {
    json m;
    m["command"] = std::string(command_name(cmd));
    m["version"] = TWOLEVEL_VERSION;
    m["config_hash"] = cfg.hash_hex();
    m["master_seed"] = cfg.run.seed;
    m["replicate_seeds"] = out.replicate_seeds;
    m["threads"] = opt.threads;
    json stages = json::array();
    for (const auto& s : out.stages) {
      json j{{"name", s.name}, {"status", s.status}, {"wall_seconds", s.wall_seconds}};
      if (!s.error_code.empty()) {
        j["error"] = s.error_code;
        j["message"] = s.message;
      }
      stages.push_back(j);
    }
    m["stages"] = stages;
    m["moment_flag"] = out.moment_flag;
    m["notes"] = notes;
    json files = out.files;
    files.push_back("manifest.json");
    m["files"] = files;
    std::ofstream f(opt.out_dir / "manifest.json", std::ios::binary | std::ios::trunc);
    f << m.dump(2) << '\n';
  }

  template <class F>
  void stage(Command cmd, const std::string& name, F&& body) {
    const auto t0 = std::chrono::steady_clock::now();
    StageRecord rec;
    rec.name = name;
    rec.status = "ok";
    auto finish = [&]() {
      rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      out.stages.push_back(rec);
    };
    try {
      body();
      finish();
    } catch (const Error& e) {
      rec.status = "failed";
      rec.error_code = std::string(error_name(e.code()));
      rec.message = e.what();
      finish();
      manifest(cmd);
      throw;
    } catch (const std::exception& e) {
      rec.status = "failed";
      rec.error_code = "Exception";
      rec.message = e.what();
      finish();
      manifest(cmd);
      throw;
    }
  }
};

struct SimResult {
  std::vector<double> grid;
  std::vector<ReplicateResult> reps;
};

SimResult simulate_all(Context& ctx, bool track, bool snapshots) {
  const auto& cfg = ctx.cfg;
  SimResult res;
  res.grid = uniform_grid(cfg.run.T, cfg.run.grid_intervals);
  SimulationOptions so;
  so.horizon = cfg.run.T;
  so.grid = res.grid;
  so.event_budget = cfg.run.event_budget;
  so.audit_interval = cfg.run.audit_interval;
  so.tree_threshold = cfg.run.tree_threshold;
  so.pairings = cfg.analysis.test_functions;
  so.record_snapshots = snapshots;
  so.ceilings = {cfg.run.mass_ceiling, cfg.run.second_moment_ceiling};
  ObserverFactory factory;
  if (track) {
    factory = [&](std::size_t) -> std::unique_ptr<EventObserver> {
      return std::make_unique<MartingaleTracker>(cfg.params, cfg.analysis.test_functions, res.grid, cfg.run.T);
    };
  }
  res.reps = run_replicates(
      cfg.params, [&](std::size_t, Rng& rng) { return initial_individuals(cfg, rng); }, so, cfg.run.seed,
      cfg.run.replicates, ctx.opt.threads, factory);
  for (std::size_t r = 0; r < res.reps.size(); ++r) {
    ctx.out.replicate_seeds.push_back(res.reps[r].trajectory.seed);
    ctx.out.moment_flag = ctx.out.moment_flag || res.reps[r].trajectory.moment_flag;
  }
  return res;
}

void write_trajectories(Context& ctx, const SimResult& sim) {
  const auto& tfs = ctx.cfg.analysis.test_functions;
  const std::string hash = ctx.cfg.hash_hex();
  for (std::size_t r = 0; r < sim.reps.size(); ++r) {
    const Trajectory& tr = sim.reps[r].trajectory;
    auto f = ctx.writer.open(numbered("trajectory", r));
    f << "config_hash,replicate,time,individuals,n1,n2,mass,cells1,cells2,second_moment";
    for (const auto& tf : tfs) f << ',' << column_name("pair", tf);
    f << '\n';
    for (const auto& o : tr.observations) {
      f << hash << ',' << r << ',' << format_double(o.time) << ',' << o.individuals << ',' << o.n1 << ',' << o.n2
        << ',' << format_double(o.mass) << ',' << format_double(o.cells1) << ',' << format_double(o.cells2) << ','
        << format_double(o.second_moment);
      for (double p : o.pairings) f << ',' << format_double(p);
      f << '\n';
    }
  }
}

void simulation_columns(const ExperimentConfig& cfg, const SimResult& sim, Table& t) {
  const std::size_t n = sim.grid.size();
  const auto& tfs = cfg.analysis.test_functions;
  t.times = sim.grid;
  std::vector<double> mass_mean(n), mass_se(n), c1(n), c2(n), p1(n), p2(n), m2(n), extinct(n);
  std::vector<std::vector<double>> pm(tfs.size(), std::vector<double>(n)), ps(tfs.size(), std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> mass, a1, a2, sm;
    std::vector<std::vector<double>> pv(tfs.size());
    double ext = 0.0;
    for (const auto& rep : sim.reps) {
      const auto& obs = rep.trajectory.observations;
      if (i >= obs.size()) continue;
      mass.push_back(obs[i].mass);
      a1.push_back(obs[i].cells1);
      a2.push_back(obs[i].cells2);
      sm.push_back(obs[i].second_moment);
      for (std::size_t k = 0; k < tfs.size() && k < obs[i].pairings.size(); ++k) pv[k].push_back(obs[i].pairings[k]);
      if (rep.trajectory.extinction_time <= sim.grid[i]) ext += 1.0;
    }
    mass_mean[i] = mean_of(mass);
    mass_se[i] = se_of(mass);
    c1[i] = mean_of(a1);
    c2[i] = mean_of(a2);
    const double cells = c1[i] + c2[i];
    p1[i] = cells > 0.0 ? c1[i] / mass_mean[i] : 0.0;
    p2[i] = cells > 0.0 ? c2[i] / mass_mean[i] : 0.0;
    m2[i] = mean_of(sm);
    extinct[i] = sim.reps.empty() ? 0.0 : ext / static_cast<double>(sim.reps.size());
    for (std::size_t k = 0; k < tfs.size(); ++k) {
      pm[k][i] = mean_of(pv[k]);
      ps[k][i] = se_of(pv[k]);
    }
  }
  t.add("mass_mean", mass_mean);
  t.add("mass_se", mass_se);
  t.add("cells1_mean", c1);
  t.add("cells2_mean", c2);
  t.add("cells1_per_mass", p1);
  t.add("cells2_per_mass", p2);
  t.add("second_moment_mean", m2);
  t.add("extinct_fraction", extinct);
  for (std::size_t k = 0; k < tfs.size(); ++k) {
    t.add(column_name("pair_mean", tfs[k]), pm[k]);
    t.add(column_name("pair_se", tfs[k]), ps[k]);
  }
}

void martingale_columns(const ExperimentConfig& cfg, const SimResult& sim, Table& t, json& notes) {
  std::vector<const MartingaleTracker*> trackers;
  for (const auto& rep : sim.reps) trackers.push_back(static_cast<const MartingaleTracker*>(rep.observer.get()));
  const auto& tfs = cfg.analysis.test_functions;
  json summary = json::object();
  for (std::size_t k = 0; k < tfs.size(); ++k) {
    const MartingaleReport rep = martingale_report(trackers, k);
    std::vector<double> z(rep.mean.size());
    bool within = true;
    for (std::size_t i = 0; i < z.size(); ++i) {
      z[i] = rep.se[i] > 0.0 ? rep.mean[i] / rep.se[i] : (rep.mean[i] == 0.0 ? 0.0 : std::copysign(INFINITY, rep.mean[i]));
      within = within && std::fabs(z[i]) <= cfg.analysis.se_band;
    }
    t.add(column_name("residual_mean", tfs[k]), rep.mean);
    t.add(column_name("residual_se", tfs[k]), rep.se);
    t.add(column_name("residual_z", tfs[k]), z);
    t.add(column_name("empirical_qv", tfs[k]), rep.empirical_qv);
    t.add(column_name("model_qv", tfs[k]), rep.model_qv);
    t.add(column_name("limit_qv", tfs[k]), rep.limit_qv);
    const double emp = rep.empirical_qv.empty() ? 0.0 : rep.empirical_qv.back();
    const double mod = rep.model_qv.empty() ? 0.0 : rep.model_qv.back();
    summary[tfs[k].name] = {{"residual_within_se_band", within},
                            {"qv_relative_gap", mod != 0.0 ? std::fabs(emp - mod) / std::fabs(mod) : 0.0},
                            {"qv_within_tolerance",
                             mod != 0.0 ? std::fabs(emp - mod) <= cfg.analysis.qv_tolerance * std::fabs(mod)
                                        : emp == 0.0}};
  }
  notes["martingale"] = summary;
}

// ----- solvers

struct SolveResult {
  std::vector<double> times;
  std::vector<Measure> measures;
};

void measure_columns(const ExperimentConfig& cfg, const SolveResult& s, Table& t, const std::string& prefix) {
  const std::size_t n = s.times.size();
  std::vector<double> mass(n), c1(n), c2(n);
  const auto& tfs = cfg.analysis.test_functions;
  std::vector<std::vector<double>> pv(tfs.size(), std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& a : s.measures[i]) {
      mass[i] += a.w;
      c1[i] += a.w * a.y1;
      c2[i] += a.w * a.y2;
    }
    for (std::size_t k = 0; k < tfs.size(); ++k) pv[k][i] = pair(s.measures[i], tfs[k]);
  }
  t.add(prefix + "mass", mass);
  t.add(prefix + "cells1", c1);
  t.add(prefix + "cells2", c2);
  for (std::size_t k = 0; k < tfs.size(); ++k) t.add(column_name(prefix + "pair", tfs[k]), pv[k]);
}

void write_measures(Context& ctx, const SolveResult& s) {
  const std::string hash = ctx.cfg.hash_hex();
  const std::size_t dim = ctx.cfg.base.box.dim();
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    auto f = ctx.writer.open(numbered("measure", i));
    f << "config_hash,time";
    for (std::size_t c = 0; c < dim; ++c) f << ",x" << c;
    f << ",y1,y2,w\n";
    for (const auto& a : s.measures[i]) {
      f << hash << ',' << format_double(s.times[i]);
      for (std::size_t c = 0; c < dim; ++c) f << ',' << format_double(a.x[c]);
      f << ',' << format_double(a.y1) << ',' << format_double(a.y2) << ',' << format_double(a.w) << '\n';
    }
  }
}

void write_densities(Context& ctx, const std::vector<DensityGrid>& snaps) {
  const std::string hash = ctx.cfg.hash_hex();
  for (std::size_t s = 0; s < snaps.size(); ++s) {
    const DensityGrid& d = snaps[s];
    const GridSpec& g = d.spec;
    auto f = ctx.writer.open(numbered("density", s));
    f << "config_hash,time,x,y1,y2,density\n";
    for (std::size_t i = 0; i < g.nx; ++i)
      for (std::size_t j = 0; j < g.ny1; ++j)
        for (std::size_t k = 0; k < g.ny2; ++k)
          f << hash << ',' << format_double(d.time) << ',' << format_double(g.x(i)) << ',' << format_double(g.y1(j))
            << ',' << format_double(g.y2(k)) << ',' << format_double(d.at(i, j, k)) << '\n';
  }
}

SolveResult solve_limit(Context& ctx, double dt_out) {
  const auto& cfg = ctx.cfg;
  const auto& sb = cfg.solver;
  const double T = cfg.run.T;
  SolveResult res;
  switch (sb.kind) {
    case SolverKind::MeanField:
    case SolverKind::Characteristic: {
      MeanFieldOptions mo{sb.ode, sb.second_moment_ceiling};
      const Measure v0 = initial_measure(cfg);
      const MeanFieldResult mf = sb.kind == SolverKind::MeanField
                                     ? meanfield_constant_solve(v0, cfg.base, T, dt_out, mo)
                                     : characteristic_particle_solve(v0, cfg.base, T, dt_out, mo);
      res.times = mf.times;
      res.measures = mf.snapshots;
      ctx.out.moment_flag = ctx.out.moment_flag || mf.moment_flag;
      ctx.notes["solver"] = {{"kind", std::string(solver_name(sb.kind))},
                             {"sup_second_moment", mf.sup_second_moment},
                             {"moment_flag", mf.moment_flag}};
      write_measures(ctx, res);
      break;
    }
    case SolverKind::Transport: {
      TransportOptions to;
      to.dt = sb.dt;
      to.dt_out = dt_out;
      to.picard_tol = sb.picard_tol;
      to.picard_max = sb.picard_max;
      to.ode = sb.ode;
      const TransportResult tr = transport_mild_solve(initial_density(cfg), cfg.base, T, to);
      for (const auto& d : tr.snapshots) {
        res.times.push_back(d.time);
        res.measures.push_back(d.to_measure());
      }
      write_densities(ctx, tr.snapshots);
      auto f = ctx.writer.open("picard.csv");
      f << "config_hash,slab,iteration,l1_distance\n";
      bool monotone = true;
      for (std::size_t s = 0; s < tr.picard_history.size(); ++s) {
        const auto& h = tr.picard_history[s];
        for (std::size_t k = 0; k < h.size(); ++k) {
          f << cfg.hash_hex() << ',' << s << ',' << k + 1 << ',' << format_double(h[k]) << '\n';
          if (k >= 2 && h[k] > h[k - 1]) monotone = false;
        }
      }
      ctx.notes["solver"] = {{"kind", "transport"},
                             {"unconverged_slabs", tr.unconverged_slabs},
                             {"picard_non_increasing_after_first", monotone},
                             {"picard_tol", tr.picard_tol},
                             {"ode_atol", tr.ode_atol},
                             {"ode_rtol", tr.ode_rtol}};
      break;
    }
    case SolverKind::ReactionDiffusion: {
      ReactionDiffusionOptions ro;
      ro.dt_out = dt_out;
      ro.convention = sb.convention;
      ro.require_ellipticity = sb.require_ellipticity;
      const ReactionDiffusionResult rd = reaction_diffusion_solve(initial_density(cfg), cfg.base, T, ro);
      for (const auto& d : rd.snapshots) {
        res.times.push_back(d.time);
        res.measures.push_back(d.to_measure());
      }
      write_densities(ctx, rd.snapshots);
      ctx.notes["solver"] = {{"kind", "reaction-diffusion"},
                             {"dt", rd.dt},
                             {"cfl_number", rd.cfl_number},
                             {"convention", std::string(convention_name(sb.convention))}};
      break;
    }
  }
  return res;
}

/// Index of the solver snapshot closest to t.
std::size_t nearest(const std::vector<double>& times, double t) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < times.size(); ++i)
    if (std::fabs(times[i] - t) < std::fabs(times[best] - t)) best = i;
  return best;
}

void equilibrium_table(Context& ctx, Table& t) {
  const auto& cfg = ctx.cfg;
  const LVParams lv = LVParams::at(cfg.base, cfg.solver.equilibrium_trait);
  const EquilibriumReport eq = lv_equilibrium(lv);
  t.times = {0.0};
  t.add("case_code", {static_cast<double>(eq.kind)});
  t.add("pi1", {eq.pi[0]});
  t.add("pi2", {eq.pi[1]});
  t.add("case1_condition", {eq.case1_condition});
  t.add("case2_condition", {eq.case2_condition});
  t.add("case3_printed1", {eq.case3_printed[0]});
  t.add("case3_printed2", {eq.case3_printed[1]});
  t.add("invasion2", {eq.invasion2});
  t.add("invasion1", {eq.invasion1});
  ctx.notes["equilibrium_case"] = std::string(case_name(eq.kind));
  try {
    const StationaryReport st = stationary_report(cfg.base);
    t.add("stationary_R", {st.R});
    t.add("stationary_mass", {st.mass});
    if (st.shape == SelectionShape::Linear) {
      std::vector<std::array<double, 2>> z;
      for (int a = 0; a <= 4; ++a)
        for (int b = 0; b <= 4; ++b) z.push_back({0.5 * a, 0.5 * b});
      t.add("constraint_target", {st.constraint_target});
      t.add("constraint_value", {st.constraint_value});
      t.add("locally_stable", {st.locally_stable ? 1.0 : 0.0});
      t.add("laplace_residual", {laplace_stationarity_check(st.mass, st.pi, cfg.base, z)});
      ctx.notes["stationary"] = "linear selection (conjecture probe)";
    } else {
      ctx.notes["stationary"] = "constant selection";
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InvalidArgument) throw;
    ctx.notes["stationary"] = std::string("not available: ") + e.what();
  }
}

}  // namespace

ExperimentOutcome run_experiment(const ExperimentConfig& cfg, Command cmd, const RunOptions& opt) {
  std::filesystem::create_directories(opt.out_dir);
  Context ctx(cfg, opt);
  {
    std::ofstream f(opt.out_dir / "resolved_config.json", std::ios::binary | std::ios::trunc);
    f << cfg.resolved_json << '\n';
    ctx.out.files.push_back("resolved_config.json");
  }
  Table report;
  const bool simulates = cmd == Command::Simulate || cmd == Command::Analyze || cmd == Command::Compare;
  const bool tracks = cmd == Command::Analyze || cmd == Command::Compare;
  SimResult sim;
  if (simulates) {
    ctx.stage(cmd, "simulate", [&] {
      sim = simulate_all(ctx, tracks, cmd == Command::Compare);
      write_trajectories(ctx, sim);
      simulation_columns(cfg, sim, report);
    });
  }
  if (tracks) ctx.stage(cmd, "martingale", [&] { martingale_columns(cfg, sim, report, ctx.notes); });
  if (cmd == Command::Solve) {
    ctx.stage(cmd, "solve", [&] {
      const SolveResult s = solve_limit(ctx, cfg.solver.dt_out);
      report.times = s.times;
      measure_columns(cfg, s, report, "");
    });
  }
  if (cmd == Command::Compare) {
    ctx.stage(cmd, "solve", [&] {
      const SolveResult s = solve_limit(ctx, cfg.run.T / static_cast<double>(cfg.run.grid_intervals));
      SolveResult aligned;
      std::vector<double> wd(sim.grid.size());
      for (std::size_t i = 0; i < sim.grid.size(); ++i) {
        const std::size_t j = nearest(s.times, sim.grid[i]);
        aligned.times.push_back(s.times[j]);
        aligned.measures.push_back(s.measures[j]);
        Measure pooled;
        for (const auto& rep : sim.reps) {
          if (i >= rep.trajectory.snapshots.size()) continue;
          const double w = 1.0 / (cfg.regime.K * static_cast<double>(sim.reps.size()));
          for (const auto& ind : rep.trajectory.snapshots[i])
            pooled.push_back({ind.trait, static_cast<double>(ind.n1) / cfg.regime.K1,
                              static_cast<double>(ind.n2) / cfg.regime.K2, w});
        }
        wd[i] = weak_distance(pooled, s.measures[j], cfg.analysis.test_functions, cfg.base.box);
      }
      measure_columns(cfg, aligned, report, "limit_");
      report.add("weak_distance", wd);
    });
  }
  if (cmd == Command::Equilibrium) ctx.stage(cmd, "equilibrium", [&] { equilibrium_table(ctx, report); });
  ctx.stage(cmd, "report", [&] { ctx.writer.table("report.csv", cfg.hash_hex(), report); });
  ctx.manifest(cmd);
  return ctx.out;
}

}  // namespace twolevel
