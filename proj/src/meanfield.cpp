#include "twolevel/meanfield.hpp"

#include <cmath>

#include "twolevel/error.hpp"
#include "twolevel/lotka_volterra.hpp"

namespace twolevel {

namespace {

std::vector<double> output_times(double T, double dt_out) {
  if (!(T >= 0.0) || !(dt_out > 0.0)) throw Error(ErrorCode::InvalidArgument, "need T >= 0 and dt_out > 0");
  std::vector<double> t{0.0};
  const auto n = static_cast<std::size_t>(std::ceil(T / dt_out - 1e-9));
  for (std::size_t k = 1; k <= n; ++k) t.push_back(std::min(T, static_cast<double>(k) * dt_out));
  return t;
}

bool never_mutates(const ModelParams& params) {
  for (const Trait& x : params.box.lattice(11))
    if (params.mutation_prob(x) != 0.0) return false;
  return true;
}

double second_moment(const Measure& m) {
  double s = 0.0;
  for (const auto& a : m) s += a.w * (a.y1 * a.y1 + a.y2 * a.y2);
  return s;
}

void track(MeanFieldResult& out, const MeanFieldOptions& opt) {
  const double s = second_moment(out.snapshots.back());
  out.sup_second_moment = std::max(out.sup_second_moment, s);
  if (!std::isfinite(s) || s > opt.second_moment_ceiling) out.moment_flag = true;
}

}  // namespace

double logistic_mass(double m0, double R, double a, double t) {
  if (m0 <= 0.0) return 0.0;
  if (R == 0.0) return m0 / (1.0 + a * m0 * t);
  const double e = std::exp(R * t);
  if (!std::isfinite(e)) return a > 0.0 ? R / a : e;
  return R * m0 * e / (R + a * m0 * (e - 1.0));
}

MeanFieldResult meanfield_constant_solve(const Measure& v0, const ModelParams& params, double T, double dt_out,
                                         const MeanFieldOptions& opt) {
  if (!params.birth.is_constant() || !params.death.is_constant() || !params.selection.is_constant() ||
      !params.competition.is_constant())
    throw Error(ErrorCode::InvalidArgument, "mean-field solver needs constant B, D, alpha and U");
  if (!never_mutates(params)) throw Error(ErrorCode::InvalidArgument, "mean-field solver needs p = 0");
  const Trait x0 = params.box.lower;
  const double R = params.birth(x0, 0, 0) - params.death(x0, 0, 0);
  const double a = params.selection(x0, 0, 0) * params.competition.u0;
  const double m0 = total_mass(v0);

  MeanFieldResult out;
  out.times = output_times(T, dt_out);
  Measure cur = v0;
  std::vector<LVParams> lv;
  for (const auto& atom : v0) lv.push_back(LVParams::at(params, atom.x));
  double prev = 0.0;
  for (double t : out.times) {
    const double m = logistic_mass(m0, R, a, t);
    const double ratio = m0 > 0.0 ? m / m0 : 0.0;
    for (std::size_t i = 0; i < cur.size(); ++i) {
      const Vec2 y = lv_flow(lv[i], {cur[i].y1, cur[i].y2}, prev, t, opt.ode);
      cur[i].y1 = y[0];
      cur[i].y2 = y[1];
      cur[i].w = v0[i].w * ratio;
    }
    prev = t;
    out.mass.push_back(m);
    out.snapshots.push_back(cur);
    track(out, opt);
  }
  return out;
}

MeanFieldResult characteristic_particle_solve(const Measure& v0, const ModelParams& params, double T, double dt_out,
                                              const MeanFieldOptions& opt) {
  if (!never_mutates(params)) throw Error(ErrorCode::InvalidArgument, "characteristic solver needs p = 0");
  const std::size_t n = v0.size();
  std::vector<LVParams> lv;
  for (const auto& atom : v0) lv.push_back(LVParams::at(params, atom.x));
  const bool constant_kernel = params.competition.is_constant();

  std::vector<double> state(3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    state[3 * i] = v0[i].w;
    state[3 * i + 1] = v0[i].y1;
    state[3 * i + 2] = v0[i].y2;
  }
  auto rhs = [&](double, const std::vector<double>& s) {
    std::vector<double> d(3 * n);
    double total = 0.0;
    if (constant_kernel)
      for (std::size_t j = 0; j < n; ++j) total += s[3 * j];
    for (std::size_t i = 0; i < n; ++i) {
      const Trait& x = v0[i].x;
      double field = params.competition.u0 * total;
      if (!constant_kernel) {
        field = 0.0;
        for (std::size_t j = 0; j < n; ++j) field += params.competition(x - v0[j].x) * s[3 * j];
      }
      const double y1 = s[3 * i + 1], y2 = s[3 * i + 2];
      const double growth = params.birth(x, y1, y2) - params.death(x, y1, y2) - params.selection(x, y1, y2) * field;
      d[3 * i] = s[3 * i] * growth;
      const Vec2 c = lv_velocity(lv[i], {y1, y2});
      d[3 * i + 1] = c[0];
      d[3 * i + 2] = c[1];
    }
    return d;
  };
  auto clamp = [](std::vector<double>& s) {
    for (double& v : s) v = std::max(v, 0.0);
  };

  MeanFieldResult out;
  out.times = output_times(T, dt_out);
  double prev = 0.0;
  for (double t : out.times) {
    state = dormand_prince(rhs, prev, t, state, opt.ode, clamp);
    prev = t;
    Measure snap = v0;
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      snap[i].w = state[3 * i];
      snap[i].y1 = state[3 * i + 1];
      snap[i].y2 = state[3 * i + 2];
      m += snap[i].w;
    }
    out.mass.push_back(m);
    out.snapshots.push_back(std::move(snap));
    track(out, opt);
  }
  return out;
}

double cell_state_variance(const Measure& m) {
  const double w = total_mass(m);
  if (w <= 0.0) return 0.0;
  double m1 = 0.0, m2 = 0.0;
  for (const auto& a : m) {
    m1 += a.w * a.y1;
    m2 += a.w * a.y2;
  }
  m1 /= w;
  m2 /= w;
  double v = 0.0;
  for (const auto& a : m) v += a.w * ((a.y1 - m1) * (a.y1 - m1) + (a.y2 - m2) * (a.y2 - m2));
  return v / w;
}

}  // namespace twolevel
