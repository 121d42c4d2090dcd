#include "twolevel/transport.hpp"

#include <array>
#include <cmath>

#include "twolevel/error.hpp"
#include "twolevel/lotka_volterra.hpp"

namespace twolevel {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

struct Stencil {
  std::array<std::size_t, 4> node{};
  std::array<double, 4> weight{};
};

/// Cloud-in-cell weights of the point (y1, y2) over the cell centres of trait column i.
/// Points beyond the outermost centres are assigned to the boundary cells.
Stencil make_stencil(const GridSpec& g, std::size_t i, double y1, double y2) {
  auto axis = [](double y, double h, std::size_t n, std::size_t& lo, double& frac) {
    const double u = std::clamp(y / h - 0.5, 0.0, static_cast<double>(n - 1));
    lo = std::min(static_cast<std::size_t>(u), n > 1 ? n - 2 : 0);
    frac = n > 1 ? u - static_cast<double>(lo) : 0.0;
  };
  std::size_t j0 = 0, k0 = 0;
  double a = 0.0, b = 0.0;
  axis(y1, g.dy1(), g.ny1, j0, a);
  axis(y2, g.dy2(), g.ny2, k0, b);
  const std::size_t j1 = g.ny1 > 1 ? j0 + 1 : j0;
  const std::size_t k1 = g.ny2 > 1 ? k0 + 1 : k0;
  Stencil s;
  s.node = {g.index(i, j0, k0), g.index(i, j1, k0), g.index(i, j0, k1), g.index(i, j1, k1)};
  s.weight = {(1 - a) * (1 - b), a * (1 - b), (1 - a) * b, a * b};
  return s;
}

/// Pushes the cell contents along the characteristics: each cell's mass travels with the image
/// of its centre and is shared among the cells around the arrival point. Mass is conserved.
void remap(const std::vector<Stencil>& arrivals, const std::vector<double>& f, std::vector<double>& out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t q = 0; q < f.size(); ++q) {
    if (f[q] == 0.0) continue;
    const Stencil& s = arrivals[q];
    for (std::size_t c = 0; c < 4; ++c) out[s.node[c]] += s.weight[c] * f[q];
  }
}

/// Images of the grid nodes under the cell flow over dt.
std::vector<Stencil> trace_arrivals(const GridSpec& g, const ModelParams& params, double dt, const OdeOptions& opt) {
  std::vector<Stencil> arrivals(g.size());
  for (std::size_t i = 0; i < g.nx; ++i) {
    const LVParams lv = LVParams::at(params, Trait{g.x(i)});
    for (std::size_t j = 0; j < g.ny1; ++j)
      for (std::size_t k = 0; k < g.ny2; ++k) {
        const Vec2 y = lv_flow(lv, {g.y1(j), g.y2(k)}, 0.0, dt, opt);
        arrivals[g.index(i, j, k)] = make_stencil(g, i, y[0], y[1]);
      }
  }
  return arrivals;
}

struct Coefficients {
  std::vector<double> birth, death, selection;  // at grid nodes
  std::vector<double> p;                        // per trait column
  std::vector<double> kernel;                   // U(x_i - x_j), row-major
  std::vector<std::vector<double>> transfer;
  bool mutates = false;
};

Coefficients coefficients(const GridSpec& g, const ModelParams& params) {
  Coefficients c;
  c.birth.resize(g.size());
  c.death.resize(g.size());
  c.selection.resize(g.size());
  for (std::size_t i = 0; i < g.nx; ++i) {
    const Trait x{g.x(i)};
    c.p.push_back(params.mutation_prob(x));
    if (c.p.back() != 0.0) c.mutates = true;
    for (std::size_t j = 0; j < g.ny1; ++j)
      for (std::size_t k = 0; k < g.ny2; ++k) {
        const std::size_t q = g.index(i, j, k);
        c.birth[q] = params.birth(x, g.y1(j), g.y2(k));
        c.death[q] = params.death(x, g.y1(j), g.y2(k));
        c.selection[q] = params.selection(x, g.y1(j), g.y2(k));
      }
    for (std::size_t l = 0; l < g.nx; ++l) c.kernel.push_back(params.competition(Trait{g.x(i) - g.x(l)}));
  }
  if (c.mutates) c.transfer = mutation_transfer(g, params);
  return c;
}

void source_and_sink(const GridSpec& g, const Coefficients& c, const std::vector<double>& phi, std::vector<double>& src,
                     std::vector<double>& sink) {
  const std::size_t per = g.ny1 * g.ny2;
  std::vector<double> column(g.nx, 0.0);
  for (std::size_t i = 0; i < g.nx; ++i) {
    double s = 0.0;
    for (std::size_t q = 0; q < per; ++q) s += phi[i * per + q];
    column[i] = s * g.volume();
  }
  src.assign(g.size(), 0.0);
  sink.assign(g.size(), 0.0);
  for (std::size_t i = 0; i < g.nx; ++i) {
    double field = 0.0;
    for (std::size_t l = 0; l < g.nx; ++l) field += c.kernel[i * g.nx + l] * column[l];
    for (std::size_t q = i * per; q < (i + 1) * per; ++q) {
      src[q] = c.birth[q] * (1.0 - c.p[i]) * phi[q];
      sink[q] = c.death[q] + c.selection[q] * field;
    }
  }
  if (!c.mutates) return;
  for (std::size_t l = 0; l < g.nx; ++l) {
    if (c.p[l] == 0.0) continue;
    for (std::size_t q = 0; q < per; ++q) {
      const double out = c.p[l] * c.birth[l * per + q] * phi[l * per + q];
      if (out == 0.0) continue;
      for (std::size_t i = 0; i < g.nx; ++i) src[i * per + q] += c.transfer[i][l] * out;
    }
  }
}

}  // namespace

std::vector<std::vector<double>> mutation_transfer(const GridSpec& g, const ModelParams& params) {
  std::vector<std::vector<double>> w(g.nx, std::vector<double>(g.nx, 0.0));
  for (std::size_t l = 0; l < g.nx; ++l) {
    const double sd = params.mutation_sd(Trait{g.x(l)});
    if (sd <= 0.0) {
      w[l][l] = 1.0;
      continue;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < g.nx; ++i) {
      const double a = g.x_lo + static_cast<double>(i) * g.dx();
      w[i][l] = normal_cdf((a + g.dx() - g.x(l)) / sd) - normal_cdf((a - g.x(l)) / sd);
      total += w[i][l];
    }
    for (std::size_t i = 0; i < g.nx; ++i) w[i][l] /= total;
  }
  return w;
}

TransportResult transport_mild_solve(const DensityGrid& phi0, const ModelParams& params, double T,
                                     const TransportOptions& opt) {
  const GridSpec& g = phi0.spec;
  g.validate();
  if (!(opt.dt > 0.0) || !(T >= 0.0)) throw Error(ErrorCode::InvalidArgument, "need dt > 0 and T >= 0");
  if (params.box.dim() != 1) throw Error(ErrorCode::InvalidArgument, "grid solver supports one trait dimension");
  if (phi0.min_value() < 0.0) throw Error(ErrorCode::InvalidArgument, "initial density must be nonnegative");
  const auto steps = static_cast<std::size_t>(std::llround(T / opt.dt));
  const auto per_out = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(opt.dt_out / opt.dt)));

  const auto arrivals = trace_arrivals(g, params, opt.dt, opt.ode);
  const Coefficients coef = coefficients(g, params);

  TransportResult out;
  out.picard_tol = opt.picard_tol;
  out.ode_atol = opt.ode.atol;
  out.ode_rtol = opt.ode.rtol;
  out.snapshots.push_back(phi0);
  std::vector<double> phi = phi0.values, src, sink, src_k, sink_k;
  std::vector<double> depart(g.size()), base(g.size()), cur(g.size()), next(g.size());
  const double h = 0.5 * opt.dt;
  for (std::size_t n = 1; n <= steps; ++n) {
    source_and_sink(g, coef, phi, src, sink);
    for (std::size_t q = 0; q < g.size(); ++q) depart[q] = (phi[q] + h * src[q]) * std::exp(-h * sink[q]);
    remap(arrivals, depart, base);
    remap(arrivals, phi, cur);
    std::vector<double> history;
    std::size_t rising = 0;
    bool converged = false;
    for (std::size_t it = 0; it < opt.picard_max; ++it) {
      source_and_sink(g, coef, cur, src_k, sink_k);
      double dist = 0.0;
      for (std::size_t q = 0; q < g.size(); ++q) {
        next[q] = base[q] * std::exp(-h * sink_k[q]) + h * src_k[q];
        dist += std::abs(next[q] - cur[q]);
      }
      dist *= g.volume();
      std::swap(cur, next);
      if (!history.empty() && dist >= history.back()) {
        if (++rising >= opt.divergence_window)
          throw Error(ErrorCode::PicardDiverged, "L1 distance of Picard iterates stopped decreasing at t=" +
                                                     std::to_string(static_cast<double>(n) * opt.dt));
      } else {
        rising = 0;
      }
      history.push_back(dist);
      if (!std::isfinite(dist)) throw Error(ErrorCode::PicardDiverged, "non-finite Picard iterate");
      if (dist < opt.picard_tol) {
        converged = true;
        break;
      }
    }
    if (!converged) ++out.unconverged_slabs;
    out.picard_history.push_back(std::move(history));
    phi = cur;
    if (n % per_out == 0 || n == steps) {
      DensityGrid snap(g, static_cast<double>(n) * opt.dt);
      snap.values = phi;
      out.snapshots.push_back(std::move(snap));
    }
  }
  return out;
}

}  // namespace twolevel
