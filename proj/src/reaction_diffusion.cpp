#include "twolevel/reaction_diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "twolevel/error.hpp"
#include "twolevel/lotka_volterra.hpp"

namespace twolevel {

namespace {

constexpr double kNegativeTolerance = 1e-12;

/// Solves (I - r A) u = v in place for A u = (D u)'' with no-flux ends, along one line.
void implicit_line(std::vector<double>& v, const std::vector<double>& D, double r) {
  const std::size_t n = v.size();
  if (n < 2) return;
  std::vector<double> a(n, 0.0), b(n, 0.0), c(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double neighbours = (i > 0) + (i + 1 < n);
    b[i] = 1.0 + r * D[i] * neighbours;
    if (i > 0) a[i] = -r * D[i - 1];
    if (i + 1 < n) c[i] = -r * D[i + 1];
  }
  for (std::size_t i = 1; i < n; ++i) {
    const double m = a[i] / b[i - 1];
    b[i] -= m * c[i - 1];
    v[i] -= m * v[i - 1];
  }
  v[n - 1] /= b[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) v[i] = (v[i] - c[i] * v[i + 1]) / b[i];
}

void check_negative(std::vector<double>& w, const char* stage, double t) {
  for (double& v : w) {
    if (v < -kNegativeTolerance)
      throw Error(ErrorCode::NegativeDensity, std::string(stage) + " produced " + std::to_string(v) +
                                                  " at t=" + std::to_string(t));
    if (v < 0.0) v = 0.0;
  }
}

}  // namespace

std::string_view convention_name(DiffusionConvention c) {
  return c == DiffusionConvention::Printed ? "printed" : "generator";
}

ReactionDiffusionResult reaction_diffusion_solve(const DensityGrid& w0, const ModelParams& params, double T,
                                                 const ReactionDiffusionOptions& opt) {
  const GridSpec& g = w0.spec;
  g.validate();
  if (params.box.dim() != 1) throw Error(ErrorCode::InvalidArgument, "grid solver supports one trait dimension");
  if (!(T >= 0.0) || !(opt.dt_out > 0.0)) throw Error(ErrorCode::InvalidArgument, "need T >= 0 and dt_out > 0");
  const Acceleration acc = params.acceleration.value_or(Acceleration{});
  const bool generator = opt.convention == DiffusionConvention::Generator;
  const std::size_t per = g.ny1 * g.ny2;

  std::vector<double> Dx(g.size()), gam(g.nx), birth(g.size()), death(g.size()), selection(g.size()), kernel;
  std::vector<LVParams> lv;
  double min_coef = INFINITY;
  for (std::size_t i = 0; i < g.nx; ++i) {
    const Trait x{g.x(i)};
    const double p = params.mutation_prob(x), s = acc.sigma(x);
    gam[i] = acc.gamma(x);
    lv.push_back(LVParams::at(params, x));
    min_coef = std::min({min_coef, p, s, gam[i]});
    for (std::size_t j = 0; j < g.ny1; ++j)
      for (std::size_t k = 0; k < g.ny2; ++k) {
        const std::size_t q = g.index(i, j, k);
        const double G = acc.Gamma(x, g.y1(j), g.y2(k));
        min_coef = std::min(min_coef, G);
        Dx[q] = (generator ? 0.5 : 1.0) * p * s * s * G;
        birth[q] = params.birth(x, g.y1(j), g.y2(k));
        death[q] = params.death(x, g.y1(j), g.y2(k));
        selection[q] = params.selection(x, g.y1(j), g.y2(k));
      }
    for (std::size_t l = 0; l < g.nx; ++l) kernel.push_back(params.competition(Trait{g.x(i) - g.x(l)}));
  }
  if (opt.require_ellipticity && !(min_coef > 0.0))
    throw Error(ErrorCode::EllipticityViolated, "p, sigma, Gamma and gamma must be bounded below by a positive constant");

  // face velocities: f1[i][j][k] on the face between y1 cells j-1 and j (j = 0..ny1)
  const double dy1 = g.dy1(), dy2 = g.dy2();
  std::vector<double> f1(g.nx * (g.ny1 + 1) * g.ny2, 0.0), f2(g.nx * g.ny1 * (g.ny2 + 1), 0.0);
  auto i1 = [&](std::size_t i, std::size_t j, std::size_t k) { return (i * (g.ny1 + 1) + j) * g.ny2 + k; };
  auto i2 = [&](std::size_t i, std::size_t j, std::size_t k) { return (i * g.ny1 + j) * (g.ny2 + 1) + k; };
  double max_outflow = 0.0;
  if (opt.transport) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      for (std::size_t j = 1; j < g.ny1; ++j)
        for (std::size_t k = 0; k < g.ny2; ++k)
          f1[i1(i, j, k)] = lv_velocity(lv[i], {static_cast<double>(j) * dy1, g.y2(k)})[0];
      for (std::size_t j = 0; j < g.ny1; ++j)
        for (std::size_t k = 1; k < g.ny2; ++k)
          f2[i2(i, j, k)] = lv_velocity(lv[i], {g.y1(j), static_cast<double>(k) * dy2})[1];
      for (std::size_t j = 0; j < g.ny1; ++j)
        for (std::size_t k = 0; k < g.ny2; ++k) {
          const double out = (std::max(f1[i1(i, j + 1, k)], 0.0) + std::max(-f1[i1(i, j, k)], 0.0)) / dy1 +
                             (std::max(f2[i2(i, j, k + 1)], 0.0) + std::max(-f2[i2(i, j, k)], 0.0)) / dy2;
          max_outflow = std::max(max_outflow, out);
        }
    }
  }

  ReactionDiffusionResult res;
  double dt = opt.dt;
  if (dt <= 0.0) {
    const double limit = max_outflow > 0.0 ? opt.cfl_safety / max_outflow : opt.dt_out;
    dt = opt.dt_out / std::ceil(opt.dt_out / std::min(limit, opt.dt_out));
  }
  res.dt = dt;
  res.cfl_number = dt * max_outflow;
  if (res.cfl_number > 1.0)
    throw Error(ErrorCode::CFLViolation, "dt * max outflow rate = " + std::to_string(res.cfl_number) + " > 1");

  const auto steps = static_cast<std::size_t>(std::llround(T / dt));
  const auto per_out = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(opt.dt_out / dt)));
  std::vector<double> w = w0.values, tmp(g.size());
  res.snapshots.push_back(w0);

  std::vector<double> line, coef;
  for (std::size_t n = 1; n <= steps; ++n) {
    const double t = static_cast<double>(n) * dt;
    if (opt.reaction) {
      std::vector<double> column(g.nx, 0.0);
      for (std::size_t i = 0; i < g.nx; ++i) {
        for (std::size_t q = 0; q < per; ++q) column[i] += w[i * per + q];
        column[i] *= g.volume();
      }
      for (std::size_t i = 0; i < g.nx; ++i) {
        double field = 0.0;
        for (std::size_t l = 0; l < g.nx; ++l) field += kernel[i * g.nx + l] * column[l];
        for (std::size_t q = i * per; q < (i + 1) * per; ++q)
          w[q] *= std::exp(dt * (birth[q] - death[q] - selection[q] * field));
      }
    }
    if (opt.transport && max_outflow > 0.0) {
      for (std::size_t i = 0; i < g.nx; ++i)
        for (std::size_t j = 0; j < g.ny1; ++j)
          for (std::size_t k = 0; k < g.ny2; ++k) {
            auto flux1 = [&](std::size_t jf) {
              const double c = f1[i1(i, jf, k)];
              return c > 0.0 ? c * w[g.index(i, jf - 1, k)] : c * w[g.index(i, jf, k)];
            };
            auto flux2 = [&](std::size_t kf) {
              const double c = f2[i2(i, j, kf)];
              return c > 0.0 ? c * w[g.index(i, j, kf - 1)] : c * w[g.index(i, j, kf)];
            };
            const double in1 = j > 0 ? flux1(j) : 0.0, out1 = j + 1 < g.ny1 ? flux1(j + 1) : 0.0;
            const double in2 = k > 0 ? flux2(k) : 0.0, out2 = k + 1 < g.ny2 ? flux2(k + 1) : 0.0;
            tmp[g.index(i, j, k)] = w[g.index(i, j, k)] - dt * ((out1 - in1) / dy1 + (out2 - in2) / dy2);
          }
      std::swap(w, tmp);
      check_negative(w, "transport", t);
    }
    if (g.nx > 1) {
      const double r = dt / (g.dx() * g.dx());
      line.resize(g.nx);
      coef.resize(g.nx);
      for (std::size_t q = 0; q < per; ++q) {
        for (std::size_t i = 0; i < g.nx; ++i) {
          line[i] = w[i * per + q];
          coef[i] = Dx[i * per + q];
        }
        implicit_line(line, coef, r);
        for (std::size_t i = 0; i < g.nx; ++i) w[i * per + q] = line[i];
      }
    }
    if (g.ny1 > 1) {
      const double r = dt / (dy1 * dy1);
      line.resize(g.ny1);
      coef.resize(g.ny1);
      for (std::size_t i = 0; i < g.nx; ++i)
        for (std::size_t k = 0; k < g.ny2; ++k) {
          for (std::size_t j = 0; j < g.ny1; ++j) {
            line[j] = w[g.index(i, j, k)];
            coef[j] = generator ? gam[i] * g.y1(j) : gam[i];
          }
          implicit_line(line, coef, r);
          for (std::size_t j = 0; j < g.ny1; ++j) w[g.index(i, j, k)] = line[j];
        }
    }
    if (g.ny2 > 1) {
      const double r = dt / (dy2 * dy2);
      line.resize(g.ny2);
      coef.resize(g.ny2);
      for (std::size_t i = 0; i < g.nx; ++i)
        for (std::size_t j = 0; j < g.ny1; ++j) {
          for (std::size_t k = 0; k < g.ny2; ++k) {
            line[k] = w[g.index(i, j, k)];
            coef[k] = generator ? gam[i] * g.y2(k) : gam[i];
          }
          implicit_line(line, coef, r);
          for (std::size_t k = 0; k < g.ny2; ++k) w[g.index(i, j, k)] = line[k];
        }
    }
    check_negative(w, "diffusion", t);
    if (n % per_out == 0 || n == steps) {
      DensityGrid snap(g, t);
      snap.values = w;
      res.snapshots.push_back(std::move(snap));
    }
  }
  return res;
}

}  // namespace twolevel
