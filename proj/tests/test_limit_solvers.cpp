#include <cmath>

#include "doctest.h"
#include "twolevel/error.hpp"
#include "twolevel/lotka_volterra.hpp"
#include "twolevel/meanfield.hpp"
#include "twolevel/reaction_diffusion.hpp"
#include "twolevel/rng.hpp"
#include "twolevel/stationary.hpp"
#include "twolevel/transport.hpp"

using namespace twolevel;

namespace {

double logistic(double y0, double r, double cap, double t) {
  const double e = std::exp(r * t);
  return cap * y0 * e / (cap + y0 * (e - 1.0));
}

LVParams random_lv(Rng& rng) {
  LVParams p;
  p.r1 = 0.2 + 2.0 * rng.uniform();
  p.r2 = 0.2 + 2.0 * rng.uniform();
  p.beta1 = 0.2 + rng.uniform();
  p.beta2 = 0.2 + rng.uniform();
  p.lambda = {{{0.5 + rng.uniform(), 2.0 * rng.uniform()}, {2.0 * rng.uniform(), 0.5 + rng.uniform()}}};
  return p;
}

ModelParams mean_field_params(double B, double D, double alpha, double U) {
  ModelParams p;
  p.birth = RateForm::constant(B);
  p.death = RateForm::constant(D);
  p.selection = RateForm::constant(alpha);
  p.competition = KernelForm::constant(U);
  p.cell_birth = {TraitForm::constant(1.0), TraitForm::constant(1.0)};
  p.cell_competition = {TraitForm::constant(1.0), TraitForm::constant(1.0)};
  p.lambda = {{{2.0, 1.0}, {1.0, 2.0}}};
  return validate_params(p);
}

Measure cloud(std::size_t n, std::uint64_t seed, double mass) {
  Rng rng(seed);
  Measure m;
  for (std::size_t i = 0; i < n; ++i)
    m.push_back({Trait{rng.uniform()}, 0.05 + 2.0 * rng.uniform(), 0.05 + 2.0 * rng.uniform(),
                 mass / static_cast<double>(n)});
  return m;
}

DensityGrid bump(const GridSpec& g, double c1, double c2, double width, double mass) {
  DensityGrid d = DensityGrid::sample(g, [&](double, double y1, double y2) {
    return std::exp(-((y1 - c1) * (y1 - c1) + (y2 - c2) * (y2 - c2)) / (2 * width * width));
  });
  const double m = d.mass();
  for (double& v : d.values) v *= mass / m;
  return d;
}

}  // namespace

TEST_CASE("lv_flow: origin is fixed and s = t is the identity") {
  Rng rng(1);
  const LVParams p = random_lv(rng);
  const Vec2 z = lv_flow(p, {0.0, 0.0}, 0.0, 50.0);
  CHECK(z[0] == 0.0);
  CHECK(z[1] == 0.0);
  const Vec2 y{0.3, 0.7};
  CHECK(lv_flow(p, y, 2.0, 2.0) == y);
}

TEST_CASE("lv_flow: decoupled coordinates follow the logistic curve") {
  LVParams p;
  p.r1 = 1.3;
  p.r2 = 0.4;
  p.beta1 = 0.8;
  p.beta2 = 1.1;
  p.lambda = {{{1.5, 0.0}, {0.0, 2.0}}};
  for (double t : {0.1, 1.0, 5.0, 20.0}) {
    const Vec2 y = lv_flow(p, {0.05, 3.0}, 0.0, t);
    CHECK(std::abs(y[0] - logistic(0.05, 1.3, 1.3 / (0.8 * 1.5), t)) < 1e-7);
    CHECK(std::abs(y[1] - logistic(3.0, 0.4, 0.4 / (1.1 * 2.0), t)) < 1e-7);
  }
}

TEST_CASE("lv_flow: flow property, axis invariance and boundedness") {
  Rng rng(2);
  for (int k = 0; k < 100; ++k) {
    const LVParams p = random_lv(rng);
    const Vec2 y{3.0 * rng.uniform(), 3.0 * rng.uniform()};
    double s = 10.0 * rng.uniform(), u = 10.0 * rng.uniform(), t = 10.0 * rng.uniform();
    if (s > u) std::swap(s, u);
    if (u > t) std::swap(u, t);
    if (s > u) std::swap(s, u);
    const Vec2 direct = lv_flow(p, y, s, t);
    const Vec2 split = lv_flow(p, lv_flow(p, y, s, u), u, t);
    CHECK(std::max(std::abs(direct[0] - split[0]), std::abs(direct[1] - split[1])) <= 1e-7);
    CHECK(direct[0] <= std::max(y[0], p.r1 / (p.beta1 * p.lambda[0][0])) + 1e-8);
    CHECK(direct[1] <= std::max(y[1], p.r2 / (p.beta2 * p.lambda[1][1])) + 1e-8);
    const Vec2 axis = lv_flow(p, {0.0, y[1]}, s, t);
    CHECK(axis[0] == 0.0);
  }
}

TEST_CASE("lv_equilibrium: decoupled logistics coexist at their capacities") {
  LVParams p;
  p.r1 = 2.0;
  p.r2 = 0.5;
  p.beta1 = 0.5;
  p.beta2 = 2.0;
  p.lambda = {{{4.0, 0.0}, {0.0, 0.25}}};
  const EquilibriumReport rep = lv_equilibrium(p);
  CHECK(rep.kind == EquilibriumCase::Coexistence);
  CHECK(rep.pi[0] == doctest::Approx(2.0 / (0.5 * 4.0)));
  CHECK(rep.pi[1] == doctest::Approx(0.5 / (2.0 * 0.25)));
}

TEST_CASE("lv_equilibrium: symmetric competition gives (1/3, 1/3)") {
  LVParams p;
  p.r1 = p.r2 = 1.0;
  p.beta1 = p.beta2 = 1.0;
  p.lambda = {{{2.0, 1.0}, {1.0, 2.0}}};
  const EquilibriumReport rep = lv_equilibrium(p);
  CHECK(rep.kind == EquilibriumCase::Coexistence);
  // 2 y1 + y2 = 1, y1 + 2 y2 = 1 by Cramer's rule
  CHECK(std::abs(rep.pi[0] - 1.0 / 3.0) < 1e-12);
  CHECK(std::abs(rep.pi[1] - 1.0 / 3.0) < 1e-12);
  const Vec2 c = lv_velocity(p, rep.pi);
  CHECK(std::abs(c[0]) < 1e-10);
  CHECK(std::abs(c[1]) < 1e-10);
  const Vec2 y = lv_flow(p, {0.9, 0.05}, 0.0, 1000.0);
  CHECK(std::abs(y[0] - 1.0 / 3.0) < 1e-4);
  CHECK(std::abs(y[1] - 1.0 / 3.0) < 1e-4);
}

TEST_CASE("lv_equilibrium: type 1 excludes type 2 when r2 l11 - r1 l21 < 0") {
  LVParams p;
  p.r1 = p.r2 = 1.0;
  p.beta1 = p.beta2 = 1.0;
  p.lambda = {{{1.0, 0.5}, {2.0, 1.0}}};
  const EquilibriumReport rep = lv_equilibrium(p);
  CHECK(rep.case1_condition < 0.0);
  CHECK(rep.kind == EquilibriumCase::Boundary1);
  CHECK(rep.pi[0] == doctest::Approx(1.0));
  CHECK(rep.pi[1] == 0.0);
  const Vec2 y = lv_flow(p, {0.1, 0.8}, 0.0, 1000.0);
  CHECK(std::abs(y[0] - 1.0) < 1e-4);
  CHECK(y[1] < 1e-4);
}

TEST_CASE("lv_equilibrium: bistable instances stay unclassified") {
  LVParams p;
  p.r1 = p.r2 = 1.0;
  p.beta1 = p.beta2 = 1.0;
  p.lambda = {{{1.0, 2.0}, {2.0, 1.0}}};
  CHECK(lv_equilibrium(p).kind == EquilibriumCase::Unclassified);
}

TEST_CASE("lv_equilibrium: classified limits are reached from random starts") {
  Rng rng(3);
  int classified = 0;
  for (int k = 0; k < 60; ++k) {
    const LVParams p = random_lv(rng);
    const EquilibriumReport rep = lv_equilibrium(p);
    if (rep.kind == EquilibriumCase::Unclassified) continue;
    ++classified;
    CHECK(rep.pi[0] >= 0.0);
    CHECK(rep.pi[1] >= 0.0);
    const Vec2 y = lv_flow(p, {0.05 + rng.uniform(), 0.05 + rng.uniform()}, 0.0, 1000.0);
    CHECK(std::abs(y[0] - rep.pi[0]) < 1e-4);
    CHECK(std::abs(y[1] - rep.pi[1]) < 1e-4);
  }
  CHECK(classified > 20);
}

TEST_CASE("meanfield: logistic mass reaches R / (alpha U)") {
  const ModelParams p = mean_field_params(1.0, 0.5, 1.0, 0.25);
  const auto res = meanfield_constant_solve(cloud(20, 4, 0.3), p, 100.0, 1.0);
  CHECK(std::abs(res.mass.back() - 2.0) < 1e-6);
  for (std::size_t k = 0; k < res.times.size(); ++k)
    CHECK(res.mass[k] == doctest::Approx(logistic(0.3, 0.5, 2.0, res.times[k])).epsilon(1e-12));
}

TEST_CASE("meanfield: R <= 0 drives the mass to zero") {
  const ModelParams p = mean_field_params(0.5, 0.7, 1.0, 0.25);
  const double m0 = 1.5, R = -0.2;
  const auto res = meanfield_constant_solve(cloud(10, 5, m0), p, 40.0, 0.5);
  for (std::size_t k = 1; k < res.times.size(); ++k) {
    CHECK(res.mass[k] < res.mass[k - 1]);
    CHECK(res.mass[k] < m0 * std::exp(R * res.times[k]) + 1e-12);
  }
  const ModelParams q = mean_field_params(0.5, 0.5, 1.0, 0.25);
  const auto flat = meanfield_constant_solve(cloud(10, 5, m0), q, 40.0, 0.5);
  CHECK(flat.mass.back() < flat.mass.front());
}

TEST_CASE("meanfield: cell proportions settle on the equilibrium and the cloud concentrates") {
  const ModelParams p = mean_field_params(1.0, 0.5, 1.0, 0.25);
  const auto res = meanfield_constant_solve(cloud(50, 6, 1.0), p, 1000.0, 100.0);
  const Measure& end = res.snapshots.back();
  double m = 0.0, y1 = 0.0, y2 = 0.0;
  for (const auto& a : end) {
    m += a.w;
    y1 += a.w * a.y1;
    y2 += a.w * a.y2;
  }
  CHECK(std::abs(y1 / m - 1.0 / 3.0) < 1e-3);
  CHECK(std::abs(y2 / m - 1.0 / 3.0) < 1e-3);
  CHECK(cell_state_variance(end) < 1e-4);
  CHECK_FALSE(res.moment_flag);
  CHECK(std::isfinite(res.sup_second_moment));
}

TEST_CASE("meanfield: characteristic solver agrees with the constant-case solver") {
  const ModelParams p = mean_field_params(1.0, 0.5, 1.0, 0.25);
  const Measure v0 = cloud(15, 7, 0.5);
  const auto a = meanfield_constant_solve(v0, p, 10.0, 1.0);
  const auto b = characteristic_particle_solve(v0, p, 10.0, 1.0);
  for (std::size_t k = 0; k < a.times.size(); ++k) {
    CHECK(b.mass[k] == doctest::Approx(a.mass[k]).epsilon(1e-6));
    for (std::size_t i = 0; i < v0.size(); ++i) {
      CHECK(std::abs(a.snapshots[k][i].y1 - b.snapshots[k][i].y1) < 1e-6);
      CHECK(std::abs(a.snapshots[k][i].w - b.snapshots[k][i].w) < 1e-6);
    }
  }
}

TEST_CASE("meanfield: mutation is rejected") {
  ModelParams p = mean_field_params(1.0, 0.5, 1.0, 0.25);
  p.mutation_prob = TraitForm::constant(0.1);
  CHECK_THROWS_AS(meanfield_constant_solve(cloud(3, 1, 1.0), p, 1.0, 0.1), Error);
}

TEST_CASE("transport: pure exponential growth") {
  ModelParams p;
  p.birth = RateForm::constant(1.0);
  p.death = RateForm::constant(0.3);
  p = validate_params(p);
  const GridSpec g{0.0, 1.0, 2.0, 2.0, 4, 8, 8};
  const DensityGrid phi0 = DensityGrid::sample(g, [](double x, double y1, double y2) { return 1.0 + x + y1 * y2; });
  TransportOptions opt;
  opt.dt = 1e-3;
  opt.dt_out = 0.5;
  const auto res = transport_mild_solve(phi0, p, 1.0, opt);
  const DensityGrid& end = res.snapshots.back();
  CHECK(end.time == doctest::Approx(1.0));
  double err = 0.0;
  for (std::size_t q = 0; q < g.size(); ++q)
    err = std::max(err, std::abs(end.values[q] - phi0.values[q] * std::exp(0.7)) / phi0.values[q]);
  CHECK(err < 1e-6);
}

TEST_CASE("transport: mass follows the logistic moment equation") {
  const ModelParams p = mean_field_params(1.0, 0.5, 1.0, 0.25);
  const GridSpec g{0.0, 1.0, 1.0, 1.0, 1, 32, 32};
  const DensityGrid phi0 = bump(g, 0.5, 0.3, 0.08, 0.4);
  TransportOptions opt;
  opt.dt = 0.05;
  opt.dt_out = 1.0;
  const auto res = transport_mild_solve(phi0, p, 5.0, opt);
  const double exact = logistic(0.4, 0.5, 2.0, 5.0);
  CHECK(std::abs(res.snapshots.back().mass() - exact) / exact < 0.01);
  CHECK(res.unconverged_slabs == 0);
  for (const auto& hist : res.picard_history)
    for (std::size_t k = 2; k < hist.size(); ++k) CHECK(hist[k] <= hist[k - 1]);
  for (const auto& snap : res.snapshots) CHECK(snap.min_value() >= 0.0);
}

TEST_CASE("transport: mutation spreads mass in x while total mass grows at rate B") {
  ModelParams p;
  p.birth = RateForm::constant(0.8);
  p.mutation_prob = TraitForm::constant(1.0);
  p.mutation_sd = TraitForm::constant(0.1);
  p = validate_params(p);
  const GridSpec g{0.0, 1.0, 1.0, 1.0, 40, 2, 2};
  DensityGrid phi0(g);
  for (std::size_t j = 0; j < 2; ++j)
    for (std::size_t k = 0; k < 2; ++k) phi0.at(20, j, k) = 1.0;
  TransportOptions opt;
  opt.dt = 1e-3;
  opt.dt_out = 0.5;
  const auto res = transport_mild_solve(phi0, p, 1.0, opt);
  const DensityGrid& end = res.snapshots.back();
  CHECK(end.mass() == doctest::Approx(phi0.mass() * std::exp(0.8)).epsilon(1e-6));
  const auto col = end.column_mass();
  CHECK(col[20] < 0.5 * end.mass());
  CHECK(col[15] > 0.0);
  CHECK(col[25] > 0.0);
}

TEST_CASE("transport: mutation transfer columns sum to one") {
  ModelParams p;
  p.mutation_sd = TraitForm::linear(0.05, 0.2);
  p = validate_params(p);
  const GridSpec g{0.0, 1.0, 1.0, 1.0, 25, 1, 1};
  const auto w = mutation_transfer(g, p);
  for (std::size_t l = 0; l < g.nx; ++l) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.nx; ++i) {
      CHECK(w[i][l] >= 0.0);
      s += w[i][l];
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("transport: refinement reduces the error against the particle solution") {
  const ModelParams p = mean_field_params(1.0, 0.5, 1.0, 0.25);
  const GridSpec coarse{0.0, 1.0, 1.0, 1.0, 1, 16, 16};
  auto density = [](double, double y1, double y2) {
    return std::exp(-((y1 - 0.6) * (y1 - 0.6) + (y2 - 0.25) * (y2 - 0.25)) / (2 * 0.1 * 0.1));
  };
  const double T = 2.0;
  const DensityGrid ref0 = DensityGrid::sample(coarse.refined(8), density);
  const auto ref = meanfield_constant_solve(ref0.to_measure(), p, T, T);
  double ry1 = 0.0, ry2 = 0.0;
  for (const auto& a : ref.snapshots.back()) {
    ry1 += a.w * a.y1;
    ry2 += a.w * a.y2;
  }
  auto error = [&](const GridSpec& g, double dt) {
    TransportOptions opt;
    opt.dt = dt;
    opt.dt_out = T;
    const auto res = transport_mild_solve(DensityGrid::sample(g, density), p, T, opt);
    const DensityGrid& end = res.snapshots.back();
    return std::max({std::abs(end.moment(0) - ry1), std::abs(end.moment(1) - ry2),
                     std::abs(end.mass() - ref.mass.back())});
  };
  const double e1 = error(coarse, 0.1);
  const double e2 = error(coarse.refined(2), 0.05);
  CHECK(e1 / e2 >= 1.5);
}

TEST_CASE("reaction-diffusion: pure diffusion conserves mass") {
  ModelParams p;
  p.mutation_prob = TraitForm::constant(0.5);
  p.acceleration = Acceleration{RateForm::constant(2.0), TraitForm::constant(0.05), TraitForm::constant(0.3)};
  p = validate_params(p);
  const GridSpec g{0.0, 1.0, 2.0, 2.0, 16, 16, 16};
  const DensityGrid w0 = DensityGrid::sample(g, [](double x, double y1, double y2) {
    return std::exp(-20 * (x - 0.3) * (x - 0.3)) * std::exp(-10 * (y1 - 0.5) * (y1 - 0.5) - 4 * y2);
  });
  for (auto conv : {DiffusionConvention::Printed, DiffusionConvention::Generator}) {
    ReactionDiffusionOptions opt;
    opt.dt = 0.01;
    opt.dt_out = 0.5;
    opt.convention = conv;
    opt.reaction = false;
    const auto res = reaction_diffusion_solve(w0, p, 2.0, opt);
    CHECK(std::abs(res.snapshots.back().mass() - w0.mass()) < 1e-8);
    CHECK(res.snapshots.back().min_value() >= 0.0);
  }
}

TEST_CASE("reaction-diffusion: y-diffusion variance grows like 2 gamma t") {
  ModelParams p;
  p.mutation_prob = TraitForm::constant(0.5);
  p.acceleration = Acceleration{RateForm::constant(1.0), TraitForm::constant(0.02), TraitForm::constant(0.1)};
  p = validate_params(p);
  const GridSpec g{0.0, 1.0, 4.0, 0.1, 1, 200, 1};
  DensityGrid w0(g);
  w0.at(0, 100, 0) = 1.0;
  ReactionDiffusionOptions opt;
  opt.dt = 0.01;
  opt.dt_out = 1.0;
  opt.reaction = false;
  const auto res = reaction_diffusion_solve(w0, p, 5.0, opt);
  auto variance = [](const DensityGrid& d) {
    double m = 0.0, s1 = 0.0, s2 = 0.0;
    for (std::size_t j = 0; j < d.spec.ny1; ++j) {
      const double v = d.at(0, j, 0);
      m += v;
      s1 += v * d.spec.y1(j);
      s2 += v * d.spec.y1(j) * d.spec.y1(j);
    }
    return s2 / m - (s1 / m) * (s1 / m);
  };
  const double growth = variance(res.snapshots.back()) - variance(w0);
  CHECK(std::abs(growth - 2 * 0.02 * 5.0) / (2 * 0.02 * 5.0) < 0.05);
}

TEST_CASE("reaction-diffusion: degenerate coefficients reproduce the transport solver") {
  const ModelParams p = mean_field_params(1.0, 0.5, 1.0, 0.25);
  const GridSpec g{0.0, 1.0, 1.0, 1.0, 1, 64, 64};
  const DensityGrid phi0 = bump(g, 0.5, 0.3, 0.08, 0.4);
  TransportOptions topt;
  topt.dt = 0.05;
  topt.dt_out = 2.0;
  const auto tr = transport_mild_solve(phi0, p, 2.0, topt);
  ReactionDiffusionOptions ropt;
  ropt.dt_out = 2.0;
  ropt.require_ellipticity = false;
  const auto rd = reaction_diffusion_solve(phi0, p, 2.0, ropt);
  const DensityGrid &a = tr.snapshots.back(), &b = rd.snapshots.back();
  CHECK(b.mass() == doctest::Approx(a.mass()).epsilon(0.01));
  CHECK(b.moment(0) == doctest::Approx(a.moment(0)).epsilon(0.03));
  CHECK(b.moment(1) == doctest::Approx(a.moment(1)).epsilon(0.03));
}

TEST_CASE("reaction-diffusion: errors") {
  const ModelParams p = mean_field_params(1.0, 0.5, 1.0, 0.25);
  const GridSpec g{0.0, 1.0, 1.0, 1.0, 1, 64, 64};
  const DensityGrid phi0 = bump(g, 0.5, 0.3, 0.08, 0.4);
  ReactionDiffusionOptions opt;
  CHECK_THROWS_WITH_AS(reaction_diffusion_solve(phi0, p, 1.0, opt), doctest::Contains("EllipticityViolated"), Error);
  opt.require_ellipticity = false;
  opt.dt = 1.0;
  opt.dt_out = 1.0;
  CHECK_THROWS_WITH_AS(reaction_diffusion_solve(phi0, p, 1.0, opt), doctest::Contains("CFLViolation"), Error);
}

TEST_CASE("stationary: constant selection") {
  const StationaryReport rep = stationary_report(mean_field_params(1.0, 0.5, 1.0, 0.25));
  CHECK(rep.shape == SelectionShape::Constant);
  CHECK(rep.mass == doctest::Approx(2.0));
  CHECK(rep.pi[0] == doctest::Approx(1.0 / 3.0));
  CHECK_FALSE(rep.conjecture);
  CHECK(stationary_report(mean_field_params(0.5, 0.5, 1.0, 0.25)).mass == 0.0);
  CHECK(stationary_report(mean_field_params(0.2, 0.5, 1.0, 0.25)).mass == 0.0);
}

TEST_CASE("stationary: linear selection candidate and Laplace check") {
  ModelParams p = mean_field_params(1.5, 0.5, 1.0, 1.0);
  p.selection = RateForm::affine(0.0, 1.0, 1.0);
  p = validate_params(p);
  const StationaryReport rep = stationary_report(p);
  CHECK(rep.shape == SelectionShape::Linear);
  CHECK(rep.conjecture);
  CHECK(rep.mass == doctest::Approx(1.0 / (2.0 / 3.0)));
  CHECK(rep.constraint_target == doctest::Approx(1.0));
  CHECK(rep.constraint_value == doctest::Approx(1.0));
  CHECK_FALSE(rep.locally_stable);

  Rng rng(8);
  std::vector<std::array<double, 2>> z;
  for (int k = 0; k < 100; ++k) z.push_back({5.0 * rng.uniform(), 5.0 * rng.uniform()});
  CHECK(laplace_stationarity_check(rep.mass, rep.pi, p, z) < 1e-9);
  CHECK(laplace_stationarity_check(rep.mass, {rep.pi[0] + 0.1, rep.pi[1]}, p, z) > 1e-3);

  const LaplaceAnsatz at0 = laplace_ansatz(rep.mass, rep.pi, {0.0, 0.0});
  CHECK(at0.value == rep.mass);
  CHECK(at0.gradient[0] == -rep.mass * rep.pi[0]);
  CHECK(at0.gradient[1] == -rep.mass * rep.pi[1]);
}

TEST_CASE("stationary: local stability flag compares max(r1, r2) with R") {
  ModelParams p = mean_field_params(3.0, 0.5, 1.0, 1.0);
  p.selection = RateForm::affine(0.0, 0.5, 0.5);
  const StationaryReport rep = stationary_report(validate_params(p));
  CHECK(rep.locally_stable);
}
