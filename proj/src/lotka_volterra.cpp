#include "twolevel/lotka_volterra.hpp"

#include <cmath>

namespace twolevel {

LVParams LVParams::at(const ModelParams& params, const Trait& x) {
  LVParams p;
  p.r1 = params.net_cell_growth(0, x);
  p.r2 = params.net_cell_growth(1, x);
  p.beta1 = params.cell_competition[0](x);
  p.beta2 = params.cell_competition[1](x);
  p.lambda = params.lambda;
  return p;
}

Vec2 lv_velocity(const LVParams& p, const Vec2& y) {
  const auto& l = p.lambda;
  return {y[0] * (p.r1 - p.beta1 * (l[0][0] * y[0] + l[0][1] * y[1])),
          y[1] * (p.r2 - p.beta2 * (l[1][0] * y[0] + l[1][1] * y[1]))};
}

double lv_divergence(const LVParams& p, const Vec2& y) {
  const auto& l = p.lambda;
  return p.r1 - p.beta1 * (2.0 * l[0][0] * y[0] + l[0][1] * y[1]) + p.r2 -
         p.beta2 * (l[1][0] * y[0] + 2.0 * l[1][1] * y[1]);
}

Vec2 lv_flow(const LVParams& p, const Vec2& y, double s, double t, const OdeOptions& opt) {
  if (s == t) return y;
  auto rhs = [&p](double, const Vec2& z) { return lv_velocity(p, z); };
  auto clamp = [](Vec2& z) {
    z[0] = std::max(z[0], 0.0);
    z[1] = std::max(z[1], 0.0);
  };
  return dormand_prince(rhs, s, t, y, opt, clamp);
}

Vec2 lv_flow(const Trait& x, const Vec2& y, double s, double t, const ModelParams& params, const OdeOptions& opt) {
  return lv_flow(LVParams::at(params, x), y, s, t, opt);
}

std::string_view case_name(EquilibriumCase c) {
  switch (c) {
    case EquilibriumCase::Boundary1: return "boundary-1";
    case EquilibriumCase::Boundary2: return "boundary-2";
    case EquilibriumCase::Coexistence: return "coexistence";
    case EquilibriumCase::Unclassified: return "unclassified";
  }
  return "?";
}

Vec2 coexistence_point(const LVParams& p) {
  const auto& l = p.lambda;
  const double det = p.beta1 * p.beta2 * (l[0][1] * l[1][0] - l[0][0] * l[1][1]);
  return {(p.beta1 * l[0][1] * p.r2 - p.beta2 * l[1][1] * p.r1) / det,
          (p.beta2 * l[1][0] * p.r1 - p.beta1 * l[0][0] * p.r2) / det};
}

EquilibriumReport lv_equilibrium(const LVParams& p) {
  const auto& l = p.lambda;
  EquilibriumReport rep;
  rep.case1_condition = p.r2 * l[0][0] - p.r1 * l[1][0];
  rep.case2_condition = p.r1 * l[1][1] - p.r2 * l[0][1];
  rep.case3_printed = {p.r2 * l[0][0] - p.r1 * l[0][1], p.r1 * l[1][1] - p.r2 * l[1][0]};
  rep.invasion2 = p.beta1 * l[0][0] * p.r2 - p.beta2 * l[1][0] * p.r1;
  rep.invasion1 = p.beta2 * l[1][1] * p.r1 - p.beta1 * l[0][1] * p.r2;

  const bool admissible = p.r1 > 0.0 && p.r2 > 0.0 && p.beta1 > 0.0 && p.beta2 > 0.0 && l[0][0] > 0.0 && l[1][1] > 0.0;
  if (!admissible) return rep;

  const double inv1 = rep.invasion1, inv2 = rep.invasion2;
  if (inv1 > 0.0 && inv2 > 0.0) {
    const Vec2 pi = coexistence_point(p);
    if (std::isfinite(pi[0]) && std::isfinite(pi[1]) && pi[0] > 0.0 && pi[1] > 0.0) {
      rep.kind = EquilibriumCase::Coexistence;
      rep.pi = pi;
    }
    return rep;
  }
  if ((inv2 < 0.0 && inv1 > 0.0) || (inv2 == 0.0 && inv1 > 0.0)) {
    rep.kind = EquilibriumCase::Boundary1;
    rep.pi = {p.r1 / (p.beta1 * l[0][0]), 0.0};
    return rep;
  }
  if ((inv1 < 0.0 && inv2 > 0.0) || (inv1 == 0.0 && inv2 > 0.0)) {
    rep.kind = EquilibriumCase::Boundary2;
    rep.pi = {0.0, p.r2 / (p.beta2 * l[1][1])};
    return rep;
  }
  // both boundary states resist invasion: the limit depends on the starting point
  return rep;
}

}  // namespace twolevel
