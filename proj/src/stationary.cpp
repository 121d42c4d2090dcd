#include "twolevel/stationary.hpp"

#include <cmath>

#include "twolevel/error.hpp"

namespace twolevel {

namespace {

std::array<double, 2> linear_coefficients(const RateForm& a) {
  switch (a.kind) {
    case RateForm::Kind::Affine:
      if (a.c0 == 0.0) return {a.c1, a.c2};
      break;
    case RateForm::Kind::Product:
      if (a.c0 == 0.0 && a.factor.is_constant()) return {a.factor.c0 * a.c1, a.factor.c0 * a.c2};
      break;
    default:
      break;
  }
  throw Error(ErrorCode::InvalidArgument, "selection must be constant or alpha1 y1 + alpha2 y2");
}

struct MeanField {
  double R = 0.0;
  double U = 0.0;
  LVParams lv;
};

MeanField mean_field(const ModelParams& params) {
  if (!params.birth.is_constant() || !params.death.is_constant() || !params.competition.is_constant())
    throw Error(ErrorCode::InvalidArgument, "stationary formulas need constant B, D and U");
  const Trait x = params.box.lower;
  MeanField m;
  m.R = params.birth(x, 0, 0) - params.death(x, 0, 0);
  m.U = params.competition.u0;
  m.lv = LVParams::at(params, x);
  return m;
}

}  // namespace

StationaryReport stationary_report(const ModelParams& params) {
  const MeanField mf = mean_field(params);
  StationaryReport rep;
  rep.R = mf.R;
  rep.equilibrium = lv_equilibrium(mf.lv);
  rep.pi = rep.equilibrium.pi;
  if (params.selection.is_constant()) {
    const double a = params.selection(params.box.lower, 0, 0);
    rep.shape = SelectionShape::Constant;
    rep.mass = mf.R > 0.0 && a * mf.U > 0.0 ? mf.R / (a * mf.U) : 0.0;
    return rep;
  }
  rep.shape = SelectionShape::Linear;
  rep.conjecture = true;
  rep.alpha = linear_coefficients(params.selection);
  const double ap = rep.alpha[0] * rep.pi[0] + rep.alpha[1] * rep.pi[1];
  rep.mass = mf.R > 0.0 && mf.U * ap > 0.0 ? mf.R / (mf.U * ap) : 0.0;
  rep.constraint_target = mf.U > 0.0 ? mf.R / mf.U : 0.0;
  rep.constraint_value = rep.mass * ap;
  rep.locally_stable = std::max(mf.lv.r1, mf.lv.r2) < mf.R;
  return rep;
}

LaplaceAnsatz laplace_ansatz(double mass, const Vec2& pi, const std::array<double, 2>& z) {
  LaplaceAnsatz l;
  l.value = mass * std::exp(-(pi[0] * z[0] + pi[1] * z[1]));
  l.gradient = {-pi[0] * l.value, -pi[1] * l.value};
  return l;
}

double laplace_stationarity_check(double mass, const Vec2& pi, const ModelParams& params,
                                  const std::vector<std::array<double, 2>>& zs) {
  const MeanField mf = mean_field(params);
  const auto alpha = linear_coefficients(params.selection);
  const auto& l = mf.lv.lambda;
  const std::array<double, 2> r{mf.lv.r1, mf.lv.r2}, beta{mf.lv.beta1, mf.lv.beta2};
  const double L0 = mass;
  double worst = 0.0;
  for (const auto& z : zs) {
    const LaplaceAnsatz a = laplace_ansatz(mass, pi, z);
    const double L = a.value;
    auto d2 = [&](std::size_t i, std::size_t j) { return pi[i] * pi[j] * L; };
    double res = mf.R * L + mf.U * L0 * (alpha[0] * a.gradient[0] + alpha[1] * a.gradient[1]);
    for (std::size_t i = 0; i < 2; ++i) {
      const std::size_t j = 1 - i;
      res += z[i] * r[i] * a.gradient[i] + z[i] * beta[i] * (l[i][i] * d2(i, i) + l[i][j] * d2(i, j));
    }
    worst = std::max(worst, std::abs(res));
  }
  return worst;
}

}  // namespace twolevel
