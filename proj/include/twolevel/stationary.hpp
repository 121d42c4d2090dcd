#pragma once

#include <array>
#include <vector>

#include "twolevel/lotka_volterra.hpp"
#include "twolevel/model.hpp"

namespace twolevel {

enum class SelectionShape { Constant, Linear };

struct StationaryReport {
  SelectionShape shape = SelectionShape::Constant;
  double R = 0.0;
  double mass = 0.0;
  Vec2 pi{};
  EquilibriumReport equilibrium;
  std::array<double, 2> alpha{};  // (alpha1, alpha2) for linear selection
  double constraint_target = 0.0; // R / U, linear selection only
  double constraint_value = 0.0;  // <v_inf, alpha . y> of the candidate
  bool locally_stable = false;    // max(r1, r2) < R, linear selection only
  bool conjecture = false;
};

/// Long-time state of the mean-field limit with constant B, D, U and cell rates that do not
/// depend on the trait. Selection is either constant or alpha1 y1 + alpha2 y2.
StationaryReport stationary_report(const ModelParams& params);

struct LaplaceAnsatz {
  double value = 0.0;
  std::array<double, 2> gradient{};
};

/// L(z) = mass exp(-pi . z) and its gradient.
LaplaceAnsatz laplace_ansatz(double mass, const Vec2& pi, const std::array<double, 2>& z);

/// Max over z of |R L + U L(0) (alpha . grad L) + sum_i z_i (r_i d_i L + beta_i (l_ii d_ii L + l_ij d_ij L))|
/// for the exponential ansatz, with all partials taken analytically.
double laplace_stationarity_check(double mass, const Vec2& pi, const ModelParams& params,
                                  const std::vector<std::array<double, 2>>& z);

}  // namespace twolevel
