#pragma once

#include <array>
#include <string_view>

#include "twolevel/model.hpp"
#include "twolevel/ode.hpp"

namespace twolevel {

using Vec2 = std::array<double, 2>;

struct LVParams {
  double r1 = 0.0;
  double r2 = 0.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  std::array<std::array<double, 2>, 2> lambda{};

  /// Cell coefficients of params evaluated at trait x (unscaled).
  static LVParams at(const ModelParams& params, const Trait& x);
};

/// c(y) = (y1 (r1 - beta1 (l11 y1 + l12 y2)), y2 (r2 - beta2 (l21 y1 + l22 y2)))
Vec2 lv_velocity(const LVParams& p, const Vec2& y);
/// Divergence of the velocity field in y.
double lv_divergence(const LVParams& p, const Vec2& y);

/// Solution at time t of the Lotka-Volterra system started from y at time s (s <= t; t < s
/// integrates backwards). A coordinate that starts at 0 stays exactly 0, and outputs are clamped at 0.
Vec2 lv_flow(const LVParams& p, const Vec2& y, double s, double t, const OdeOptions& opt = {});
Vec2 lv_flow(const Trait& x, const Vec2& y, double s, double t, const ModelParams& params, const OdeOptions& opt = {});

enum class EquilibriumCase { Boundary1, Boundary2, Coexistence, Unclassified };

std::string_view case_name(EquilibriumCase c);

struct EquilibriumReport {
  EquilibriumCase kind = EquilibriumCase::Unclassified;
  Vec2 pi{};
  double case1_condition = 0.0;   // r2 l11 - r1 l21
  double case2_condition = 0.0;   // r1 l22 - r2 l12
  Vec2 case3_printed{};           // (r2 l11 - r1 l12, r1 l22 - r2 l21)
  double invasion2 = 0.0;         // beta1 l11 r2 - beta2 l21 r1: type 2 invades (r1 / (beta1 l11), 0)
  double invasion1 = 0.0;         // beta2 l22 r1 - beta1 l12 r2: type 1 invades (0, r2 / (beta2 l22))
};

/// Long-time limit of the flow from a start with both coordinates positive.
EquilibriumReport lv_equilibrium(const LVParams& p);

/// Interior equilibrium from the closed-form expression (may be negative or non-finite).
Vec2 coexistence_point(const LVParams& p);

}  // namespace twolevel
