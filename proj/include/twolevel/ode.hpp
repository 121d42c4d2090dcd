#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "twolevel/error.hpp"

namespace twolevel {

struct OdeOptions {
  double atol = 1e-10;
  double rtol = 1e-8;
  double initial_step = 0.0;  // 0: chosen from the right-hand side
  std::size_t max_steps = 1'000'000;
};

struct OdeStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

/// Dormand-Prince 5(4) with max-norm error control. State is any fixed-size
/// container with size() and operator[] (std::array or std::vector).
/// `project` is applied to every accepted state (e.g. clamping at zero).
template <class State, class Rhs, class Project>
State dormand_prince(Rhs&& f, double t0, double t1, State y, const OdeOptions& opt, Project&& project,
                     OdeStats* stats = nullptr) {
  if (t1 == t0) return y;
  const double dir = t1 > t0 ? 1.0 : -1.0;
  const std::size_t n = y.size();
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;

  State k1 = f(t0, y), k2 = y, k3 = y, k4 = y, k5 = y, k6 = y, k7 = y, tmp = y, ynew = y;
  auto scale = [&](std::size_t i, const State& a, const State& b) {
    return opt.atol + opt.rtol * std::max(std::abs(a[i]), std::abs(b[i]));
  };

  double h = opt.initial_step;
  if (h <= 0.0) {
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double sc = opt.atol + opt.rtol * std::abs(y[i]);
      d0 = std::max(d0, std::abs(y[i]) / sc);
      d1 = std::max(d1, std::abs(k1[i]) / sc);
    }
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  }
  h = std::min(h, std::abs(t1 - t0));

  double t = t0;
  std::size_t steps = 0;
  while (dir * (t1 - t) > 0.0) {
    if (++steps > opt.max_steps) throw Error(ErrorCode::StepFailure, "step budget exhausted");
    if (h < 1e-14 * std::max(1.0, std::abs(t))) throw Error(ErrorCode::StepFailure, "step size underflow");
    bool last = false;
    if (h >= std::abs(t1 - t)) {
      h = std::abs(t1 - t);
      last = true;
    }
    const double hs = dir * h;
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + hs * a21 * k1[i];
    k2 = f(t + c2 * hs, tmp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
    k3 = f(t + c3 * hs, tmp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    k4 = f(t + c4 * hs, tmp);
    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    k5 = f(t + c5 * hs, tmp);
    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = y[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    k6 = f(t + hs, tmp);
    for (std::size_t i = 0; i < n; ++i)
      ynew[i] = y[i] + hs * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    k7 = f(t + hs, ynew);
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      err = std::max(err, std::abs(e) / scale(i, y, ynew));
    }
    if (!std::isfinite(err)) {
      h *= 0.2;
      if (stats) ++stats->rejected;
      continue;
    }
    if (err <= 1.0) {
      t = last ? t1 : t + hs;
      y = ynew;
      project(y);
      k1 = f(t, y);
      if (stats) ++stats->accepted;
      const double fac = err == 0.0 ? 5.0 : std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -0.2)));
      h *= fac;
    } else {
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
      if (stats) ++stats->rejected;
    }
  }
  return y;
}

template <class State, class Rhs>
State dormand_prince(Rhs&& f, double t0, double t1, State y, const OdeOptions& opt = {}, OdeStats* stats = nullptr) {
  return dormand_prince(std::forward<Rhs>(f), t0, t1, std::move(y), opt, [](State&) {}, stats);
}

}  // namespace twolevel
