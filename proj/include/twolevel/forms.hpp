#pragma once

#include <string>
#include <string_view>

#include "twolevel/trait.hpp"

namespace twolevel {

/// Closed-form function of the trait.
///   constant:  c0
///   linear:    c0 + slope * (x_0 + ... + x_{d-1})
///   gaussian:  c0 * exp(-|x - center|^2 / (2 width^2))
struct TraitForm {
  enum class Kind { Constant, Linear, Gaussian };
  Kind kind = Kind::Constant;
  double c0 = 0.0;
  double slope = 0.0;
  double center = 0.0;
  double width = 1.0;

  static TraitForm constant(double c) { return {Kind::Constant, c}; }
  static TraitForm linear(double c, double s) { return {Kind::Linear, c, s}; }
  static TraitForm gaussian(double amp, double center, double width) {
    return {Kind::Gaussian, amp, 0.0, center, width};
  }

  double operator()(const Trait& x) const noexcept;
  bool is_constant() const noexcept { return kind == Kind::Constant || (kind == Kind::Linear && slope == 0.0); }
  TraitForm scaled(double s) const noexcept;

  friend bool operator==(const TraitForm&, const TraitForm&) = default;
};

/// Rate function of (x, y1, y2): a trait factor times a cell-dependent part.
///   constant:    c0
///   affine:      c0 + c1 y1 + c2 y2
///   product:     factor(x) * (c0 + c1 y1 + c2 y2)
///   proportion:  factor(x) * (c0 + c1 y1 / (y1 + y2)), with the ratio read as 0 when y1 = y2 = 0
struct RateForm {
  enum class Kind { Constant, Affine, Product, Proportion };
  Kind kind = Kind::Constant;
  TraitForm factor = TraitForm::constant(1.0);
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;

  static RateForm constant(double c) { return {Kind::Constant, TraitForm::constant(1.0), c}; }
  static RateForm affine(double c0, double c1, double c2) {
    return {Kind::Affine, TraitForm::constant(1.0), c0, c1, c2};
  }
  static RateForm product(TraitForm f, double c0, double c1, double c2) {
    return {Kind::Product, f, c0, c1, c2};
  }
  static RateForm proportion(TraitForm f, double c0, double c1) { return {Kind::Proportion, f, c0, c1}; }

  double operator()(const Trait& x, double y1, double y2) const noexcept;

  bool is_constant() const noexcept;
  bool depends_on_cells() const noexcept;

  friend bool operator==(const RateForm&, const RateForm&) = default;
};

/// Competition kernel U evaluated on trait differences.
///   constant:  u0
///   gaussian:  u0 * exp(-|h|^2 / (2 width^2))
struct KernelForm {
  enum class Kind { Constant, Gaussian };
  Kind kind = Kind::Constant;
  double u0 = 0.0;
  double width = 1.0;

  static KernelForm constant(double u) { return {Kind::Constant, u}; }
  static KernelForm gaussian(double u, double width) { return {Kind::Gaussian, u, width}; }

  double operator()(const Trait& h) const noexcept;
  double sup() const noexcept { return u0; }
  bool is_constant() const noexcept { return kind == Kind::Constant || u0 == 0.0; }

  friend bool operator==(const KernelForm&, const KernelForm&) = default;
};

std::string_view kind_name(TraitForm::Kind k);
std::string_view kind_name(RateForm::Kind k);
std::string_view kind_name(KernelForm::Kind k);

}  // namespace twolevel
