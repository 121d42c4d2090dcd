#include "twolevel/forms.hpp"

#include <cmath>

namespace twolevel {

double TraitForm::operator()(const Trait& x) const noexcept {
  switch (kind) {
    case Kind::Constant:
      return c0;
    case Kind::Linear: {
      double s = 0.0;
      for (double v : x.coords()) s += v;
      return c0 + slope * s;
    }
    case Kind::Gaussian: {
      double r2 = 0.0;
      for (double v : x.coords()) r2 += (v - center) * (v - center);
      return c0 * std::exp(-r2 / (2.0 * width * width));
    }
  }
  return 0.0;
}

TraitForm TraitForm::scaled(double s) const noexcept {
  TraitForm out = *this;
  out.c0 *= s;
  if (kind == Kind::Linear) out.slope *= s;
  return out;
}

double RateForm::operator()(const Trait& x, double y1, double y2) const noexcept {
  switch (kind) {
    case Kind::Constant:
      return c0;
    case Kind::Affine:
      return c0 + c1 * y1 + c2 * y2;
    case Kind::Product:
      return factor(x) * (c0 + c1 * y1 + c2 * y2);
    case Kind::Proportion: {
      const double tot = y1 + y2;
      const double ratio = tot > 0.0 ? y1 / tot : 0.0;
      return factor(x) * (c0 + c1 * ratio);
    }
  }
  return 0.0;
}

bool RateForm::is_constant() const noexcept {
  switch (kind) {
    case Kind::Constant:
      return true;
    case Kind::Affine:
      return c1 == 0.0 && c2 == 0.0;
    case Kind::Product:
      return (c1 == 0.0 && c2 == 0.0 && factor.is_constant()) || (c0 == 0.0 && c1 == 0.0 && c2 == 0.0);
    case Kind::Proportion:
      return c1 == 0.0 && factor.is_constant();
  }
  return false;
}

bool RateForm::depends_on_cells() const noexcept {
  switch (kind) {
    case Kind::Constant:
      return false;
    case Kind::Affine:
    case Kind::Product:
      return c1 != 0.0 || c2 != 0.0;
    case Kind::Proportion:
      return c1 != 0.0;
  }
  return true;
}

double KernelForm::operator()(const Trait& h) const noexcept {
  if (kind == Kind::Constant) return u0;
  return u0 * std::exp(-h.squared_norm() / (2.0 * width * width));
}

std::string_view kind_name(TraitForm::Kind k) {
  switch (k) {
    case TraitForm::Kind::Constant: return "constant";
    case TraitForm::Kind::Linear: return "linear";
    case TraitForm::Kind::Gaussian: return "gaussian";
  }
  return "?";
}

std::string_view kind_name(RateForm::Kind k) {
  switch (k) {
    case RateForm::Kind::Constant: return "constant";
    case RateForm::Kind::Affine: return "affine";
    case RateForm::Kind::Product: return "product";
    case RateForm::Kind::Proportion: return "proportion";
  }
  return "?";
}

std::string_view kind_name(KernelForm::Kind k) {
  switch (k) {
    case KernelForm::Kind::Constant: return "constant";
    case KernelForm::Kind::Gaussian: return "gaussian";
  }
  return "?";
}

}  // namespace twolevel
