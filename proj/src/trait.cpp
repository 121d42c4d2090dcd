#include "twolevel/trait.hpp"

#include <algorithm>
#include <stdexcept>

namespace twolevel {

Trait::Trait(std::size_t dim) : dim_(static_cast<std::uint8_t>(dim)) {
  if (dim == 0 || dim > kMaxTraitDim) throw std::invalid_argument("trait dimension out of range");
}

Trait::Trait(std::initializer_list<double> coords) : Trait(std::span<const double>(coords.begin(), coords.size())) {}

Trait::Trait(std::span<const double> coords) : Trait(coords.size()) {
  std::copy(coords.begin(), coords.end(), coords_.begin());
}

Trait Trait::operator+(const Trait& other) const noexcept {
  Trait out = *this;
  for (std::size_t k = 0; k < dim_; ++k) out.coords_[k] += other.coords_[k];
  return out;
}

Trait Trait::operator-(const Trait& other) const noexcept {
  Trait out = *this;
  for (std::size_t k = 0; k < dim_; ++k) out.coords_[k] -= other.coords_[k];
  return out;
}

double Trait::squared_norm() const noexcept {
  double s = 0.0;
  for (std::size_t k = 0; k < dim_; ++k) s += coords_[k] * coords_[k];
  return s;
}

bool operator==(const Trait& a, const Trait& b) noexcept {
  if (a.dim_ != b.dim_) return false;
  for (std::size_t k = 0; k < a.dim_; ++k)
    if (a.coords_[k] != b.coords_[k]) return false;
  return true;
}

TraitBox TraitBox::unit(std::size_t dim) {
  TraitBox box{Trait(dim), Trait(dim)};
  for (std::size_t k = 0; k < dim; ++k) box.upper[k] = 1.0;
  return box;
}

bool TraitBox::contains(const Trait& x) const noexcept {
  if (x.dim() != dim()) return false;
  for (std::size_t k = 0; k < dim(); ++k)
    if (x[k] < lower[k] || x[k] > upper[k]) return false;
  return true;
}

std::vector<Trait> TraitBox::lattice(std::size_t per_dim) const {
  const std::size_t d = dim();
  per_dim = std::max<std::size_t>(per_dim, 2);
  std::size_t total = 1;
  for (std::size_t k = 0; k < d; ++k) total *= per_dim;
  std::vector<Trait> out;
  out.reserve(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    Trait x(d);
    std::size_t rem = idx;
    for (std::size_t k = 0; k < d; ++k) {
      const std::size_t i = rem % per_dim;
      rem /= per_dim;
      x[k] = lower[k] + side(k) * static_cast<double>(i) / static_cast<double>(per_dim - 1);
    }
    out.push_back(x);
  }
  return out;
}

}  // namespace twolevel
