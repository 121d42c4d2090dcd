#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace twolevel {

inline constexpr std::size_t kMaxTraitDim = 4;

/// Phenotypic trait: a point of R^d, d <= kMaxTraitDim, stored inline.
class Trait {
 public:
  Trait() = default;
  explicit Trait(std::size_t dim);
  Trait(std::initializer_list<double> coords);
  explicit Trait(std::span<const double> coords);

  std::size_t dim() const noexcept { return dim_; }
  double operator[](std::size_t k) const noexcept { return coords_[k]; }
  double& operator[](std::size_t k) noexcept { return coords_[k]; }
  std::span<const double> coords() const noexcept { return {coords_.data(), dim_}; }

  Trait operator+(const Trait& other) const noexcept;
  Trait operator-(const Trait& other) const noexcept;
  double squared_norm() const noexcept;

  friend bool operator==(const Trait& a, const Trait& b) noexcept;

 private:
  std::array<double, kMaxTraitDim> coords_{};
  std::uint8_t dim_ = 0;
};

/// Axis-aligned compact trait space [lower_k, upper_k]^d.
struct TraitBox {
  Trait lower;
  Trait upper;

  static TraitBox unit(std::size_t dim);

  std::size_t dim() const noexcept { return lower.dim(); }
  bool contains(const Trait& x) const noexcept;
  double side(std::size_t k) const noexcept { return upper[k] - lower[k]; }

  /// Deterministic lattice with `per_dim` points per axis, endpoints included.
  std::vector<Trait> lattice(std::size_t per_dim) const;

  friend bool operator==(const TraitBox&, const TraitBox&) = default;
};

/// Host individual: trait plus the counts of its type-1 and type-2 cells.
struct Individual {
  Trait trait;
  std::int64_t n1 = 0;
  std::int64_t n2 = 0;

  friend bool operator==(const Individual&, const Individual&) = default;
};

}  // namespace twolevel
