#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "twolevel/measure.hpp"
#include "twolevel/test_function.hpp"

namespace twolevel {

/// Cell-centred tensor grid over [x_lo, x_hi] x [0, y1_max] x [0, y2_max] (one trait dimension).
struct GridSpec {
  double x_lo = 0.0;
  double x_hi = 1.0;
  double y1_max = 1.0;
  double y2_max = 1.0;
  std::size_t nx = 1;
  std::size_t ny1 = 16;
  std::size_t ny2 = 16;

  double dx() const noexcept { return (x_hi - x_lo) / static_cast<double>(nx); }
  double dy1() const noexcept { return y1_max / static_cast<double>(ny1); }
  double dy2() const noexcept { return y2_max / static_cast<double>(ny2); }
  double volume() const noexcept { return dx() * dy1() * dy2(); }
  double x(std::size_t i) const noexcept { return x_lo + (static_cast<double>(i) + 0.5) * dx(); }
  double y1(std::size_t j) const noexcept { return (static_cast<double>(j) + 0.5) * dy1(); }
  double y2(std::size_t k) const noexcept { return (static_cast<double>(k) + 0.5) * dy2(); }
  std::size_t size() const noexcept { return nx * ny1 * ny2; }
  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const noexcept { return (i * ny1 + j) * ny2 + k; }

  /// Same box, every step divided by `factor`.
  GridSpec refined(std::size_t factor) const;
  void validate() const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct DensityGrid {
  GridSpec spec;
  double time = 0.0;
  std::vector<double> values;

  DensityGrid() = default;
  explicit DensityGrid(const GridSpec& s, double t = 0.0) : spec(s), time(t), values(s.size(), 0.0) {}

  double& at(std::size_t i, std::size_t j, std::size_t k) { return values[spec.index(i, j, k)]; }
  double at(std::size_t i, std::size_t j, std::size_t k) const { return values[spec.index(i, j, k)]; }

  double mass() const;
  /// Midpoint-rule pairing with a test function.
  double pair(const TestFunction& tf) const;
  double moment(std::size_t cell_type) const;
  /// Mass of each trait column.
  std::vector<double> column_mass() const;
  double min_value() const;
  /// One atom per grid cell at its centre, weighted by the cell mass.
  Measure to_measure() const;

  static DensityGrid sample(const GridSpec& s, const std::function<double(double, double, double)>& density);
};

double l1_distance(const DensityGrid& a, const DensityGrid& b);

}  // namespace twolevel
