#include "twolevel/density.hpp"

#include <algorithm>
#include <cmath>

#include "twolevel/error.hpp"

namespace twolevel {

GridSpec GridSpec::refined(std::size_t factor) const {
  GridSpec g = *this;
  g.nx = nx == 1 ? 1 : nx * factor;
  g.ny1 *= factor;
  g.ny2 *= factor;
  return g;
}

void GridSpec::validate() const {
  if (nx == 0 || ny1 == 0 || ny2 == 0) throw Error(ErrorCode::InvalidArgument, "grid needs at least one cell per axis");
  if (!(x_hi > x_lo) || !(y1_max > 0.0) || !(y2_max > 0.0))
    throw Error(ErrorCode::InvalidArgument, "grid box must have positive extent");
}

double DensityGrid::mass() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s * spec.volume();
}

double DensityGrid::pair(const TestFunction& tf) const {
  double s = 0.0;
  for (std::size_t i = 0; i < spec.nx; ++i) {
    const double fx = tf.f(spec.x(i));
    for (std::size_t j = 0; j < spec.ny1; ++j) {
      const double g1 = tf.g1(spec.y1(j));
      for (std::size_t k = 0; k < spec.ny2; ++k) s += fx * g1 * tf.g2(spec.y2(k)) * at(i, j, k);
    }
  }
  return s * spec.volume();
}

double DensityGrid::moment(std::size_t cell_type) const {
  double s = 0.0;
  for (std::size_t i = 0; i < spec.nx; ++i)
    for (std::size_t j = 0; j < spec.ny1; ++j)
      for (std::size_t k = 0; k < spec.ny2; ++k)
        s += (cell_type == 0 ? spec.y1(j) : spec.y2(k)) * at(i, j, k);
  return s * spec.volume();
}

std::vector<double> DensityGrid::column_mass() const {
  std::vector<double> m(spec.nx, 0.0);
  const std::size_t per = spec.ny1 * spec.ny2;
  for (std::size_t i = 0; i < spec.nx; ++i) {
    double s = 0.0;
    for (std::size_t q = 0; q < per; ++q) s += values[i * per + q];
    m[i] = s * spec.volume();
  }
  return m;
}

double DensityGrid::min_value() const { return values.empty() ? 0.0 : *std::min_element(values.begin(), values.end()); }

Measure DensityGrid::to_measure() const {
  Measure m;
  const double vol = spec.volume();
  for (std::size_t i = 0; i < spec.nx; ++i)
    for (std::size_t j = 0; j < spec.ny1; ++j)
      for (std::size_t k = 0; k < spec.ny2; ++k) {
        const double v = at(i, j, k);
        if (v != 0.0) m.push_back({Trait{spec.x(i)}, spec.y1(j), spec.y2(k), v * vol});
      }
  return m;
}

DensityGrid DensityGrid::sample(const GridSpec& s, const std::function<double(double, double, double)>& density) {
  s.validate();
  DensityGrid g(s);
  for (std::size_t i = 0; i < s.nx; ++i)
    for (std::size_t j = 0; j < s.ny1; ++j)
      for (std::size_t k = 0; k < s.ny2; ++k) g.at(i, j, k) = density(s.x(i), s.y1(j), s.y2(k));
  return g;
}

double l1_distance(const DensityGrid& a, const DensityGrid& b) {
  if (!(a.spec == b.spec)) throw Error(ErrorCode::InvalidArgument, "grids differ");
  double s = 0.0;
  for (std::size_t q = 0; q < a.values.size(); ++q) s += std::abs(a.values[q] - b.values[q]);
  return s * a.spec.volume();
}

}  // namespace twolevel
