#pragma once

#include <vector>

#include "twolevel/trait.hpp"

namespace twolevel {

/// Atom of a finite measure on X x R_+^2.
struct WeightedAtom {
  Trait x;
  double y1 = 0.0;
  double y2 = 0.0;
  double w = 0.0;
};

using Measure = std::vector<WeightedAtom>;

double total_mass(const Measure& m);

}  // namespace twolevel
