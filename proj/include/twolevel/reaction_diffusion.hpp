#pragma once

#include <string_view>
#include <vector>

#include "twolevel/density.hpp"
#include "twolevel/model.hpp"

namespace twolevel {

/// Printed: x-diffusion Lap(p sigma^2 Gamma w), y-diffusion gamma Lap_y w.
/// Generator: coefficients read off the accelerated generator, 1/2 d_xx(p sigma^2 Gamma w)
/// and d_yiyi(gamma y_i w).
enum class DiffusionConvention { Printed, Generator };

std::string_view convention_name(DiffusionConvention c);

struct ReactionDiffusionOptions {
  double dt = 0.0;  // 0: largest CFL-admissible step dividing dt_out
  double dt_out = 0.1;
  double cfl_safety = 0.9;
  DiffusionConvention convention = DiffusionConvention::Printed;
  bool require_ellipticity = true;
  bool reaction = true;
  bool transport = true;
};

struct ReactionDiffusionResult {
  std::vector<DensityGrid> snapshots;
  double dt = 0.0;
  double cfl_number = 0.0;
};

/// Lie splitting per step: exact exponential reaction, explicit upwind transport in y,
/// implicit no-flux diffusion along x, y1 and y2.
ReactionDiffusionResult reaction_diffusion_solve(const DensityGrid& w0, const ModelParams& params, double T,
                                                 const ReactionDiffusionOptions& opt = {});

}  // namespace twolevel
