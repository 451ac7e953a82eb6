#pragma once

#include <vector>

#include "upscale/closure.hpp"

namespace upscale {

//! Steady 1D upscaled transport problem on [0, L]:
//!   W c' - D c'' = -lambda (c - psi_avg),  c(0) = inlet, c'(L) = 0.
struct MacroProblem {
  double w_star = 0.0;   // Pe * V*_x
  double d_eff = 1.0;    // D_eff_xx
  double lambda = 0.0;
  double psi_avg = 0.0;
  double length = 1.0;
  double inlet = 1.0;
};

struct MacroProfile {
  std::vector<double> x, c;
  double r_plus = 0.0, r_minus = 0.0;  // exponents of the closed form
};

//! Closed-form solution evaluated at the sample points; the dominant
//! exponential is factored so large r_plus * L does not overflow.
MacroProfile solve_macro_profile(const MacroProblem& problem, const std::vector<double>& x);

//! c, c' and c'' at one point (for residual checks).
void macro_eval(const MacroProblem& problem, double x, double& c, double& dc, double& ddc);

struct DimensionalScales {
  double velocity = 1.0;     // U
  double diffusivity = 1.0;  // molecular D
  double cell_length = 1.0;  // l
  double concentration = 1.0;
  double surface_rate = 1.0;  // kappa
};

struct DimensionalParameters {
  std::array<double, 2> v_star{0.0, 0.0};  // U * V*
  Tensor2 d_eff{};                         // D * D_eff
  double lambda = 0.0;                     // D * lambda / l^2
};

DimensionalParameters to_dimensional(const EffectiveParameters& p, const DimensionalScales& s);
EffectiveParameters from_dimensional(const DimensionalParameters& p, const DimensionalScales& s);

}  // namespace upscale
