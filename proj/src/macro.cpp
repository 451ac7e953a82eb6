#include "upscale/macro.hpp"

#include <cmath>
#include <stdexcept>

namespace upscale {

namespace {

struct ClosedForm {
  double rp = 0.0, rm = 0.0;
  double ca = 0.0, cb = 0.0;  // c = psi + ca*exp(rp(x-L)) + cb*exp(rm x), stable form
  double shift = 0.0;         // psi_avg contribution (0 when lambda = 0)
  bool constant = false;
  double level = 0.0;
};

ClosedForm closed_form(const MacroProblem& pr) {
  if (pr.d_eff <= 0.0) throw std::invalid_argument("macro: D must be positive");
  if (pr.length <= 0.0) throw std::invalid_argument("macro: length must be positive");
  if (pr.lambda < 0.0) throw std::invalid_argument("macro: negative lambda");
  ClosedForm f;
  if (pr.lambda == 0.0) {
    // W c' = D c'' with c'(L) = 0 forces the constant inlet state
    f.constant = true;
    f.level = pr.inlet;
    return f;
  }
  double disc = std::sqrt(pr.w_star * pr.w_star + 4.0 * pr.d_eff * pr.lambda);
  f.rp = (pr.w_star + disc) / (2.0 * pr.d_eff);
  f.rm = (pr.w_star - disc) / (2.0 * pr.d_eff);
  f.shift = pr.psi_avg;
  double dc = pr.inlet - pr.psi_avg;
  // c = shift + A e^{rp x} + B e^{rm x}; write A e^{rp x} = ca e^{rp (x-L)}
  // with ca = A e^{rp L} so every evaluated exponent stays nonpositive
  double e = std::exp((f.rm - f.rp) * pr.length);  // <= 1
  double den = f.rp - f.rm * e;
  f.ca = dc * (-f.rm) * std::exp(f.rm * pr.length) / den;
  f.cb = dc * f.rp / den;
  return f;
}

}  // namespace

void macro_eval(const MacroProblem& problem, double x, double& c, double& dc, double& ddc) {
  ClosedForm f = closed_form(problem);
  if (f.constant) {
    c = f.level;
    dc = ddc = 0.0;
    return;
  }
  double ep = std::exp(f.rp * (x - problem.length));
  double em = std::exp(f.rm * x);
  c = f.shift + f.ca * ep + f.cb * em;
  dc = f.ca * f.rp * ep + f.cb * f.rm * em;
  ddc = f.ca * f.rp * f.rp * ep + f.cb * f.rm * f.rm * em;
}

MacroProfile solve_macro_profile(const MacroProblem& problem, const std::vector<double>& x) {
  ClosedForm f = closed_form(problem);
  MacroProfile out;
  out.x = x;
  out.c.resize(x.size());
  out.r_plus = f.rp;
  out.r_minus = f.rm;
  for (size_t i = 0; i < x.size(); ++i) {
    if (f.constant) {
      out.c[i] = f.level;
    } else {
      out.c[i] = f.shift + f.ca * std::exp(f.rp * (x[i] - problem.length)) +
                 f.cb * std::exp(f.rm * x[i]);
    }
  }
  return out;
}

DimensionalParameters to_dimensional(const EffectiveParameters& p, const DimensionalScales& s) {
  if (s.velocity <= 0.0 || s.diffusivity <= 0.0 || s.cell_length <= 0.0 ||
      s.concentration <= 0.0 || s.surface_rate <= 0.0)
    throw std::invalid_argument("scales must be positive");
  DimensionalParameters d;
  d.v_star = {p.v_star[0] * s.velocity, p.v_star[1] * s.velocity};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) d.d_eff[i][j] = p.d_eff[i][j] * s.diffusivity;
  d.lambda = p.lambda * s.diffusivity / (s.cell_length * s.cell_length);
  return d;
}

EffectiveParameters from_dimensional(const DimensionalParameters& p, const DimensionalScales& s) {
  EffectiveParameters e;
  e.v_star = {p.v_star[0] / s.velocity, p.v_star[1] / s.velocity};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) e.d_eff[i][j] = p.d_eff[i][j] / s.diffusivity;
  e.lambda = p.lambda * s.cell_length * s.cell_length / s.diffusivity;
  return e;
}

}  // namespace upscale
