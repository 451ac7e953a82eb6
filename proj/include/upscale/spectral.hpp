#pragma once

#include <vector>

#include "upscale/assemble.hpp"
#include "upscale/field.hpp"
#include "upscale/geometry.hpp"
#include "upscale/linear.hpp"

namespace upscale {

enum class AdjointKind { solute, colloid };
enum class RayleighUpdate { explicit_quotient, implicit_quotient };

struct SpectralOptions {
  RayleighUpdate rayleigh = RayleighUpdate::implicit_quotient;
  bool aitken = true;
  double tol_phi = 1e-5;     // residual on successive eigenfunction iterates
  double tol_lambda = 1e-5;  // |lambda_adj - lambda| / lambda
  int max_outer = 500;
  SolverSettings linear;
  bool dirichlet_gamma = false;  // absorbing-wall comparison mode

  //! Settings tight enough for the drift/closure identities downstream.
  static SpectralOptions tight() {
    SpectralOptions o;
    o.tol_phi = 1e-10;
    o.tol_lambda = 1e-12;
    o.max_outer = 5000;
    return o;
  }
};

struct SpectralProblem {
  const UnitCellMesh* mesh = nullptr;
  const FaceField* flux = nullptr;   // unit-mean fluid velocity (null = zero)
  const FaceField* drift = nullptr;  // potential drift v_Lambda (colloid only)
  double pe = 0.0;
  double da = 0.0;
  double mu = 0.0;  // drift-to-advection ratio
  AdjointKind adjoint_kind = AdjointKind::solute;
  const CellField* initial_guess = nullptr;  // defaults to the flat field
  SpectralOptions opt;
};

struct IterRecord {
  int iter;
  double res_phi, res_phi_adj;
  double lambda, lambda_adj, lambda_err;
  double theta_phi, theta_phi_adj;
};

struct SpectralSolution {
  CellField phi, phi_adj;  // <phi> = 1, <phi*phi_adj> = 1
  CellField beta;          // phi * phi_adj
  double lambda = 0.0;
  int iterations = 0;
  std::vector<IterRecord> history;
};

//! Combined advecting face flux v + mu * v_Lambda of the direct operator.
FaceField total_flux(const SpectralProblem& problem);

//! Direct operator matrix L (flux-balance form).
LinearSystem build_direct_operator(const SpectralProblem& problem);

//! Adjoint operator: reversed advection; the colloid kind adds the
//! volume-integrated divergence of the drift flux on the diagonal.
LinearSystem build_adjoint_operator(const SpectralProblem& problem);

//! Segregated inverse power iteration for the principal eigenpair. Da = 0
//! runs through a fixed shift sigma = 1 (shifted solve, shift subtracted).
SpectralSolution solve_eigenpairs(const SpectralProblem& problem);

//! Uniform-relaxation Aitken extrapolation state.
struct AitkenState {
  std::vector<double> prev;        // previous raw iterate
  std::vector<double> prev_delta;  // previous raw increment
  double theta = 0.0;
  int fed = 0;
  void reset() {
    prev.clear();
    prev_delta.clear();
    theta = 0.0;
    fed = 0;
  }
};

//! Feeds the next iterate; returns iterate + theta * increment with the
//! scalar theta from successive increment differences (falls back to the
//! plain iterate while the state warms up or the denominator underflows).
std::vector<double> aitken_accelerate(AitkenState& state, const std::vector<double>& next);

}  // namespace upscale
