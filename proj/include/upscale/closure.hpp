#pragma once

#include <array>
#include <string>
#include <vector>

#include "upscale/field.hpp"
#include "upscale/geometry.hpp"
#include "upscale/linear.hpp"
#include "upscale/spectral.hpp"

namespace upscale {

using Tensor2 = std::array<std::array<double, 2>, 2>;

//! Inverse-distance potential wells centered on the grains. Positive
//! strength attracts particles toward the grains (drift magnitude
//! strength / (r + R)^2 at distance r from a grain surface of radius R).
struct PotentialSpec {
  struct PotBody {
    double cx = 0.0, cy = 0.0;
    double ref_len = 0.0;   // R_i, the grain radius
    double strength = 1.0;  // relative strength (Lambda_i / Lambda_0)
  };
  std::vector<PotBody> bodies;
  double lambda0 = 1.0;  // global strength; mu = lambda0 / Pe downstream
  double mu = 0.0;       // potential-to-advection ratio

  //! One well per grain of an fcc/single-disk geometry.
  static PotentialSpec for_geometry(const GeometrySpec& spec, double mu, double pe);
};

struct CorrectorOptions {
  double tol = 1e-11;
  int max_outer = 400;
  bool aitken = true;
  SolverSettings linear;
};

struct CorrectorSolution {
  CellField chi_x, chi_y;
  std::array<double, 2> gauge{0.0, 0.0};  // <phi chi_k> after the solve
  int iterations = 0;
};

struct DispersionResult {
  Tensor2 d_eff{};        // symmetric closure form (superficial average)
  Tensor2 d_unsym{};      // velocity-weighted diagnostic form
  double sym_mismatch = 0.0;  // relative gap between the two symmetric parts
};

struct EffectiveParameters {
  double pe = 0.0, da = 0.0, mu = 0.0;
  double porosity = 1.0;
  double lambda = 0.0;
  std::array<double, 2> v_star{0.0, 0.0};  // effective velocity (units of U)
  std::array<double, 2> w_star{0.0, 0.0};  // Pe * V*
  Tensor2 d_eff{};
  double psi_avg = 0.0;
  int spectral_iterations = 0;
  int corrector_iterations = 0;
  double drift_div_scaled = 0.0;  // max scaled cell divergence of w*
  double deff_sym_mismatch = 0.0;
  std::string diagnostics;
};

//! Face fluxes of w* = Pe*beta*v - phi_adj*grad(phi) + phi*grad(phi_adj),
//! built from the discrete operator couplings so the cell divergence
//! cancels against the converged eigen-equations. Gamma faces carry zero.
FaceField drift_flux_star(const UnitCellMesh& mesh, const FaceField& flux, double pe,
                          const SpectralSolution& eig, const FaceField* drift = nullptr,
                          double mu = 0.0);

//! W* = Favre average of the cell-reconstructed w*; V* = W*/Pe (zero at Pe=0).
void effective_velocity(const UnitCellMesh& mesh, const FaceField& w_star, double pe,
                        std::array<double, 2>& w_avg, std::array<double, 2>& v_avg);

//! Largest cell imbalance of w* relative to its own flux magnitude, floored
//! by the operator coupling scale so a w* that cancels to round-off (the
//! Pe = 0 self-adjoint case) reads as divergence-free.
double wstar_scaled_divergence(const UnitCellMesh& mesh, const FaceField& w_star,
                               const CellField& beta);

//! First-order corrector with gauge <phi chi_k> = 0, solved by shifted
//! outer iterations with Aitken acceleration.
CorrectorSolution solve_corrector(const UnitCellMesh& mesh, const CellField& phi,
                                  const CellField& beta, const FaceField& w_star,
                                  const std::array<double, 2>& w_avg,
                                  const CorrectorOptions& opt = {});

//! D_eff = porosity * <beta (I + grad chi)(I + grad chi)^T> plus the
//! unsymmetric diagnostic form.
DispersionResult effective_dispersion(const UnitCellMesh& mesh, const CellField& beta,
                                      const CorrectorSolution& chi,
                                      const FaceField& w_star,
                                      const std::array<double, 2>& w_avg);

//! Face fluxes of the potential drift (analytic gradient at face centers,
//! minimum-image distances; Gamma-face values retained).
FaceField smoluchowski_velocity(const UnitCellMesh& mesh, const PotentialSpec& pot);

//! Auxiliary inhomogeneous cell problem: L psi = 0 with
//! grad(psi).n = Da (g - psi) on Gamma. g is indexed like mesh.gamma.
//! Returns psi and checks the discrete balance of boundary integrals.
std::pair<CellField, double> solve_auxiliary(const UnitCellMesh& mesh, const FaceField& flux,
                                             double pe, double da,
                                             const std::vector<double>& g,
                                             const SolverSettings& settings = {});

}  // namespace upscale
