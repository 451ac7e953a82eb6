#pragma once

#include <array>
#include <functional>

#include "upscale/field.hpp"
#include "upscale/geometry.hpp"

namespace upscale {

struct FlowSettings {
  double tol = 1e-11;      // scaled continuity + momentum-update target
  int max_outer = 400;
  double lin_tol = 1e-13;  // inner CG tolerance
  int lin_max_iter = 50000;
};

//! Divergence-free, no-slip velocity on the periodic unit cell.
struct FlowSolution {
  FaceField flux;   // volumetric face flux, zero on blocked faces
  CellField u, v;   // cell-centered reconstruction
  double mean_speed = 0.0;  // Favre-averaged |v|
  std::array<double, 2> force_dir{1.0, 0.0};
  int iterations = 0;
  double div_scaled = 0.0;
};

//! Steady Stokes flow driven by a uniform body force, iterated
//! pressure-projection on a staggered layout. Wall-free meshes get the
//! uniform solution directly.
FlowSolution solve_stokes(const UnitCellMesh& mesh, std::array<double, 2> force_dir,
                          const FlowSettings& settings = {});

//! Rescales so the Favre-averaged speed is exactly one.
FlowSolution rescale_to_peclet(const FlowSolution& flow, const UnitCellMesh& mesh);

FlowSolution prescribe_zero(const UnitCellMesh& mesh);
FlowSolution prescribe_uniform(const UnitCellMesh& mesh, std::array<double, 2> dir);
FlowSolution prescribe_streamfunction(const UnitCellMesh& mesh,
                                      const std::function<double(double, double)>& psi);

//! Replicates a unit-cell flow field over a chain mesh.
FaceField tile_flux_to_chain(const UnitCellMesh& unit, const FaceField& unit_flux,
                             const UnitCellMesh& chain);

}  // namespace upscale
