#pragma once

#include <array>
#include <functional>
#include <vector>

#include "upscale/geometry.hpp"

namespace upscale {

//! Cell-centered scalar on fluid cells (compact indexing).
using CellField = std::vector<double>;

//! Conservative face data: volumetric flux (velocity . n . face length),
//! oriented +x for fx and +y for fy. Blocked faces carry whatever the
//! producer stored there; all cell balances run over open faces only.
struct FaceField {
  std::vector<double> fx, fy;

  static FaceField zeros(const UnitCellMesh& m) {
    FaceField f;
    f.fx.assign(m.n_fx(), 0.0);
    f.fy.assign(m.n_fy(), 0.0);
    return f;
  }
  double& at(const UnitCellMesh& m, int p, int dir) {
    return (dir < S) ? fx[m.face[p][dir]] : fy[m.face[p][dir]];
  }
  double at(const UnitCellMesh& m, int p, int dir) const {
    return (dir < S) ? fx[m.face[p][dir]] : fy[m.face[p][dir]];
  }
};

//! Net outflux over open faces divided by the grid cell area h^2.
CellField divergence(const UnitCellMesh& mesh, const FaceField& flux);

//! Largest cell imbalance relative to the per-cell flux magnitude.
double scaled_divergence(const UnitCellMesh& mesh, const FaceField& flux);

//! Central-difference cell gradient with one-sided closure at walls.
void gradient(const UnitCellMesh& mesh, const CellField& f, CellField& gx, CellField& gy);

//! Arithmetic-mean interpolation of a cell field to open faces (blocked
//! faces get the owner value).
FaceField interpolate_to_faces(const UnitCellMesh& mesh, const CellField& f);

//! Cell-centered velocity from face fluxes (blocked faces count as zero).
void reconstruct_cell_velocity(const UnitCellMesh& mesh, const FaceField& flux,
                               CellField& u, CellField& v);

//! Face fluxes of the solenoidal field derived from a streamfunction;
//! the flux through a face is the difference of psi at its endpoints, so
//! the discrete divergence vanishes identically.
FaceField flux_from_streamfunction(const UnitCellMesh& mesh,
                                   const std::function<double(double, double)>& psi);

inline double max_abs(const CellField& f) {
  double m = 0.0;
  for (double x : f) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace upscale
