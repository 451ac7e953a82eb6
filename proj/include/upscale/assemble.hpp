#pragma once

#include "upscale/field.hpp"
#include "upscale/geometry.hpp"
#include "upscale/linear.hpp"

namespace upscale {

//! Robin data on Gamma: outward diffusive flux Da*(u - g) per unit length.
//! g, when present, is indexed like mesh.gamma. dirichlet_pin replaces the
//! rows of Gamma-owning cells with identity (u = 0), the Da -> inf limit.
struct RobinSpec {
  double da = 0.0;
  const std::vector<double>* g = nullptr;
  bool dirichlet_pin = false;
};

//! Chain-mesh axial conditions: Dirichlet value at the inlet, zero-gradient
//! at the outlet. Ignored on periodic meshes.
struct AxialBC {
  double inlet_value = 1.0;
};

//! Assembles the flux-balance matrix of
//!   L[u] = div(pe * flux * u - D grad u) + sigma*u + extra*u
//! with upwind advection, periodic external coupling and the Robin sink on
//! Gamma folded into the diagonal. `extra` holds a volume-integrated
//! per-cell coefficient (adds extra[p]*u_p to the balance of cell p).
LinearSystem assemble_adr(const UnitCellMesh& mesh, const FaceField& flux, double pe,
                          const CellField* diffusivity, const RobinSpec& robin,
                          double sigma, const CellField* extra,
                          const AxialBC* axial = nullptr);

//! Deferred-correction term: add to (A_upwind x) to get the central-scheme
//! operator action. Boundary (inlet/outlet) faces stay upwind.
CellField central_correction(const UnitCellMesh& mesh, const FaceField& flux, double pe,
                             const CellField& x);

//! Net open-face outflux of a face field per cell (volume-integrated
//! divergence as seen by assemble_adr).
CellField open_face_outflux(const UnitCellMesh& mesh, const FaceField& flux);

}  // namespace upscale
