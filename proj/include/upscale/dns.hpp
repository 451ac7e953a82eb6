#pragma once

#include <vector>

#include "upscale/assemble.hpp"
#include "upscale/field.hpp"
#include "upscale/geometry.hpp"
#include "upscale/linear.hpp"

namespace upscale {

//! Fully resolved steady advection-diffusion-reaction case on a chain mesh:
//! c = 1 at the inlet, zero gradient at the outlet, periodic laterally,
//! Robin (Da) on all grain surfaces.
struct DnsCase {
  const UnitCellMesh* chain = nullptr;
  const FaceField* flux = nullptr;  // tiled unit-cell flow
  double pe = 0.0;
  double da = 0.0;
  double inlet = 1.0;
  const FaceField* drift = nullptr;  // optional potential drift
  double mu = 0.0;
};

CellField solve_porescale(const DnsCase& dns, const SolverSettings& settings = {});

//! Favre average of the field over each unit cell of the chain, in order.
std::vector<double> cell_averages(const UnitCellMesh& chain, const CellField& c);

//! Divides every average by the value at the 10th cell (1-based).
std::vector<double> rescale_profile(const std::vector<double>& averages);

struct ProfileError {
  double max_rel = 0.0;
  double mean_rel = 0.0;
  int first_cell = 0, last_cell = 0;  // 1-based window
};

//! Relative error between rescaled profiles over the developed region,
//! cells 10 .. n-6 (1-based).
ProfileError compare_profiles(const std::vector<double>& dns_rescaled,
                              const std::vector<double>& macro_rescaled);

}  // namespace upscale
