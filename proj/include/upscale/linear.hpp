#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "upscale/field.hpp"
#include "upscale/geometry.hpp"

namespace upscale {

enum class AdvectionScheme { upwind, central_deferred };

struct SolverSettings {
  double tol = 1e-12;  // relative residual
  int max_iter = 20000;
  AdvectionScheme scheme = AdvectionScheme::upwind;
};

struct SolveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

//! Sparse operator on fluid cells in flux-balance (volume-integrated) form:
//! one row per fluid cell, diagonal plus the four W/E/S/N couplings.
struct LinearSystem {
  const UnitCellMesh* mesh = nullptr;
  std::vector<double> diag;
  std::vector<std::array<double, 4>> off;  // coupling to mesh->nbr[p][d]
  std::vector<double> rhs;
  std::vector<uint8_t> pinned;  // rows replaced by identity (Dirichlet mode)
  std::string note;             // assembly warnings

  int size() const { return static_cast<int>(diag.size()); }
  void matvec(const std::vector<double>& x, std::vector<double>& y) const;
  LinearSystem transpose() const;
  //! max_p |A[p,q] - B[p,q]| over all stored entries.
  static double max_entry_diff(const LinearSystem& a, const LinearSystem& b);
};

//! Preconditioned BiCGStab (diagonal preconditioner), deterministic.
//! Returns iteration count; throws SolveError when max_iter is exceeded.
int solve_linear(const LinearSystem& sys, CellField& x, const SolverSettings& settings);

//! Same, but solving with a caller-supplied right-hand side.
int solve_linear(const LinearSystem& sys, const CellField& rhs, CellField& x,
                 const SolverSettings& settings);

}  // namespace upscale
