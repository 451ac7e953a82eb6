#include "upscale/field.hpp"

#include <cmath>

namespace upscale {

CellField divergence(const UnitCellMesh& mesh, const FaceField& flux) {
  CellField div(mesh.n_fluid(), 0.0);
  double inv_a = 1.0 / (mesh.h * mesh.h);
  for (int p = 0; p < mesh.n_fluid(); ++p) {
    double net = 0.0;
    for (int d = 0; d < 4; ++d) {
      if (mesh.nbr[p][d] == kBlocked) continue;  // inlet/outlet faces do carry flux
      net += kDirSign[d] * flux.at(mesh, p, d);
    }
    div[p] = net * inv_a;
  }
  return div;
}

double scaled_divergence(const UnitCellMesh& mesh, const FaceField& flux) {
  double worst = 0.0, scale = 0.0;
  for (int p = 0; p < mesh.n_fluid(); ++p) {
    double net = 0.0, mag = 0.0;
    for (int d = 0; d < 4; ++d) {
      if (mesh.nbr[p][d] == kBlocked) continue;
      double f = flux.at(mesh, p, d);
      net += kDirSign[d] * f;
      mag += std::abs(f);
    }
    worst = std::max(worst, std::abs(net));
    scale = std::max(scale, mag);
  }
  return worst / std::max(scale, 1e-300);
}

void gradient(const UnitCellMesh& mesh, const CellField& f, CellField& gx, CellField& gy) {
  gx.assign(mesh.n_fluid(), 0.0);
  gy.assign(mesh.n_fluid(), 0.0);
  for (int p = 0; p < mesh.n_fluid(); ++p) {
    int w = mesh.nbr[p][W], e = mesh.nbr[p][E];
    if (w >= 0 && e >= 0)
      gx[p] = (f[e] - f[w]) / (2.0 * mesh.h);
    else if (e >= 0)
      gx[p] = (f[e] - f[p]) / mesh.h;
    else if (w >= 0)
      gx[p] = (f[p] - f[w]) / mesh.h;
    int s = mesh.nbr[p][S], n = mesh.nbr[p][N];
    if (s >= 0 && n >= 0)
      gy[p] = (f[n] - f[s]) / (2.0 * mesh.h);
    else if (n >= 0)
      gy[p] = (f[n] - f[p]) / mesh.h;
    else if (s >= 0)
      gy[p] = (f[p] - f[s]) / mesh.h;
  }
}

FaceField interpolate_to_faces(const UnitCellMesh& mesh, const CellField& f) {
  FaceField out = FaceField::zeros(mesh);
  for (int p = 0; p < mesh.n_fluid(); ++p)
    for (int d = 0; d < 4; ++d) {
      int n = mesh.nbr[p][d];
      out.at(mesh, p, d) = n >= 0 ? 0.5 * (f[p] + f[n]) : f[p];
    }
  return out;
}

void reconstruct_cell_velocity(const UnitCellMesh& mesh, const FaceField& flux,
                               CellField& u, CellField& v) {
  u.assign(mesh.n_fluid(), 0.0);
  v.assign(mesh.n_fluid(), 0.0);
  double inv = 1.0 / (2.0 * mesh.h);
  for (int p = 0; p < mesh.n_fluid(); ++p) {
    double fw = mesh.nbr[p][W] >= 0 ? flux.at(mesh, p, W) : 0.0;
    double fe = mesh.nbr[p][E] >= 0 ? flux.at(mesh, p, E) : 0.0;
    double fs = mesh.nbr[p][S] >= 0 ? flux.at(mesh, p, S) : 0.0;
    double fn = mesh.nbr[p][N] >= 0 ? flux.at(mesh, p, N) : 0.0;
    u[p] = (fw + fe) * inv;
    v[p] = (fs + fn) * inv;
  }
}

FaceField flux_from_streamfunction(const UnitCellMesh& mesh,
                                   const std::function<double(double, double)>& psi) {
  FaceField out = FaceField::zeros(mesh);
  int fx_cols = mesh.periodic_x ? mesh.nx : mesh.nx + 1;
  for (int j = 0; j < mesh.ny; ++j)
    for (int i = 0; i < fx_cols; ++i) {
      double x = i * mesh.h;
      out.fx[j * fx_cols + i] = psi(x, (j + 1) * mesh.h) - psi(x, j * mesh.h);
    }
  for (int j = 0; j < mesh.ny; ++j)
    for (int i = 0; i < mesh.nx; ++i) {
      double y = j * mesh.h;
      out.fy[j * mesh.nx + i] = -(psi((i + 1) * mesh.h, y) - psi(i * mesh.h, y));
    }
  return out;
}

}  // namespace upscale
