#include "upscale/flow.hpp"

#include <cmath>
#include <stdexcept>

#include "upscale/linear.hpp"

namespace upscale {

namespace {

// generic symmetric positive (semi)definite 5-point system; CG with Jacobi
struct StencilSystem {
  std::vector<double> diag;
  std::vector<std::array<int, 4>> nbr;    // -1 = none
  std::vector<std::array<double, 4>> coef;

  void matvec(const std::vector<double>& x, std::vector<double>& y) const {
    int n = static_cast<int>(diag.size());
    y.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
      double s = diag[i] * x[i];
      for (int d = 0; d < 4; ++d)
        if (nbr[i][d] >= 0) s += coef[i][d] * x[nbr[i][d]];
      y[i] = s;
    }
  }
};

int cg_solve(const StencilSystem& sys, const std::vector<double>& b, std::vector<double>& x,
             double tol, int max_iter, bool project_mean) {
  int n = static_cast<int>(b.size());
  if (static_cast<int>(x.size()) != n) x.assign(n, 0.0);
  auto dot = [](const std::vector<double>& a, const std::vector<double>& c) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * c[i];
    return s;
  };
  auto demean = [&](std::vector<double>& v) {
    double m = 0.0;
    for (double t : v) m += t;
    m /= n;
    for (double& t : v) t -= m;
  };
  std::vector<double> r(n), z(n), p(n), ap(n);
  sys.matvec(x, ap);
  for (int i = 0; i < n; ++i) r[i] = b[i] - ap[i];
  if (project_mean) demean(r);
  double bnorm = std::sqrt(dot(b, b));
  if (bnorm < 1e-300) bnorm = 1.0;
  double rr = dot(r, r);
  if (std::sqrt(rr) <= tol * bnorm) return 0;
  for (int i = 0; i < n; ++i) z[i] = r[i] / sys.diag[i];
  p = z;
  double rz = dot(r, z);
  for (int it = 1; it <= max_iter; ++it) {
    sys.matvec(p, ap);
    double pap = dot(p, ap);
    if (std::abs(pap) < 1e-300) break;
    double alpha = rz / pap;
    for (int i = 0; i < n; ++i) x[i] += alpha * p[i];
    for (int i = 0; i < n; ++i) r[i] -= alpha * ap[i];
    if (project_mean) demean(r);
    if (std::sqrt(dot(r, r)) <= tol * bnorm) return it;
    for (int i = 0; i < n; ++i) z[i] = r[i] / sys.diag[i];
    double rz_new = dot(r, z);
    double beta = rz_new / rz;
    rz = rz_new;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  return max_iter;
}

void finish_solution(FlowSolution& f, const UnitCellMesh& mesh) {
  reconstruct_cell_velocity(mesh, f.flux, f.u, f.v);
  CellField speed(mesh.n_fluid());
  for (int p = 0; p < mesh.n_fluid(); ++p) speed[p] = std::hypot(f.u[p], f.v[p]);
  f.mean_speed = favre_average(mesh, speed);
  f.div_scaled = scaled_divergence(mesh, f.flux);
}

bool has_solids(const UnitCellMesh& mesh) {
  return static_cast<int>(mesh.cell_ix.size()) != mesh.nx * mesh.ny;
}

}  // namespace

FlowSolution prescribe_zero(const UnitCellMesh& mesh) {
  FlowSolution f;
  f.flux = FaceField::zeros(mesh);
  finish_solution(f, mesh);
  return f;
}

FlowSolution prescribe_uniform(const UnitCellMesh& mesh, std::array<double, 2> dir) {
  if (has_solids(mesh))
    throw std::runtime_error("flow: uniform velocity violates no-slip on meshes with solids");
  FlowSolution f;
  f.flux = FaceField::zeros(mesh);
  for (double& v : f.flux.fx) v = dir[0] * mesh.h;
  for (double& v : f.flux.fy) v = dir[1] * mesh.h;
  f.force_dir = dir;
  finish_solution(f, mesh);
  return f;
}

FlowSolution prescribe_streamfunction(const UnitCellMesh& mesh,
                                      const std::function<double(double, double)>& psi) {
  FlowSolution f;
  f.flux = flux_from_streamfunction(mesh, psi);
  // no-slip only if the walls are streamlines; zero out blocked faces
  for (int p = 0; p < mesh.n_fluid(); ++p)
    for (int d = 0; d < 4; ++d)
      if (mesh.nbr[p][d] == kBlocked) f.flux.at(mesh, p, d) = 0.0;
  finish_solution(f, mesh);
  return f;
}

FlowSolution solve_stokes(const UnitCellMesh& mesh, std::array<double, 2> force_dir,
                          const FlowSettings& settings) {
  if (!mesh.periodic_x)
    throw std::runtime_error("flow: Stokes solve expects the periodic unit cell");
  double fmag = std::hypot(force_dir[0], force_dir[1]);
  if (fmag <= 0.0) throw std::runtime_error("flow: zero force direction");
  std::array<double, 2> dir{force_dir[0] / fmag, force_dir[1] / fmag};
  if (!has_solids(mesh)) {
    FlowSolution f = prescribe_uniform(mesh, dir);
    f.force_dir = dir;
    return f;
  }

  const double h = mesh.h;
  const int nfx = mesh.n_fx(), nfy = mesh.n_fy();

  // unknown maps for open faces
  std::vector<int> uid(nfx, -1), vid(nfy, -1);
  std::vector<int> ucell_w, ucell_e, vcell_s, vcell_n;  // adjacent fluid cells
  std::vector<int> uface, vface;                        // face ids
  for (int p = 0; p < mesh.n_fluid(); ++p) {
    if (mesh.nbr[p][E] >= 0) {
      int f = mesh.face[p][E];
      if (uid[f] < 0) {
        uid[f] = static_cast<int>(uface.size());
        uface.push_back(f);
        ucell_w.push_back(p);
        ucell_e.push_back(mesh.nbr[p][E]);
      }
    }
    if (mesh.nbr[p][W] >= 0) {
      int f = mesh.face[p][W];
      if (uid[f] < 0) {
        uid[f] = static_cast<int>(uface.size());
        uface.push_back(f);
        ucell_w.push_back(mesh.nbr[p][W]);
        ucell_e.push_back(p);
      }
    }
    if (mesh.nbr[p][N] >= 0) {
      int f = mesh.face[p][N];
      if (vid[f] < 0) {
        vid[f] = static_cast<int>(vface.size());
        vface.push_back(f);
        vcell_s.push_back(p);
        vcell_n.push_back(mesh.nbr[p][N]);
      }
    }
    if (mesh.nbr[p][S] >= 0) {
      int f = mesh.face[p][S];
      if (vid[f] < 0) {
        vid[f] = static_cast<int>(vface.size());
        vface.push_back(f);
        vcell_s.push_back(mesh.nbr[p][S]);
        vcell_n.push_back(p);
      }
    }
  }
  int nu = static_cast<int>(uface.size()), nv = static_cast<int>(vface.size());

  // momentum Laplacians (units of 1/h^2 factored out; ghost -u across
  // tangential walls puts the no-slip plane on the cell boundary)
  StencilSystem au, av;
  au.diag.assign(nu, 0.0);
  au.nbr.assign(nu, {-1, -1, -1, -1});
  au.coef.assign(nu, {0.0, 0.0, 0.0, 0.0});
  for (int k = 0; k < nu; ++k) {
    int pw = ucell_w[k], pe = ucell_e[k];
    // x-neighbors: west face of pw, east face of pe
    int targets[4] = {uid[mesh.face[pw][W]], uid[mesh.face[pe][E]], -9, -9};
    // y-neighbors: same x-face in the row below / above
    int ixw = mesh.cell_ix[pe], iyw = mesh.cell_iy[pe];  // face is west face of pe
    int js = iyw - 1 < 0 ? mesh.ny - 1 : iyw - 1;
    int jn = iyw + 1 >= mesh.ny ? 0 : iyw + 1;
    targets[2] = uid[mesh.fx_id(ixw, js)];
    targets[3] = uid[mesh.fx_id(ixw, jn)];
    for (int d = 0; d < 4; ++d) {
      int t = targets[d];
      if (t >= 0) {
        au.diag[k] += 1.0;
        au.nbr[k][d] = t;
        au.coef[k][d] = -1.0;
      } else if (d < 2) {
        au.diag[k] += 1.0;  // normal-velocity wall: u = 0 at the blocked face
      } else {
        au.diag[k] += 2.0;  // tangential wall halfway: ghost = -u
      }
    }
  }
  av.diag.assign(nv, 0.0);
  av.nbr.assign(nv, {-1, -1, -1, -1});
  av.coef.assign(nv, {0.0, 0.0, 0.0, 0.0});
  for (int k = 0; k < nv; ++k) {
    int ps = vcell_s[k], pn = vcell_n[k];
    int targets[4] = {-9, -9, vid[mesh.face[ps][S]], vid[mesh.face[pn][N]]};
    int ix = mesh.cell_ix[pn], iy = mesh.cell_iy[pn];  // face is south face of pn
    int iw = ix - 1 < 0 ? mesh.nx - 1 : ix - 1;
    int ie = ix + 1 >= mesh.nx ? 0 : ix + 1;
    targets[0] = vid[mesh.fy_id(iw, iy)];
    targets[1] = vid[mesh.fy_id(ie, iy)];
    for (int d = 0; d < 4; ++d) {
      int t = targets[d];
      if (t >= 0) {
        av.diag[k] += 1.0;
        av.nbr[k][d] = t;
        av.coef[k][d] = -1.0;
      } else if (d >= 2) {
        av.diag[k] += 1.0;
      } else {
        av.diag[k] += 2.0;
      }
    }
  }

  int nc = mesh.n_fluid();
  std::vector<double> u(nu, 0.0), v(nv, 0.0), p(nc, 0.0);
  std::vector<double> bu(nu), bv(nv), wu(nu), wv(nv);

  // p carries an extra factor h so the discrete gradient is a plain
  // difference of neighboring values
  auto momentum_rhs = [&](const std::vector<double>& pr, double fx, double fy) {
    for (int k = 0; k < nu; ++k) bu[k] = h * h * fx - (pr[ucell_e[k]] - pr[ucell_w[k]]);
    for (int k = 0; k < nv; ++k) bv[k] = h * h * fy - (pr[vcell_n[k]] - pr[vcell_s[k]]);
  };
  auto div_of = [&](const std::vector<double>& uu, const std::vector<double>& vv,
                    std::vector<double>& out) {
    out.assign(nc, 0.0);
    for (int q = 0; q < nc; ++q)
      for (int d = 0; d < 4; ++d) {
        int f = mesh.face[q][d];
        int k = d < S ? uid[f] : vid[f];
        if (k < 0) continue;
        out[q] += kDirSign[d] * (d < S ? uu[k] : vv[k]) * h;
      }
  };
  auto demean = [&](std::vector<double>& x) {
    double mval = 0.0;
    for (double t : x) mval += t;
    mval /= nc;
    for (double& t : x) t -= mval;
  };

  // pressure Schur complement solved with conjugate gradients: each apply
  // is one momentum solve per component with the pressure gradient as load
  auto schur_apply = [&](const std::vector<double>& pr, std::vector<double>& out) {
    momentum_rhs(pr, 0.0, 0.0);
    for (int k = 0; k < nu; ++k) bu[k] = -bu[k];  // w = A^{-1} G p
    for (int k = 0; k < nv; ++k) bv[k] = -bv[k];
    wu.assign(nu, 0.0);
    wv.assign(nv, 0.0);
    cg_solve(au, bu, wu, settings.lin_tol, settings.lin_max_iter, false);
    cg_solve(av, bv, wv, settings.lin_tol, settings.lin_max_iter, false);
    div_of(wu, wv, out);
    demean(out);
  };

  // g = div(A^{-1} f)
  momentum_rhs(p, dir[0], dir[1]);
  cg_solve(au, bu, u, settings.lin_tol, settings.lin_max_iter, false);
  cg_solve(av, bv, v, settings.lin_tol, settings.lin_max_iter, false);
  std::vector<double> g(nc), r(nc), pk(nc), sp(nc);
  div_of(u, v, g);
  demean(g);

  double gnorm = 0.0;
  for (double t : g) gnorm += t * t;
  gnorm = std::sqrt(gnorm);
  int outer = 0;
  if (gnorm > 1e-300) {
    r = g;  // p = 0 initially
    pk = r;
    double rr = gnorm * gnorm;
    for (outer = 1; outer <= settings.max_outer; ++outer) {
      if (std::sqrt(rr) <= settings.tol * gnorm) break;
      schur_apply(pk, sp);
      double pap = 0.0;
      for (int q = 0; q < nc; ++q) pap += pk[q] * sp[q];
      if (std::abs(pap) < 1e-300) break;
      double alpha = rr / pap;
      for (int q = 0; q < nc; ++q) p[q] += alpha * pk[q];
      for (int q = 0; q < nc; ++q) r[q] -= alpha * sp[q];
      demean(r);
      double rr_new = 0.0;
      for (int q = 0; q < nc; ++q) rr_new += r[q] * r[q];
      double beta = rr_new / rr;
      rr = rr_new;
      for (int q = 0; q < nc; ++q) pk[q] = r[q] + beta * pk[q];
    }
    if (outer > settings.max_outer)
      throw SolveError("flow: Stokes pressure iteration did not converge, residual " +
                       std::to_string(std::sqrt(rr) / gnorm) + " after " +
                       std::to_string(settings.max_outer) + " iterations");
    // final momentum solve with the converged pressure
    momentum_rhs(p, dir[0], dir[1]);
    u.assign(nu, 0.0);
    v.assign(nv, 0.0);
    cg_solve(au, bu, u, settings.lin_tol, settings.lin_max_iter, false);
    cg_solve(av, bv, v, settings.lin_tol, settings.lin_max_iter, false);
  }

  FlowSolution sol;
  sol.flux = FaceField::zeros(mesh);
  for (int k = 0; k < nu; ++k) sol.flux.fx[uface[k]] = u[k] * h;
  for (int k = 0; k < nv; ++k) sol.flux.fy[vface[k]] = v[k] * h;
  sol.force_dir = dir;
  sol.iterations = outer;
  finish_solution(sol, mesh);
  return sol;
}

FlowSolution rescale_to_peclet(const FlowSolution& flow, const UnitCellMesh& mesh) {
  if (flow.mean_speed <= 1e-300) throw std::runtime_error("flow: cannot rescale zero flow");
  FlowSolution f = flow;
  double s = 1.0 / flow.mean_speed;
  for (double& x : f.flux.fx) x *= s;
  for (double& x : f.flux.fy) x *= s;
  finish_solution(f, mesh);
  return f;
}

FaceField tile_flux_to_chain(const UnitCellMesh& unit, const FaceField& unit_flux,
                             const UnitCellMesh& chain) {
  FaceField out = FaceField::zeros(chain);
  int res = chain.tile_nx;
  int chain_fx_cols = chain.periodic_x ? chain.nx : chain.nx + 1;
  for (int j = 0; j < chain.ny; ++j) {
    for (int i = 0; i < chain_fx_cols; ++i)
      out.fx[j * chain_fx_cols + i] = unit_flux.fx[unit.fx_id(i % res, j)];
    for (int i = 0; i < chain.nx; ++i)
      out.fy[j * chain.nx + i] = unit_flux.fy[unit.fy_id(i % res, j)];
  }
  return out;
}

}  // namespace upscale
