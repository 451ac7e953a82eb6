#include "upscale/closure.hpp"

#include <cmath>
#include <stdexcept>

namespace upscale {

namespace {

// upwind/downwind product flux on the face from P to N (oriented out of P):
// (F+ + T) phi_P phiAdj_N - (F- + T) phi_N phiAdj_P. Antisymmetric in (P,N),
// and its cell sum telescopes to phiAdj*(L phi) - phi*(L^T phiAdj).
double face_wstar(double f_out, double trans, double phi_p, double phi_n, double adj_p,
                  double adj_n) {
  return (std::max(f_out, 0.0) + trans) * phi_p * adj_n -
         (std::max(-f_out, 0.0) + trans) * phi_n * adj_p;
}

double weighted_gauge(const UnitCellMesh& m, const CellField& phi, const CellField& chi) {
  double num = 0.0, den = 0.0;
  for (int p = 0; p < m.n_fluid(); ++p) {
    num += phi[p] * chi[p] * m.volume[p];
    den += phi[p] * m.volume[p];
  }
  return num / den;
}

}  // namespace

FaceField drift_flux_star(const UnitCellMesh& mesh, const FaceField& flux, double pe,
                          const SpectralSolution& eig, const FaceField* drift, double mu) {
  FaceField w = FaceField::zeros(mesh);
  for (int p = 0; p < mesh.n_fluid(); ++p)
    for (int d = E; d <= N; d += 2) {  // E and N: each open face visited once
      int q = mesh.nbr[p][d];
      if (q < 0) continue;
      double f = flux.at(mesh, p, d);
      if (drift && mu != 0.0) f += mu * drift->at(mesh, p, d);
      double f_out = pe * f;  // +x/+y oriented equals out-of-P for E and N
      w.at(mesh, p, d) =
          face_wstar(f_out, 1.0, eig.phi[p], eig.phi[q], eig.phi_adj[p], eig.phi_adj[q]);
    }
  // inlet/outlet columns of a chain mesh (no eigen-solve runs there, but
  // keep the loop total): blocked and boundary faces stay zero
  return w;
}

double wstar_scaled_divergence(const UnitCellMesh& mesh, const FaceField& w_star,
                               const CellField& beta) {
  double worst = 0.0, scale = 0.0;
  for (int p = 0; p < mesh.n_fluid(); ++p) {
    double net = 0.0, mag = 0.0;
    for (int d = 0; d < 4; ++d) {
      if (mesh.nbr[p][d] == kBlocked) continue;
      double f = w_star.at(mesh, p, d);
      net += kDirSign[d] * f;
      mag += std::abs(f);
    }
    worst = std::max(worst, std::abs(net));
    scale = std::max(scale, mag);
  }
  // unit transmissibility times the largest beta bounds the face couplings
  double beta_max = 1.0;
  for (double b : beta) beta_max = std::max(beta_max, std::abs(b));
  return worst / std::max(scale, 1e-8 * beta_max);
}

void effective_velocity(const UnitCellMesh& mesh, const FaceField& w_star, double pe,
                        std::array<double, 2>& w_avg, std::array<double, 2>& v_avg) {
  CellField wx, wy;
  reconstruct_cell_velocity(mesh, w_star, wx, wy);
  w_avg[0] = favre_average(mesh, wx);
  w_avg[1] = favre_average(mesh, wy);
  if (pe > 0.0) {
    v_avg[0] = w_avg[0] / pe;
    v_avg[1] = w_avg[1] / pe;
  } else {
    v_avg = {0.0, 0.0};
  }
}

CorrectorSolution solve_corrector(const UnitCellMesh& mesh, const CellField& phi,
                                  const CellField& beta, const FaceField& w_star,
                                  const std::array<double, 2>& w_avg,
                                  const CorrectorOptions& opt) {
  int n = mesh.n_fluid();
  RobinSpec no_robin;
  LinearSystem a = assemble_adr(mesh, w_star, 1.0, &beta, no_robin, 0.0, nullptr);

  CellField wx, wy;
  reconstruct_cell_velocity(mesh, w_star, wx, wy);
  FaceField beta_f = interpolate_to_faces(mesh, beta);

  CorrectorSolution sol;
  double fluid_area = mesh.fluid_area();

  for (int k = 0; k < 2; ++k) {
    const CellField& wk = k == 0 ? wx : wy;
    CellField rhs(n, 0.0);
    for (int p = 0; p < n; ++p) {
      rhs[p] = (beta[p] * w_avg[k] - wk[p]) * mesh.volume[p];
      // -div(beta e_k): open-face fluxes of the unit direction
      for (int d = 0; d < 4; ++d) {
        if (mesh.nbr[p][d] < 0) continue;
        double ek_n = 0.0;
        if (k == 0) ek_n = (d == E) ? 1.0 : (d == W ? -1.0 : 0.0);
        else ek_n = (d == N) ? 1.0 : (d == S ? -1.0 : 0.0);
        if (ek_n != 0.0) rhs[p] += beta_f.at(mesh, p, d) * ek_n * mesh.h;
      }
    }
    double balance = 0.0, scale = 0.0;
    for (int p = 0; p < n; ++p) {
      balance += rhs[p];
      scale += std::abs(rhs[p]);
    }
    if (std::abs(balance) > 1e-9 * std::max(scale, fluid_area))
      throw SolveError("corrector: solvability violated, source imbalance " +
                       std::to_string(balance));

    // shifted fixed point: (A + sigma M) chi_new = rhs + sigma M chi_old,
    // gauge-projected every pass
    const double sigma = 1.0;
    LinearSystem a_sh = a;
    for (int p = 0; p < n; ++p) a_sh.diag[p] += sigma * mesh.volume[p];

    CellField chi(n, 0.0), b(n), prev;
    AitkenState ait;
    int ait_count = 0;
    int it = 0;
    for (it = 1; it <= opt.max_outer; ++it) {
      for (int p = 0; p < n; ++p) b[p] = rhs[p] + sigma * mesh.volume[p] * chi[p];
      prev = chi;
      solve_linear(a_sh, b, chi, opt.linear);
      double gauge = weighted_gauge(mesh, phi, chi);
      for (double& x : chi) x -= gauge;
      if (opt.aitken) {
        CellField acc = aitken_accelerate(ait, chi);
        if (++ait_count % 3 == 0) {
          chi = std::move(acc);
          ait.reset();
        }
      }
      double dmax = 0.0, cmax = 0.0;
      for (int p = 0; p < n; ++p) {
        dmax = std::max(dmax, std::abs(chi[p] - prev[p]));
        cmax = std::max(cmax, std::abs(chi[p]));
      }
      if (dmax <= opt.tol * std::max(cmax, 1.0)) break;
    }
    if (it > opt.max_outer) throw SolveError("corrector: outer iteration did not converge");
    double gauge = weighted_gauge(mesh, phi, chi);
    for (double& x : chi) x -= gauge;
    sol.gauge[k] = weighted_gauge(mesh, phi, chi);
    sol.iterations += it;
    (k == 0 ? sol.chi_x : sol.chi_y) = std::move(chi);
  }
  return sol;
}

DispersionResult effective_dispersion(const UnitCellMesh& mesh, const CellField& beta,
                                      const CorrectorSolution& chi, const FaceField& w_star,
                                      const std::array<double, 2>& w_avg) {
  DispersionResult out;
  CellField gxx, gxy, gyx, gyy;  // gradients of chi_x and chi_y
  gradient(mesh, chi.chi_x, gxx, gxy);
  gradient(mesh, chi.chi_y, gyx, gyy);
  CellField wx, wy;
  reconstruct_cell_velocity(mesh, w_star, wx, wy);

  double axx = 0.0, axy = 0.0, ayy = 0.0;
  double uxx = 0.0, uxy = 0.0, uyx = 0.0, uyy = 0.0;
  for (int p = 0; p < mesh.n_fluid(); ++p) {
    double vol = mesh.volume[p] * beta[p];
    double ax0 = 1.0 + gxx[p], ax1 = gxy[p];      // e_x + grad chi_x
    double ay0 = gyx[p], ay1 = 1.0 + gyy[p];      // e_y + grad chi_y
    axx += vol * (ax0 * ax0 + ax1 * ax1);
    axy += vol * (ax0 * ay0 + ax1 * ay1);
    ayy += vol * (ay0 * ay0 + ay1 * ay1);
    // unsymmetric form: beta (I + J) + (beta W* - w*) (x) chi
    uxx += vol * (1.0 + gxx[p]);
    uxy += vol * gyx[p];
    uyx += vol * gxy[p];
    uyy += vol * (1.0 + gyy[p]);
    double rx = beta[p] * w_avg[0] - wx[p], ry = beta[p] * w_avg[1] - wy[p];
    uxx += mesh.volume[p] * rx * chi.chi_x[p];
    uxy += mesh.volume[p] * rx * chi.chi_y[p];
    uyx += mesh.volume[p] * ry * chi.chi_x[p];
    uyy += mesh.volume[p] * ry * chi.chi_y[p];
  }
  double s = 1.0 / mesh.total_area;  // superficial (whole-cell) average
  out.d_eff = {{{axx * s, axy * s}, {axy * s, ayy * s}}};
  out.d_unsym = {{{uxx * s, uxy * s}, {uyx * s, uyy * s}}};

  double m00 = out.d_unsym[0][0] - out.d_eff[0][0];
  double m11 = out.d_unsym[1][1] - out.d_eff[1][1];
  double m01 = 0.5 * (out.d_unsym[0][1] + out.d_unsym[1][0]) - out.d_eff[0][1];
  double nrm = std::sqrt(out.d_eff[0][0] * out.d_eff[0][0] + out.d_eff[1][1] * out.d_eff[1][1] +
                         2.0 * out.d_eff[0][1] * out.d_eff[0][1]);
  out.sym_mismatch = std::sqrt(m00 * m00 + m11 * m11 + 2.0 * m01 * m01) / std::max(nrm, 1e-30);

  // positive semi-definite up to round-off; closed-pore directions (channel
  // transverse) legitimately reach zero
  double det = out.d_eff[0][0] * out.d_eff[1][1] - out.d_eff[0][1] * out.d_eff[0][1];
  double scale = out.d_eff[0][0] * out.d_eff[0][0] + out.d_eff[1][1] * out.d_eff[1][1];
  if (out.d_eff[0][0] <= 0.0 || out.d_eff[1][1] < -1e-12 || det < -1e-12 * std::max(scale, 1.0))
    throw SolveError("dispersion: D_eff not positive semi-definite (corrector unconverged?)");
  return out;
}

PotentialSpec PotentialSpec::for_geometry(const GeometrySpec& spec, double mu, double pe) {
  PotentialSpec pot;
  pot.mu = mu;
  pot.lambda0 = mu * pe;
  switch (spec.kind) {
    case GeometrySpec::Kind::single_disk:
      pot.bodies.push_back({0.5, 0.5, spec.radius, 1.0});
      break;
    case GeometrySpec::Kind::fcc:
      pot.bodies.push_back({0.5, 0.5, spec.radius, 1.0});
      pot.bodies.push_back({0.0, 0.0, spec.radius, 1.0});
      break;
    case GeometrySpec::Kind::multi_disk:
      for (const Disk& d : spec.disks) pot.bodies.push_back({d.cx, d.cy, d.r, 1.0});
      break;
    default:
      throw std::runtime_error("potential: geometry has no grains");
  }
  return pot;
}

FaceField smoluchowski_velocity(const UnitCellMesh& mesh, const PotentialSpec& pot) {
  double Wd = mesh.width(), Hd = mesh.height();
  // drift toward the grains for positive strength: v = -grad(Lambda) with
  // Lambda the (negative) inverse-distance well, evaluated analytically
  auto drift_at = [&](double x, double y, double& vx, double& vy) {
    vx = vy = 0.0;
    for (const auto& b : pot.bodies) {
      double dx = x - b.cx, dy = y - b.cy;
      if (mesh.periodic_x) dx -= Wd * std::round(dx / Wd);
      dy -= Hd * std::round(dy / Hd);
      double d2 = dx * dx + dy * dy;
      double d = std::sqrt(d2);
      if (d < 1e-12) continue;  // inside the grain center, no fluid there
      double mag = b.strength / d2;  // |v| = s/(r+R)^2 with d = r+R
      vx -= mag * dx / d;
      vy -= mag * dy / d;
    }
  };
  FaceField out = FaceField::zeros(mesh);
  int fx_cols = mesh.periodic_x ? mesh.nx : mesh.nx + 1;
  for (int j = 0; j < mesh.ny; ++j)
    for (int i = 0; i < fx_cols; ++i) {
      double vx, vy;
      drift_at(i * mesh.h, (j + 0.5) * mesh.h, vx, vy);
      out.fx[j * fx_cols + i] = vx * mesh.h;
    }
  for (int j = 0; j < mesh.ny; ++j)
    for (int i = 0; i < mesh.nx; ++i) {
      double vx, vy;
      drift_at((i + 0.5) * mesh.h, j * mesh.h, vx, vy);
      out.fy[j * mesh.nx + i] = vy * mesh.h;
    }
  return out;
}

std::pair<CellField, double> solve_auxiliary(const UnitCellMesh& mesh, const FaceField& flux,
                                             double pe, double da,
                                             const std::vector<double>& g,
                                             const SolverSettings& settings) {
  int n = mesh.n_fluid();
  if (g.size() != mesh.gamma.size())
    throw std::invalid_argument("auxiliary: g must be given per gamma segment");
  double gmax = 0.0, gsum = 0.0;
  for (size_t k = 0; k < mesh.gamma.size(); ++k) {
    gmax = std::max(gmax, std::abs(g[k]));
    gsum += g[k] * mesh.gamma[k].len;
  }
  if (da <= 0.0) {
    if (gmax > 0.0) throw SolveError("auxiliary: ill-posed problem (Da = 0 with nonzero g)");
    return {CellField(n, 0.0), 0.0};
  }
  RobinSpec robin{da, &g, false};
  LinearSystem a = assemble_adr(mesh, flux, pe, nullptr, robin, 0.0, nullptr);
  double guess = mesh.gamma_length > 0.0 ? gsum / mesh.gamma_length : 0.0;
  CellField psi(n, guess);
  solve_linear(a, psi, settings);

  // the flux-balance rows telescope, so int_Gamma psi must match int_Gamma g
  // up to the linear residual
  double int_psi = boundary_integral(mesh, psi);
  double scale = std::max({std::abs(gsum), gmax * mesh.gamma_length, 1.0});
  double slack = 10.0 * settings.tol * std::sqrt(static_cast<double>(std::max(n, 1))) * scale;
  if (std::abs(int_psi - gsum) > slack)
    throw SolveError("auxiliary: solvability identity violated by " +
                     std::to_string(std::abs(int_psi - gsum)));
  return {psi, favre_average(mesh, psi)};
}

}  // namespace upscale
