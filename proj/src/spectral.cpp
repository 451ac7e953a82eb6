#include "upscale/spectral.hpp"

#include <cmath>
#include <stdexcept>

namespace upscale {

namespace {

double weighted_mean(const UnitCellMesh& m, const CellField& a, const CellField& b) {
  double num = 0.0, den = 0.0;
  for (int p = 0; p < m.n_fluid(); ++p) {
    num += a[p] * b[p] * m.volume[p];
    den += m.volume[p];
  }
  return num / den;
}

double iterate_residual(const CellField& next, const CellField& prev) {
  double r = 0.0;
  for (size_t i = 0; i < next.size(); ++i)
    r = std::max(r, std::abs(next[i] - prev[i]) / std::max(std::abs(prev[i]), 1e-30));
  return r;
}

}  // namespace

FaceField total_flux(const SpectralProblem& problem) {
  const UnitCellMesh& m = *problem.mesh;
  FaceField f = problem.flux ? *problem.flux : FaceField::zeros(m);
  if (problem.drift && problem.mu != 0.0) {
    for (size_t i = 0; i < f.fx.size(); ++i) f.fx[i] += problem.mu * problem.drift->fx[i];
    for (size_t i = 0; i < f.fy.size(); ++i) f.fy[i] += problem.mu * problem.drift->fy[i];
  }
  return f;
}

LinearSystem build_direct_operator(const SpectralProblem& problem) {
  FaceField f = total_flux(problem);
  RobinSpec robin{problem.da, nullptr, problem.opt.dirichlet_gamma};
  return assemble_adr(*problem.mesh, f, problem.pe, nullptr, robin, 0.0, nullptr);
}

LinearSystem build_adjoint_operator(const SpectralProblem& problem) {
  if (problem.adjoint_kind == AdjointKind::colloid && !problem.drift)
    throw std::invalid_argument("spectral: colloid adjoint requires a drift flux");
  FaceField f = total_flux(problem);
  FaceField neg = f;
  for (double& x : neg.fx) x = -x;
  for (double& x : neg.fy) x = -x;
  RobinSpec robin{problem.da, nullptr, problem.opt.dirichlet_gamma};
  CellField extra;
  const CellField* extra_ptr = nullptr;
  if (problem.adjoint_kind == AdjointKind::colloid && problem.mu != 0.0) {
    extra = open_face_outflux(*problem.mesh, *problem.drift);
    for (double& x : extra) x *= problem.pe * problem.mu;
    extra_ptr = &extra;
  }
  return assemble_adr(*problem.mesh, neg, problem.pe, nullptr, robin, 0.0, extra_ptr);
}

std::vector<double> aitken_accelerate(AitkenState& state, const std::vector<double>& next) {
  if (state.fed == 0) {
    state.prev = next;
    state.fed = 1;
    return next;
  }
  std::vector<double> delta(next.size());
  for (size_t i = 0; i < next.size(); ++i) delta[i] = next[i] - state.prev[i];
  if (state.fed == 1) {
    state.prev = next;
    state.prev_delta = std::move(delta);
    state.fed = 2;
    return next;
  }
  double num = 0.0, den = 0.0, scale = 0.0;
  for (size_t i = 0; i < next.size(); ++i) {
    double dd = delta[i] - state.prev_delta[i];
    num += delta[i] * dd;
    den += dd * dd;
    scale += delta[i] * delta[i];
  }
  state.prev = next;
  state.prev_delta = std::move(delta);
  if (den <= 1e-28 * std::max(scale, 1e-280)) {
    state.theta = 0.0;
    return next;
  }
  double theta = -num / den;
  if (!(std::abs(theta) < 50.0)) theta = theta > 0 ? 50.0 : -50.0;
  state.theta = theta;
  std::vector<double> acc(next.size());
  for (size_t i = 0; i < next.size(); ++i) acc[i] = next[i] + theta * state.prev_delta[i];
  return acc;
}

SpectralSolution solve_eigenpairs(const SpectralProblem& problem) {
  const UnitCellMesh& m = *problem.mesh;
  if (problem.pe < 0.0 || problem.da < 0.0)
    throw std::invalid_argument("spectral: Pe and Da must be nonnegative");
  const SpectralOptions& opt = problem.opt;
  const int n = m.n_fluid();
  const double sigma = (problem.da == 0.0 && !opt.dirichlet_gamma) ? 1.0 : 0.0;

  LinearSystem a_dir = build_direct_operator(problem);
  LinearSystem a_adj = build_adjoint_operator(problem);
  if (sigma != 0.0)
    for (int p = 0; p < n; ++p) {
      a_dir.diag[p] += sigma * m.volume[p];
      a_adj.diag[p] += sigma * m.volume[p];
    }

  auto favre1 = [&](const CellField& f) { return favre_average(m, f); };
  auto normalize = [&](CellField& f) {
    double s = favre1(f);
    if (!(std::abs(s) > 1e-300)) throw SolveError("spectral: degenerate normalization");
    for (double& x : f) x /= s;
    return s;
  };

  CellField phi(n, 1.0), phi_adj(n, 1.0);
  if (problem.initial_guess) phi = phi_adj = *problem.initial_guess;
  if (opt.dirichlet_gamma)
    for (int p = 0; p < n; ++p)
      if (a_dir.pinned[p]) phi[p] = phi_adj[p] = 0.0;
  normalize(phi);
  normalize(phi_adj);

  // initial eigenvalue from the boundary/volume balance of a flat field
  double lam_sh = problem.da * m.gamma_length / m.fluid_area() + sigma;
  if (opt.dirichlet_gamma) lam_sh = m.gamma_length / (m.fluid_area() * m.h);
  double lam_adj_sh = lam_sh;

  // deferred central correction, applied relative to the upwind matrices
  bool central = opt.linear.scheme == AdvectionScheme::central_deferred;
  FaceField f_tot = total_flux(problem);
  FaceField f_neg = f_tot;
  for (double& x : f_neg.fx) x = -x;
  for (double& x : f_neg.fy) x = -x;

  AitkenState ait_phi, ait_adj;
  int ait_count_phi = 0, ait_count_adj = 0;
  SpectralSolution sol;
  CellField b(n), raw(n), tmp(n);

  auto advance = [&](const LinearSystem& A, const FaceField& adv, CellField& f, double& lam,
                     AitkenState& ait, int& ait_count, double& res_out, double& theta_out) {
    for (int p = 0; p < n; ++p) b[p] = A.pinned.size() && A.pinned[p] ? 0.0 : lam * m.volume[p] * f[p];
    if (central) {
      CellField corr = central_correction(m, adv, problem.pe, f);
      for (int p = 0; p < n; ++p) b[p] -= corr[p];
    }
    raw = f;
    solve_linear(A, b, raw, opt.linear);
    if (opt.rayleigh == RayleighUpdate::explicit_quotient) {
      double num = weighted_mean(m, f, raw);
      double den = weighted_mean(m, raw, raw);
      lam = lam * num / den;
    } else {
      A.matvec(raw, tmp);
      if (central) {
        CellField corr = central_correction(m, adv, problem.pe, raw);
        for (int p = 0; p < n; ++p) tmp[p] += corr[p];
      }
      double num = 0.0, den = 0.0;
      for (int p = 0; p < n; ++p) {
        num += raw[p] * tmp[p];
        den += raw[p] * raw[p] * m.volume[p];
      }
      lam = num / den;
    }
    normalize(raw);
    // Aitken cycling: extrapolate every third iterate, then restart the
    // state so the next increments come from an unperturbed sequence
    CellField accepted = raw;
    theta_out = 0.0;
    if (opt.aitken) {
      CellField acc = aitken_accelerate(ait, raw);
      if (++ait_count % 3 == 0) {
        bool ok = true;
        for (double x : acc)
          if (!std::isfinite(x)) ok = false;
        if (ok) {
          accepted = std::move(acc);
          theta_out = ait.theta;
        }
        ait.reset();
      }
    }
    res_out = iterate_residual(accepted, f);
    f = std::move(accepted);
  };

  int it = 0;
  for (it = 1; it <= opt.max_outer; ++it) {
    IterRecord rec{};
    rec.iter = it;
    advance(a_dir, f_tot, phi, lam_sh, ait_phi, ait_count_phi, rec.res_phi, rec.theta_phi);
    advance(a_adj, f_neg, phi_adj, lam_adj_sh, ait_adj, ait_count_adj, rec.res_phi_adj,
            rec.theta_phi_adj);
    rec.lambda = lam_sh - sigma;
    rec.lambda_adj = lam_adj_sh - sigma;
    rec.lambda_err = std::abs(lam_adj_sh - lam_sh) / std::max(std::abs(lam_sh), 1e-30);
    sol.history.push_back(rec);
    if (!std::isfinite(lam_sh) || !std::isfinite(lam_adj_sh))
      throw SolveError("spectral: eigenvalue estimate diverged");
    if (rec.res_phi <= opt.tol_phi && rec.res_phi_adj <= opt.tol_phi &&
        rec.lambda_err <= opt.tol_lambda) {
      if (rec.lambda < -10.0 * opt.tol_lambda * std::max(1.0, std::abs(rec.lambda)))
        throw SolveError("spectral: non-principal convergence (negative eigenvalue drift)");
      break;
    }
  }
  if (it > opt.max_outer)
    throw SolveError("spectral: power iteration exceeded max_outer (res_phi " +
                     std::to_string(sol.history.back().res_phi) + ", lambda_err " +
                     std::to_string(sol.history.back().lambda_err) + ")");
  sol.iterations = static_cast<int>(sol.history.size());

  normalize(phi);
  double cross = weighted_mean(m, phi, phi_adj);
  if (!(std::abs(cross) > 1e-300)) throw SolveError("spectral: degenerate beta normalization");
  for (double& x : phi_adj) x /= cross;

  sol.phi = std::move(phi);
  sol.phi_adj = std::move(phi_adj);
  sol.beta.resize(n);
  for (int p = 0; p < n; ++p) sol.beta[p] = sol.phi[p] * sol.phi_adj[p];

  // report the eigenvalue through the boundary/volume balance so the
  // reaction-balance identity holds to machine precision
  if (opt.dirichlet_gamma) {
    a_dir.matvec(sol.phi, tmp);
    double num = 0.0, den = 0.0;
    for (int p = 0; p < n; ++p) {
      num += sol.phi[p] * tmp[p];
      den += sol.phi[p] * sol.phi[p] * m.volume[p];
    }
    sol.lambda = num / den - sigma;
  } else if (problem.da == 0.0) {
    sol.lambda = 0.0;
  } else {
    sol.lambda = problem.da * boundary_integral(m, sol.phi) /
                 (m.fluid_area() * favre1(sol.phi));
  }

  if (!opt.dirichlet_gamma) {
    double mn = 1e300, mn_adj = 1e300;
    for (int p = 0; p < n; ++p) {
      mn = std::min(mn, sol.phi[p]);
      mn_adj = std::min(mn_adj, sol.phi_adj[p]);
    }
    if (mn <= 0.0 || mn_adj <= 0.0)
      throw SolveError("spectral: principal eigenfunction lost positivity");
  }
  for (int p = 0; p < n; ++p)
    if (!std::isfinite(sol.phi[p]) || !std::isfinite(sol.phi_adj[p]))
      throw SolveError("spectral: non-finite eigenfunction");
  return sol;
}

}  // namespace upscale
