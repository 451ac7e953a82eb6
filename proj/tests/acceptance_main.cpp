// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failed criteria. Tolerances are fixed here, not configurable.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "upscale/pipeline.hpp"

using namespace upscale;

namespace {

int g_failures = 0;

void report(int number, const std::string& name, bool ok, const std::string& detail) {
  std::printf("%s criterion %2d: %s (%s)\n", ok ? "PASS" : "FAIL", number, name.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

struct IdentityCheck {
  std::string label;
  double rel_err;
};
std::vector<IdentityCheck> g_identity;   // criterion 3 accumulates over all solves
std::vector<IdentityCheck> g_lambda_err; // criterion 4
std::vector<IdentityCheck> g_wdiv;       // criterion 5

constexpr double kLinTol = 1e-12;

SpectralOptions tight_options() {
  SpectralOptions o = SpectralOptions::tight();
  o.linear.tol = kLinTol;
  return o;
}

SpectralSolution run_spectral(const UnitCellMesh& m, const FaceField& flux, double pe, double da,
                              const std::string& label, const FaceField* drift = nullptr,
                              double mu = 0.0) {
  SpectralProblem prob;
  prob.mesh = &m;
  prob.flux = &flux;
  prob.drift = drift;
  prob.pe = pe;
  prob.da = da;
  prob.mu = mu;
  prob.adjoint_kind = drift && mu != 0.0 ? AdjointKind::colloid : AdjointKind::solute;
  prob.opt = tight_options();
  SpectralSolution sol = solve_eigenpairs(prob);

  if (da > 0.0) {
    double lhs = sol.lambda * m.porosity * favre_average(m, sol.phi);
    double rhs = da * boundary_integral(m, sol.phi) / m.total_area;
    g_identity.push_back({label, std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-30)});
  } else {
    g_identity.push_back({label, std::abs(sol.lambda)});
  }
  g_lambda_err.push_back({label, sol.history.back().lambda_err});
  FaceField w = drift_flux_star(m, flux, pe, sol, drift, mu);
  g_wdiv.push_back({label, wstar_scaled_divergence(m, w, sol.beta)});
  return sol;
}

double worst(const std::vector<IdentityCheck>& v, std::string& who) {
  double m = -1.0;
  for (const auto& c : v)
    if (c.rel_err > m) {
      m = c.rel_err;
      who = c.label;
    }
  return m;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

}  // namespace

// 1. power-method lambda vs dense factorization on a 16x16 disk cell
void criterion1() {
  auto t0 = std::chrono::steady_clock::now();
  UnitCellMesh m = build_unit_cell(GeometrySpec::single_disk(0.3, 16));
  FlowSolution flow = rescale_to_peclet(solve_stokes(m, {1.0, 0.0}), m);
  double worst_rel = 0.0;
  for (double pe : {0.0, 5.0})
    for (double da : {1.0, 10.0}) {
      SpectralSolution sol =
          run_spectral(m, flow.flux, pe, da, fmt("disk16 pe=%g da=%g", pe, da));
      SpectralProblem prob;
      prob.mesh = &m;
      prob.flux = &flow.flux;
      prob.pe = pe;
      prob.da = da;
      LinearSystem a = build_direct_operator(prob);
      double dense = oracle::dense_min_eigenvalue(a, m.volume);
      worst_rel = std::max(worst_rel, std::abs(sol.lambda - dense) / dense);
    }
  double dt = seconds_since(t0);
  report(1, "dense-oracle eigen agreement", worst_rel <= 1e-8 && dt < 4 * 5.0,
         fmt("max rel diff %.2e, %.1fs for 4 cases", worst_rel, dt));
}

// 2. grid-extrapolated channel eigenvalue vs k tan(k/2) = Da
void criterion2() {
  auto t0 = std::chrono::steady_clock::now();
  double worst_rel = 0.0;
  for (double da : {0.1, 1.0, 10.0}) {
    double lam[3];
    int i = 0;
    for (int res : {32, 64, 128}) {
      UnitCellMesh m = build_unit_cell(GeometrySpec::channel(0.2, res));
      FaceField zero = FaceField::zeros(m);
      SpectralSolution sol = run_spectral(m, zero, 0.0, da, fmt("channel%d da=%g", res, da));
      lam[i++] = sol.lambda;
      if (da == 1.0) {
        double mean_adj = favre_average(m, sol.phi_adj);
        double asym = 0.0;
        for (size_t p = 0; p < sol.phi.size(); ++p)
          asym = std::max(asym, std::abs(sol.phi[p] - sol.phi_adj[p] / mean_adj));
        g_lambda_err.push_back({fmt("channel%d selfadjoint", res), asym <= 1e-8 ? 0.0 : asym});
      }
    }
    double extrap = oracle::extrapolate3(lam[0], lam[1], lam[2]);
    double analytic = oracle::channel_eigenvalue(da);
    worst_rel = std::max(worst_rel, std::abs(extrap - analytic) / analytic);
  }
  double dt = seconds_since(t0);
  report(2, "channel analytic eigenvalue", worst_rel <= 0.01 && dt < 30.0,
         fmt("max rel err %.3e after extrapolation, %.1fs", worst_rel, dt));
}

// 6. non-reactive corrector vs independent solver + Maxwell estimate
void criterion6() {
  double f = 0.1;  // solid fraction
  UnitCellMesh m = build_unit_cell(GeometrySpec::single_disk(std::sqrt(f / M_PI), 96));
  FaceField zero = FaceField::zeros(m);
  SpectralSolution eig = run_spectral(m, zero, 0.0, 0.0, "maxwell disk");
  FaceField w = drift_flux_star(m, zero, 0.0, eig);
  std::array<double, 2> w_avg, v_avg;
  effective_velocity(m, w, 0.0, w_avg, v_avg);
  CorrectorOptions copt;
  copt.tol = 1e-12;
  copt.linear.tol = kLinTol;
  CorrectorSolution chi = solve_corrector(m, eig.phi, eig.beta, w, w_avg, copt);

  // independent route: plain CG with its own assembly of the standard
  // non-reactive cell problem
  int n = m.n_fluid();
  auto solve_standard = [&](int k) {
    std::vector<double> rhs(n, 0.0);
    for (int p = 0; p < n; ++p)
      for (int d = 0; d < 4; ++d) {
        if (m.nbr[p][d] < 0) continue;
        double ekn = k == 0 ? (d == E ? 1.0 : (d == W ? -1.0 : 0.0))
                            : (d == N ? 1.0 : (d == S ? -1.0 : 0.0));
        rhs[p] += ekn * m.h;
      }
    std::vector<double> x(n, 0.0), r = rhs, pk(n), ap(n);
    auto demean = [&](std::vector<double>& v) {
      double s = 0.0;
      for (double t : v) s += t;
      s /= n;
      for (double& t : v) t -= s;
    };
    demean(r);
    pk = r;
    double rr = 0.0;
    for (double t : r) rr += t * t;
    for (int it = 0; it < 100000 && std::sqrt(rr) > 1e-14; ++it) {
      ap.assign(n, 0.0);
      for (int p = 0; p < n; ++p)
        for (int d = 0; d < 4; ++d) {
          int q = m.nbr[p][d];
          if (q >= 0) ap[p] += pk[p] - pk[q];
        }
      double pap = 0.0;
      for (int i = 0; i < n; ++i) pap += pk[i] * ap[i];
      double alpha = rr / pap;
      for (int i = 0; i < n; ++i) x[i] += alpha * pk[i];
      for (int i = 0; i < n; ++i) r[i] -= alpha * ap[i];
      demean(r);
      double rr2 = 0.0;
      for (double t : r) rr2 += t * t;
      for (int i = 0; i < n; ++i) pk[i] = r[i] + (rr2 / rr) * pk[i];
      rr = rr2;
    }
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i) {
      num += x[i] * m.volume[i];
      den += m.volume[i];
    }
    for (int i = 0; i < n; ++i) x[i] -= num / den;
    return x;
  };
  std::vector<double> ref_x = solve_standard(0), ref_y = solve_standard(1);
  double chi_err = 0.0;
  for (int p = 0; p < n; ++p) {
    chi_err = std::max(chi_err, std::abs(chi.chi_x[p] - ref_x[p]));
    chi_err = std::max(chi_err, std::abs(chi.chi_y[p] - ref_y[p]));
  }
  DispersionResult d = effective_dispersion(m, eig.beta, chi, w, w_avg);
  double maxwell = (1.0 - f) / (1.0 + f);
  double rel = std::abs(d.d_eff[0][0] - maxwell) / maxwell;
  report(6, "non-reactive dispersion sanity",
         rel <= 0.05 && chi_err <= 1e-8,
         fmt("Dxx=%.4f vs Maxwell %.4f (rel %.3f), chi vs oracle %.2e", d.d_eff[0][0], maxwell,
             rel, chi_err));
}

// 7. paper Table 1 (2D), outputs read in grain-diameter units
void criterion7() {
  auto t0 = std::chrono::steady_clock::now();
  GeometrySpec spec = GeometrySpec::fcc_porosity(0.9, 96);
  UnitCellMesh m = build_unit_cell(spec);
  FlowSolution flow = rescale_to_peclet(solve_stokes(m, {1.0, 0.0}), m);
  SpectralSolution eig = run_spectral(m, flow.flux, 10.0, 1060.0, "table1");
  FaceField w = drift_flux_star(m, flow.flux, 10.0, eig);
  std::array<double, 2> w_avg, v_avg;
  effective_velocity(m, w, 10.0, w_avg, v_avg);
  CorrectorOptions copt;
  copt.linear.tol = kLinTol;
  CorrectorSolution chi = solve_corrector(m, eig.phi, eig.beta, w, w_avg, copt);
  DispersionResult d = effective_dispersion(m, eig.beta, chi, w, w_avg);

  // the paper's mesh unit is the grain diameter: lambda and D carry (2r)^2
  double s2 = 2.0 * (1.0 - 0.9) / M_PI;  // (2r)^2
  struct Row {
    const char* name;
    double got, want;
  } rows[] = {{"lambda", eig.lambda * s2, 1.523},
              {"Dxx", d.d_eff[0][0] * s2, 0.035},
              {"Dyy", d.d_eff[1][1] * s2, 0.071},
              {"Vx", v_avg[0], 1.123}};
  bool ok = true;
  std::string detail;
  for (const Row& r : rows) {
    double rel = std::abs(r.got - r.want) / r.want;
    detail += fmt("%s=%.4f vs %.4f (%+.0f%%) ", r.name, r.got, r.want, 100.0 * (r.got / r.want - 1.0));
    if (rel > 0.20) ok = false;
  }
  double dt = seconds_since(t0);
  detail += fmt("res=96, %.0fs", dt);
  if (!ok) detail += " [known deviation, see README]";
  report(7, "paper Table 1 (2D column, diameter units)", ok && dt < 600.0, detail);
}

// 8. DNS vs macro profiles on the 26-cell chain, two regimes
void criterion8() {
  auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;
  for (auto [pe, da] : {std::pair<double, double>{10.0, 1.0}, {100.0, 1000.0}}) {
    Config cfg = Config::parse_text(
        fmt("geometry = fcc\nporosity = 0.9\nresolution = 64\npe = %g\nda = %g\n"
            "n_cells = 26\nout = acc_out/validate_pe%g\n",
            pe, da, pe));
    ValidationReport rep = run_validation(RunConfig::from_config(cfg));
    detail += fmt("pe=%g: max %.4f mean %.4f; ", pe, rep.error.max_rel, rep.error.mean_rel);
    if (rep.error.max_rel > 0.05) ok = false;
    // decay-slope consistency of the developed region
    double slope_rel = std::abs(rep.dns_decay_rate - rep.macro_decay_rate) /
                       std::abs(rep.macro_decay_rate);
    detail += fmt("decay rel %.3f; ", slope_rel);
    if (slope_rel > 0.05) ok = false;
  }
  double dt = seconds_since(t0);
  detail += fmt("%.0fs", dt);
  report(8, "DNS-vs-macro verification (26-cell chain)", ok && dt < 1800.0, detail);
}

// 9. lambda trends in Da: monotone, saturating, Dirichlet-limited
void criterion9() {
  UnitCellMesh m = build_unit_cell(GeometrySpec::fcc_porosity(0.9, 64));
  FaceField zero = FaceField::zeros(m);
  bool monotone = true;
  double prev = -1.0, lam100 = 0.0, lam1e5 = 0.0;
  for (double da : {1e-2, 1e-1, 1.0, 10.0, 100.0, 1e3, 1e5}) {
    SpectralSolution sol = run_spectral(m, zero, 0.0, da, fmt("trend da=%g", da));
    if (sol.lambda < prev) monotone = false;
    prev = sol.lambda;
    if (da == 100.0) lam100 = sol.lambda;
    if (da == 1e5) lam1e5 = sol.lambda;
  }
  SpectralProblem dir;
  dir.mesh = &m;
  FaceField zf = FaceField::zeros(m);
  dir.flux = &zf;
  dir.opt = tight_options();
  dir.opt.dirichlet_gamma = true;
  double lam_dir = solve_eigenpairs(dir).lambda;
  double sat = lam1e5 / lam100;
  double dir_rel = std::abs(lam1e5 - lam_dir) / lam_dir;
  report(9, "trend reproduction (saturation toward Dirichlet)",
         monotone && sat <= 1.2 && dir_rel <= 0.02,
         fmt("monotone=%d, lam(1e5)/lam(1e2)=%.3f, vs Dirichlet rel %.4f", monotone ? 1 : 0,
             sat, dir_rel));
}

// 10. colloid pipeline: mu = 0 equivalence, sweep completion, Dxx(mu) shape
void criterion10() {
  auto t0 = std::chrono::steady_clock::now();
  GeometrySpec spec = GeometrySpec::fcc_porosity(0.5, 48);
  UnitCellMesh m = build_unit_cell(spec);
  FlowSolution flow = rescale_to_peclet(solve_stokes(m, {1.0, 0.0}), m);
  CorrectorOptions copt;
  copt.linear.tol = kLinTol;

  PointResult solute = compute_effective_point(m, spec, flow, 1.0, 0.0, 0.0, {},
                                               tight_options(), copt);
  // mu = 0 through the colloid code path must match the solute run exactly
  PotentialSpec pot = PotentialSpec::for_geometry(spec, 0.0, 1.0);
  FaceField drift = smoluchowski_velocity(m, pot);
  SpectralProblem prob;
  prob.mesh = &m;
  prob.flux = &flow.flux;
  prob.drift = &drift;
  prob.pe = 1.0;
  prob.da = 0.0;
  prob.mu = 0.0;
  prob.adjoint_kind = AdjointKind::colloid;
  prob.opt = tight_options();
  SpectralSolution coll0 = solve_eigenpairs(prob);
  double mu0_diff = std::abs(coll0.lambda - solute.spectral.lambda);
  for (size_t p = 0; p < coll0.phi.size(); ++p)
    mu0_diff = std::max(mu0_diff, std::abs(coll0.phi[p] - solute.spectral.phi[p]));

  std::vector<double> mus{-10, -8, -6, -4, -2, -1, 0, 1, 2, 4, 6, 8, 10};
  std::vector<double> dxx;
  bool completed = true;
  for (double mu : mus) {
    try {
      PointResult pr = compute_effective_point(m, spec, flow, 1.0, 0.0, mu, {},
                                               tight_options(), copt);
      dxx.push_back(pr.params.d_eff[0][0]);
      g_wdiv.push_back({fmt("colloid mu=%g", mu), pr.params.drift_div_scaled});
      g_identity.push_back({fmt("colloid mu=%g", mu), std::abs(pr.params.lambda)});
    } catch (const std::exception& e) {
      completed = false;
      dxx.push_back(std::nan(""));
    }
  }
  // interior minimum on the mu < 0 branch (indices 0..6 cover mu=-10..0)
  bool interior_min = false;
  for (size_t i = 1; i + 1 < 7; ++i)
    if (dxx[i] < dxx[i - 1] && dxx[i] < dxx[i + 1]) interior_min = true;
  std::string curve;
  for (size_t i = 0; i < mus.size(); ++i) curve += fmt("%.3g@%g ", dxx[i], mus[i]);
  double dt = seconds_since(t0);
  bool ok10 = mu0_diff <= 1e-10 && completed && interior_min;
  report(10, "colloid pipeline (mu sweep)", ok10,
         fmt("mu0 diff %.1e, completed=%d, interior Dxx min on mu<0: %s [%s] %.0fs%s", mu0_diff,
             completed ? 1 : 0, interior_min ? "yes" : "no", curve.c_str(), dt,
             ok10 ? "" : " [known deviation, see README]"));
}

// 11. Aitken effectiveness on the Table-1 case
void criterion11() {
  GeometrySpec spec = GeometrySpec::fcc_porosity(0.9, 64);
  UnitCellMesh m = build_unit_cell(spec);
  FlowSolution flow = rescale_to_peclet(solve_stokes(m, {1.0, 0.0}), m);
  SpectralProblem prob;
  prob.mesh = &m;
  prob.flux = &flow.flux;
  prob.pe = 10.0;
  prob.da = 1060.0;
  prob.opt = tight_options();
  prob.opt.aitken = true;
  SpectralSolution fast = solve_eigenpairs(prob);
  prob.opt.aitken = false;
  SpectralSolution slow = solve_eigenpairs(prob);
  double lam_rel = std::abs(fast.lambda - slow.lambda) / slow.lambda;
  report(11, "Aitken effectiveness",
         fast.iterations <= slow.iterations && lam_rel <= 1e-8,
         fmt("accelerated %d vs plain %d iterations, lambda rel diff %.1e", fast.iterations,
             slow.iterations, lam_rel));
}

// 12. auxiliary problem solvability on three boundary patterns
void criterion12() {
  UnitCellMesh m = build_unit_cell(GeometrySpec::single_disk(0.3, 48));
  FlowSolution flow = rescale_to_peclet(solve_stokes(m, {1.0, 0.0}), m);
  SolverSettings lin;
  lin.tol = kLinTol;
  bool ok = true;
  std::string detail;

  auto balance = [&](const std::vector<double>& g, const CellField& psi) {
    double int_g = 0.0;
    for (size_t k = 0; k < m.gamma.size(); ++k) int_g += g[k] * m.gamma[k].len;
    double scale = std::max(std::abs(int_g), m.gamma_length);
    return std::abs(boundary_integral(m, psi) - int_g) / scale;
  };
  double slack = 10.0 * kLinTol * std::sqrt(static_cast<double>(m.n_fluid()));

  std::vector<double> g1(m.gamma.size(), 1.0);
  auto [psi1, avg1] = solve_auxiliary(m, FaceField::zeros(m), 0.0, 4.0, g1, lin);
  double flat_err = 0.0;
  for (double x : psi1) flat_err = std::max(flat_err, std::abs(x - 1.0));
  ok = ok && flat_err <= 1e-12 && balance(g1, psi1) <= slack;
  detail += fmt("uniform: |psi-1|=%.1e bal=%.1e; ", flat_err, balance(g1, psi1));

  std::vector<double> g2(m.gamma.size(), 0.0);
  for (size_t k = 0; k < m.gamma.size(); ++k)
    if (m.gamma[k].nx > 0.0) g2[k] = 1.0;
  auto [psi2, avg2] = solve_auxiliary(m, flow.flux, 10.0, 10.0, g2, lin);
  ok = ok && balance(g2, psi2) <= slack;
  detail += fmt("upstream: bal=%.1e; ", balance(g2, psi2));

  std::vector<double> g3(m.gamma.size(), 0.0);
  for (size_t k = 0; k < m.gamma.size(); ++k) g3[k] = 0.5 + 0.5 * m.gamma[k].ny;
  auto [psi3, avg3] = solve_auxiliary(m, flow.flux, 5.0, 0.7, g3, lin);
  ok = ok && balance(g3, psi3) <= slack;
  detail += fmt("graded: bal=%.1e; slack=%.1e, psi_avg=%.3f/%.3f/%.3f", balance(g3, psi3), slack,
                avg1, avg2, avg3);
  report(12, "auxiliary problem solvability", ok, detail);
}

// 13. bitwise-identical outputs for repeated runs
void criterion13() {
  std::filesystem::remove_all("acc_out/det1");
  std::filesystem::remove_all("acc_out/det2");
  std::string body =
      "geometry = fcc\nporosity = 0.7\nresolution = 32\npe = 10\nda = 50\n"
      "aux_g = upstream\n";
  run_pipeline(RunConfig::from_config(Config::parse_text(body + "out = acc_out/det1\n")));
  run_pipeline(RunConfig::from_config(Config::parse_text(body + "out = acc_out/det2\n")));
  bool same_results =
      read_text_file("acc_out/det1/results.csv") == read_text_file("acc_out/det2/results.csv");
  bool same_conv = read_text_file("acc_out/det1/convergence.csv") ==
                   read_text_file("acc_out/det2/convergence.csv");
  bool same_macro = read_text_file("acc_out/det1/macro_profile.csv") ==
                    read_text_file("acc_out/det2/macro_profile.csv");
  report(13, "determinism (bitwise-identical CSV)", same_results && same_conv && same_macro,
         fmt("results=%d convergence=%d macro=%d", same_results, same_conv, same_macro));
}

int main() {
  std::filesystem::create_directories("acc_out");
  auto t0 = std::chrono::steady_clock::now();

  criterion1();
  criterion2();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  criterion10();
  criterion11();
  criterion12();
  criterion13();

  // 3/4/5 aggregate every converged solve made above
  std::string who;
  double id = worst(g_identity, who);
  report(3, "integral identity on every converged solve", id <= 10.0 * kLinTol,
         fmt("worst rel %.2e (%s), bound %.0e", id, who.c_str(), 10.0 * kLinTol));
  double le = worst(g_lambda_err, who);
  report(4, "adjoint consistency (lambda error and Pe=0 pairs)", le <= 1e-5,
         fmt("worst %.2e (%s)", le, who.c_str()));
  double wd = worst(g_wdiv, who);
  report(5, "divergence-free modified drift", wd <= 1e-6,
         fmt("worst scaled div %.2e (%s)", wd, who.c_str()));

  std::printf("%d of 13 criteria failed, total %.0fs\n", g_failures, seconds_since(t0));
  return g_failures;
}
