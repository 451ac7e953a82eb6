#include "upscale/dns.hpp"

#include <cmath>
#include <stdexcept>

namespace upscale {

CellField solve_porescale(const DnsCase& dns, const SolverSettings& settings) {
  const UnitCellMesh& m = *dns.chain;
  if (m.periodic_x) throw std::invalid_argument("dns: expected a chain mesh");
  FaceField f = *dns.flux;
  if (dns.drift && dns.mu != 0.0) {
    for (size_t i = 0; i < f.fx.size(); ++i) f.fx[i] += dns.mu * dns.drift->fx[i];
    for (size_t i = 0; i < f.fy.size(); ++i) f.fy[i] += dns.mu * dns.drift->fy[i];
  }
  RobinSpec robin{dns.da, nullptr, false};
  AxialBC axial{dns.inlet};
  LinearSystem sys = assemble_adr(m, f, dns.pe, nullptr, robin, 0.0, nullptr, &axial);
  CellField c(m.n_fluid(), dns.inlet);
  if (settings.scheme == AdvectionScheme::central_deferred) {
    CellField prev;
    for (int sweep = 0; sweep < 60; ++sweep) {
      CellField corr = central_correction(m, f, dns.pe, c);
      CellField rhs = sys.rhs;
      for (int p = 0; p < m.n_fluid(); ++p) rhs[p] -= corr[p];
      prev = c;
      solve_linear(sys, rhs, c, settings);
      double d = 0.0, s = 0.0;
      for (int p = 0; p < m.n_fluid(); ++p) {
        d = std::max(d, std::abs(c[p] - prev[p]));
        s = std::max(s, std::abs(c[p]));
      }
      if (d <= 1e-10 * std::max(s, 1.0)) break;
    }
  } else {
    solve_linear(sys, c, settings);
  }
  for (double x : c)
    if (!std::isfinite(x)) throw SolveError("dns: non-finite solution");
  return c;
}

std::vector<double> cell_averages(const UnitCellMesh& chain, const CellField& c) {
  int n = chain.chain_cells;
  std::vector<double> num(n, 0.0), den(n, 0.0);
  for (int p = 0; p < chain.n_fluid(); ++p) {
    int k = chain.cell_ix[p] / chain.tile_nx;
    num[k] += c[p] * chain.volume[p];
    den[k] += chain.volume[p];
  }
  std::vector<double> avg(n);
  for (int k = 0; k < n; ++k) avg[k] = num[k] / den[k];
  return avg;
}

std::vector<double> rescale_profile(const std::vector<double>& averages) {
  if (averages.size() < 12)
    throw std::invalid_argument("rescale_profile: needs at least 12 cells");
  double ref = averages[9];
  if (std::abs(ref) <= 1e-300)
    throw std::runtime_error("rescale_profile: fully consumed before cell 10");
  std::vector<double> out(averages.size());
  for (size_t i = 0; i < averages.size(); ++i) out[i] = averages[i] / ref;
  return out;
}

ProfileError compare_profiles(const std::vector<double>& dns_rescaled,
                              const std::vector<double>& macro_rescaled) {
  if (dns_rescaled.size() != macro_rescaled.size())
    throw std::invalid_argument("compare_profiles: size mismatch");
  int n = static_cast<int>(dns_rescaled.size());
  ProfileError err;
  err.first_cell = 10;
  err.last_cell = n - 6;
  if (err.last_cell < err.first_cell)
    throw std::invalid_argument("compare_profiles: developed window is empty");
  double sum = 0.0;
  int count = 0;
  for (int k = err.first_cell; k <= err.last_cell; ++k) {
    double ref = std::max(std::abs(macro_rescaled[k - 1]), 1e-300);
    double rel = std::abs(dns_rescaled[k - 1] - macro_rescaled[k - 1]) / ref;
    err.max_rel = std::max(err.max_rel, rel);
    sum += rel;
    ++count;
  }
  err.mean_rel = sum / count;
  return err;
}

}  // namespace upscale
