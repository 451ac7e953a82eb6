#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "upscale/dns.hpp"
#include "upscale/flow.hpp"
#include "upscale/macro.hpp"
#include "upscale/pipeline.hpp"

using namespace upscale;

TEST_CASE("conserved scalar stays at the inlet value") {
  GeometrySpec spec = GeometrySpec::fcc_porosity(0.9, 16);
  UnitCellMesh unit = build_unit_cell(spec);
  UnitCellMesh chain = build_chain_mesh(spec, 13);
  FlowSolution flow = rescale_to_peclet(solve_stokes(unit, {1.0, 0.0}), unit);
  FaceField tiled = tile_flux_to_chain(unit, flow.flux, chain);
  DnsCase dns{&chain, &tiled, 10.0, 0.0, 1.0, nullptr, 0.0};
  CellField c = solve_porescale(dns);
  for (double x : c) CHECK(x == doctest::Approx(1.0).epsilon(1e-9));
  std::vector<double> avg = cell_averages(chain, c);
  CHECK(avg.size() == 13);
  for (double a : avg) CHECK(a == doctest::Approx(1.0).epsilon(1e-9));
  std::vector<double> resc = rescale_profile(avg);
  for (double a : resc) CHECK(a == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("discrete maximum principle") {
  GeometrySpec spec = GeometrySpec::fcc_porosity(0.7, 16);
  UnitCellMesh unit = build_unit_cell(spec);
  UnitCellMesh chain = build_chain_mesh(spec, 13);
  FlowSolution flow = rescale_to_peclet(solve_stokes(unit, {1.0, 0.0}), unit);
  FaceField tiled = tile_flux_to_chain(unit, flow.flux, chain);
  DnsCase dns{&chain, &tiled, 20.0, 5.0, 1.0, nullptr, 0.0};
  CellField c = solve_porescale(dns);
  for (double x : c) {
    CHECK(x >= -1e-13);
    CHECK(x <= 1.0 + 1e-13);
  }
  // averages decrease after the inlet development region
  std::vector<double> avg = cell_averages(chain, c);
  for (size_t k = 2; k + 1 < avg.size(); ++k) CHECK(avg[k + 1] < avg[k]);
}

TEST_CASE("reactive channel decay matches the analytic 1D oracle") {
  // Pe = 0 channel chain: c(x, y) = X(x) cos(k y') with lambda = k^2;
  // cell averages decay like exp(-sqrt(lambda) x) far from the ends
  GeometrySpec spec = GeometrySpec::channel(0.2, 16);
  UnitCellMesh unit = build_unit_cell(spec);
  UnitCellMesh chain = build_chain_mesh(spec, 16);
  FaceField zero = FaceField::zeros(chain);
  double da = 1.0;
  DnsCase dns{&chain, &zero, 0.0, da, 1.0, nullptr, 0.0};
  CellField c = solve_porescale(dns);
  std::vector<double> avg = cell_averages(chain, c);
  double slope = log_decay_slope(avg, 5, 11);
  double lambda = oracle::channel_eigenvalue(da);
  CHECK(std::exp(slope) == doctest::Approx(std::exp(-std::sqrt(lambda))).epsilon(0.03));
}

TEST_CASE("chain solve accepts a potential drift") {
  GeometrySpec spec = GeometrySpec::fcc_porosity(0.7, 16);
  UnitCellMesh unit = build_unit_cell(spec);
  UnitCellMesh chain = build_chain_mesh(spec, 13);
  FlowSolution flow = rescale_to_peclet(solve_stokes(unit, {1.0, 0.0}), unit);
  FaceField tiled = tile_flux_to_chain(unit, flow.flux, chain);
  PotentialSpec pot = PotentialSpec::for_geometry(spec, 0.5, 2.0);
  FaceField drift_unit = smoluchowski_velocity(unit, pot);
  FaceField drift = tile_flux_to_chain(unit, drift_unit, chain);
  DnsCase dns{&chain, &tiled, 2.0, 1.0, 1.0, &drift, 0.5};
  CellField c = solve_porescale(dns);
  // the drift is not solenoidal, so accumulation above the inlet value is
  // expected near the grains; positivity still holds
  double cmax = 0.0;
  for (double x : c) {
    CHECK(std::isfinite(x));
    CHECK(x >= -1e-12);
    cmax = std::max(cmax, x);
  }
  CHECK(cmax > 1.0);
}

TEST_CASE("rescale_profile") {
  std::vector<double> avg(14);
  double q = 0.8;
  for (size_t k = 0; k < avg.size(); ++k) avg[k] = 2.0 * std::pow(q, k + 1);
  std::vector<double> r = rescale_profile(avg);
  CHECK(r[9] == doctest::Approx(1.0));
  for (size_t k = 0; k < avg.size(); ++k)
    CHECK(r[k] == doctest::Approx(std::pow(q, static_cast<double>(k) - 9.0)).epsilon(1e-12));

  std::vector<double> short_avg(11, 1.0);
  CHECK_THROWS(rescale_profile(short_avg));
  std::vector<double> consumed(14, 0.0);
  CHECK_THROWS(rescale_profile(consumed));
}

TEST_CASE("compare_profiles") {
  std::vector<double> a(26, 1.0), b(26, 1.0);
  ProfileError e = compare_profiles(a, b);
  CHECK(e.max_rel == 0.0);
  CHECK(e.first_cell == 10);
  CHECK(e.last_cell == 20);
  b[14] = 1.1;
  e = compare_profiles(a, b);
  CHECK(e.max_rel == doctest::Approx(0.1 / 1.1).epsilon(1e-12));
  b[0] = 100.0;  // outside the developed window
  CHECK(compare_profiles(a, b).max_rel == doctest::Approx(0.1 / 1.1).epsilon(1e-12));
}
