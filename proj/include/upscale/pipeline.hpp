#pragma once

#include <optional>
#include <string>
#include <vector>

#include "upscale/closure.hpp"
#include "upscale/dns.hpp"
#include "upscale/flow.hpp"
#include "upscale/io.hpp"
#include "upscale/macro.hpp"
#include "upscale/spectral.hpp"

namespace upscale {

//! Inhomogeneous boundary source g on Gamma for the auxiliary problem.
struct AuxSpec {
  enum class Kind { none, uniform, upstream };
  Kind kind = Kind::none;
  double value = 1.0;
};

std::vector<double> make_gamma_source(const UnitCellMesh& mesh, const AuxSpec& aux);

struct RunConfig {
  GeometrySpec geometry;
  std::vector<double> pe_list{1.0};
  std::vector<double> da_list{1.0};
  std::vector<double> mu_list{0.0};
  AuxSpec aux;
  int n_cells = 26;
  std::string out_dir = "out";
  int workers = 1;
  bool dump_fields = true;
  SpectralOptions spectral = SpectralOptions::tight();
  CorrectorOptions corrector;
  FlowSettings flow;
  std::vector<std::string> stages{"flow", "spectral", "closure", "macro"};
  Config raw;

  static RunConfig from_config(const Config& cfg);
  bool has_stage(const std::string& name) const;
};

//! One (Pe, Da, mu) point of the closure pipeline on a prepared mesh/flow.
struct PointResult {
  EffectiveParameters params;
  SpectralSolution spectral;
  CorrectorSolution corrector;
  CellField psi;
};

PointResult compute_effective_point(const UnitCellMesh& mesh, const GeometrySpec& geom,
                                    const FlowSolution& flow, double pe, double da, double mu,
                                    const AuxSpec& aux, const SpectralOptions& sopt,
                                    const CorrectorOptions& copt);

//! Full single-point pipeline with file outputs; returns the parameters of
//! the first entry of each list.
EffectiveParameters run_pipeline(const RunConfig& cfg);

//! Cartesian (Pe, Da, mu) sweep; one CSV row per point, resumable and
//! parallel across points. Failed points keep their row with a
//! failure note in the diagnostics column.
void run_sweep(const RunConfig& cfg);

struct ValidationReport {
  EffectiveParameters params;
  std::vector<double> dns_avg;
  std::vector<double> dns_rescaled;
  std::vector<double> macro_rescaled;
  ProfileError error;
  double dns_decay_rate = 0.0;   // slope of ln<c> per cell in the window
  double macro_decay_rate = 0.0; // r_minus of the closed form
};

//! Pore-scale oracle comparison on an n-cell chain (first Pe/Da entries).
ValidationReport run_validation(const RunConfig& cfg);

//! Fit d(ln c)/dk over the developed window; values must be positive.
double log_decay_slope(const std::vector<double>& averages, int first_cell, int last_cell);

}  // namespace upscale
