#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "upscale/pipeline.hpp"

using namespace upscale;

namespace {

RunConfig load_config(const std::string& config_path, const std::string& out_dir,
                      int workers, int resolution) {
  Config cfg = config_path.empty() ? Config::parse_text("") : Config::parse_file(config_path);
  if (!out_dir.empty()) cfg.values["out"] = out_dir;
  if (workers > 0) cfg.values["workers"] = std::to_string(workers);
  if (resolution > 0) cfg.values["resolution"] = std::to_string(resolution);
  return RunConfig::from_config(cfg);
}

void print_params(const EffectiveParameters& p) {
  std::printf("pe=%g da=%g mu=%g porosity=%.12g\n", p.pe, p.da, p.mu, p.porosity);
  std::printf("lambda=%.12g\n", p.lambda);
  std::printf("V*=(%.12g, %.12g)  W*=(%.12g, %.12g)\n", p.v_star[0], p.v_star[1], p.w_star[0],
              p.w_star[1]);
  std::printf("D_eff=[%.12g %.12g; %.12g %.12g]\n", p.d_eff[0][0], p.d_eff[0][1], p.d_eff[1][0],
              p.d_eff[1][1]);
  std::printf("psi_avg=%.12g  iterations=%d+%d  wdiv=%.3g dsym=%.3g\n", p.psi_avg,
              p.spectral_iterations, p.corrector_iterations, p.drift_div_scaled,
              p.deff_sym_mismatch);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-volume upscaling of reactive transport in periodic porous media"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int workers = 0, resolution = 0;
  app.add_option("--config", config_path, "path to a key = value config file");
  app.add_option("--out", out_dir, "output directory (overrides config)");
  app.add_option("--workers", workers, "sweep worker threads (overrides config)");
  app.add_option("--resolution", resolution, "cells per cell-length (overrides config)");

  auto* cmd_mesh = app.add_subcommand("mesh", "build the unit cell and dump it");
  auto* cmd_flow = app.add_subcommand("flow", "mesh + Stokes flow");
  auto* cmd_spectral = app.add_subcommand("spectral", "mesh + flow + eigenpair solve");
  auto* cmd_closure = app.add_subcommand("closure", "pipeline through corrector and D_eff");
  auto* cmd_upscale = app.add_subcommand("upscale", "full pipeline incl. macro profile");
  auto* cmd_dns = app.add_subcommand("dns", "pore-scale chain solve and cell averages");
  auto* cmd_sweep = app.add_subcommand("sweep", "parameter sweep over Pe/Da/mu lists");
  auto* cmd_validate = app.add_subcommand("validate", "DNS vs upscaled profile comparison");
  for (CLI::App* sub : {cmd_mesh, cmd_flow, cmd_spectral, cmd_closure, cmd_upscale, cmd_dns,
                        cmd_sweep, cmd_validate})
    sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg = load_config(config_path, out_dir, workers, resolution);
    if (cmd_mesh->parsed()) {
      cfg.stages = {"mesh"};
      run_pipeline(cfg);
      std::printf("mesh written to %s\n", cfg.out_dir.c_str());
    } else if (cmd_flow->parsed()) {
      cfg.stages = {"mesh", "flow"};
      run_pipeline(cfg);
      std::printf("flow written to %s\n", cfg.out_dir.c_str());
    } else if (cmd_spectral->parsed()) {
      cfg.stages = {"mesh", "flow", "spectral"};
      EffectiveParameters p = run_pipeline(cfg);
      print_params(p);
    } else if (cmd_closure->parsed()) {
      cfg.stages = {"mesh", "flow", "spectral", "closure"};
      EffectiveParameters p = run_pipeline(cfg);
      print_params(p);
    } else if (cmd_upscale->parsed()) {
      cfg.stages = {"mesh", "flow", "spectral", "closure", "macro"};
      EffectiveParameters p = run_pipeline(cfg);
      print_params(p);
    } else if (cmd_dns->parsed() || cmd_validate->parsed()) {
      ValidationReport rep = run_validation(cfg);
      std::printf("developed-region error: max %.4g mean %.4g (cells %d..%d)\n",
                  rep.error.max_rel, rep.error.mean_rel, rep.error.first_cell,
                  rep.error.last_cell);
      std::printf("decay per cell: dns %.6g macro %.6g\n", rep.dns_decay_rate,
                  rep.macro_decay_rate);
      print_params(rep.params);
    } else if (cmd_sweep->parsed()) {
      run_sweep(cfg);
      std::printf("sweep written to %s/results.csv\n", cfg.out_dir.c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
