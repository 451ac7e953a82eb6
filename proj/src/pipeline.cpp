#include "upscale/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace upscale {

namespace {

GeometrySpec geometry_from_config(const Config& cfg) {
  std::string kind = cfg.get("geometry", "full");
  int res = cfg.get_int("resolution", 64);
  if (kind == "full") return GeometrySpec::full_cell(res);
  if (kind == "channel") return GeometrySpec::channel(cfg.get_double("wall_fraction", 0.125), res);
  if (kind == "single_disk") return GeometrySpec::single_disk(cfg.get_double("radius", 0.25), res);
  if (kind == "fcc") {
    if (cfg.has("radius")) return GeometrySpec::fcc(cfg.get_double("radius", 0.2), res);
    return GeometrySpec::fcc_porosity(cfg.get_double("porosity", 0.9), res);
  }
  if (kind == "multi_disk") {
    std::vector<Disk> disks;
    std::istringstream ss(cfg.get("disks", ""));
    std::string item;
    while (std::getline(ss, item, ';')) {
      Disk d;
      if (std::sscanf(item.c_str(), "%lf:%lf:%lf", &d.cx, &d.cy, &d.r) == 3) disks.push_back(d);
    }
    if (disks.empty()) throw std::runtime_error("config: multi_disk needs disks = cx:cy:r;...");
    return GeometrySpec::multi_disk(disks, res);
  }
  throw std::runtime_error("config: unknown geometry " + kind);
}

FlowSolution prepare_flow(const UnitCellMesh& mesh, const RunConfig& cfg, bool need_flow) {
  if (!need_flow) return prescribe_zero(mesh);
  FlowSolution f = solve_stokes(mesh, {1.0, 0.0}, cfg.flow);
  return rescale_to_peclet(f, mesh);
}

std::string point_key(double pe, double da, double mu) {
  return format_double(pe) + "," + format_double(da) + "," + format_double(mu);
}

}  // namespace

std::vector<double> make_gamma_source(const UnitCellMesh& mesh, const AuxSpec& aux) {
  std::vector<double> g(mesh.gamma.size(), 0.0);
  switch (aux.kind) {
    case AuxSpec::Kind::none:
      break;
    case AuxSpec::Kind::uniform:
      for (double& x : g) x = aux.value;
      break;
    case AuxSpec::Kind::upstream:
      // the upstream side of a grain faces the incoming flow, where the
      // fluid-to-solid normal has a positive x component
      for (size_t k = 0; k < mesh.gamma.size(); ++k)
        if (mesh.gamma[k].nx > 0.0) g[k] = aux.value;
      break;
  }
  return g;
}

RunConfig RunConfig::from_config(const Config& cfg) {
  RunConfig rc;
  rc.raw = cfg;
  rc.geometry = geometry_from_config(cfg);
  rc.pe_list = cfg.get_list("pe_list", {cfg.get_double("pe", 1.0)});
  rc.da_list = cfg.get_list("da_list", {cfg.get_double("da", 1.0)});
  rc.mu_list = cfg.get_list("mu_list", {cfg.get_double("mu", 0.0)});
  rc.n_cells = cfg.get_int("n_cells", 26);
  rc.out_dir = cfg.get("out", "out");
  rc.workers = std::max(1, cfg.get_int("workers", 1));
  rc.dump_fields = cfg.get_bool("dump_fields", true);

  std::string aux = cfg.get("aux_g", "none");
  if (aux == "none") rc.aux.kind = AuxSpec::Kind::none;
  else if (aux == "uniform") rc.aux.kind = AuxSpec::Kind::uniform;
  else if (aux == "upstream") rc.aux.kind = AuxSpec::Kind::upstream;
  else throw std::runtime_error("config: unknown aux_g " + aux);
  rc.aux.value = cfg.get_double("aux_g_value", 1.0);

  rc.spectral = SpectralOptions::tight();
  rc.spectral.tol_phi = cfg.get_double("tol_phi", rc.spectral.tol_phi);
  rc.spectral.tol_lambda = cfg.get_double("tol_lambda", rc.spectral.tol_lambda);
  rc.spectral.max_outer = cfg.get_int("max_outer", rc.spectral.max_outer);
  rc.spectral.aitken = cfg.get_bool("aitken", true);
  std::string ray = cfg.get("rayleigh", "implicit");
  rc.spectral.rayleigh = ray == "explicit" ? RayleighUpdate::explicit_quotient
                                           : RayleighUpdate::implicit_quotient;
  rc.spectral.linear.tol = cfg.get_double("linear_tol", 1e-12);
  std::string adv = cfg.get("advection", "upwind");
  rc.spectral.linear.scheme =
      adv == "central" ? AdvectionScheme::central_deferred : AdvectionScheme::upwind;
  rc.corrector.linear = rc.spectral.linear;
  rc.corrector.linear.scheme = AdvectionScheme::upwind;
  rc.corrector.tol = cfg.get_double("tol_chi", rc.corrector.tol);
  rc.corrector.aitken = rc.spectral.aitken;

  if (cfg.has("stages")) {
    rc.stages.clear();
    std::istringstream ss(cfg.get("stages", ""));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item.erase(0, item.find_first_not_of(" \t"));
      item.erase(item.find_last_not_of(" \t") + 1);
      if (!item.empty()) rc.stages.push_back(item);
    }
    static const std::vector<std::string> order{"mesh", "flow", "spectral",
                                                "closure", "macro", "dns"};
    size_t pos = 0;
    for (const std::string& s : rc.stages) {
      auto it = std::find(order.begin() + pos, order.end(), s);
      if (it == order.end())
        throw std::runtime_error("config: stages must be a prefix of mesh,flow,spectral,closure,macro,dns");
      pos = static_cast<size_t>(it - order.begin());
    }
  }
  return rc;
}

bool RunConfig::has_stage(const std::string& name) const {
  return std::find(stages.begin(), stages.end(), name) != stages.end();
}

PointResult compute_effective_point(const UnitCellMesh& mesh, const GeometrySpec& geom,
                                    const FlowSolution& flow, double pe, double da, double mu,
                                    const AuxSpec& aux, const SpectralOptions& sopt,
                                    const CorrectorOptions& copt) {
  PointResult out;
  FaceField drift;
  bool colloid = mu != 0.0;
  if (colloid) {
    PotentialSpec pot = PotentialSpec::for_geometry(geom, mu, pe);
    drift = smoluchowski_velocity(mesh, pot);
  }

  SpectralProblem prob;
  prob.mesh = &mesh;
  prob.flux = &flow.flux;
  prob.drift = colloid ? &drift : nullptr;
  prob.pe = pe;
  prob.da = da;
  prob.mu = mu;
  prob.adjoint_kind = colloid ? AdjointKind::colloid : AdjointKind::solute;
  prob.opt = sopt;
  out.spectral = solve_eigenpairs(prob);

  FaceField w_star = drift_flux_star(mesh, flow.flux, pe, out.spectral,
                                     colloid ? &drift : nullptr, mu);
  EffectiveParameters& p = out.params;
  p.pe = pe;
  p.da = da;
  p.mu = mu;
  p.porosity = mesh.porosity;
  p.lambda = out.spectral.lambda;
  p.spectral_iterations = out.spectral.iterations;
  p.drift_div_scaled = wstar_scaled_divergence(mesh, w_star, out.spectral.beta);
  effective_velocity(mesh, w_star, pe, p.w_star, p.v_star);

  out.corrector = solve_corrector(mesh, out.spectral.phi, out.spectral.beta, w_star,
                                  p.w_star, copt);
  p.corrector_iterations = out.corrector.iterations;
  DispersionResult disp = effective_dispersion(mesh, out.spectral.beta, out.corrector,
                                               w_star, p.w_star);
  p.d_eff = disp.d_eff;
  p.deff_sym_mismatch = disp.sym_mismatch;

  if (aux.kind != AuxSpec::Kind::none) {
    std::vector<double> g = make_gamma_source(mesh, aux);
    auto [psi, psi_avg] = solve_auxiliary(mesh, flow.flux, pe, da, g, sopt.linear);
    out.psi = std::move(psi);
    p.psi_avg = psi_avg;
  }
  return out;
}

EffectiveParameters run_pipeline(const RunConfig& cfg) {
  ensure_directory(cfg.out_dir);
  {
    nlohmann::json manifest;
    manifest["config_hash"] = config_hash(cfg.raw);
    manifest["config"] = cfg.raw.source_text;
    write_text_file(cfg.out_dir + "/manifest.json", manifest.dump(2) + "\n");
  }

  UnitCellMesh mesh = build_unit_cell(cfg.geometry);
  if (cfg.dump_fields) write_vtk(cfg.out_dir + "/mesh.vtk", mesh, {});
  if (!cfg.has_stage("flow")) {
    EffectiveParameters p;
    p.porosity = mesh.porosity;
    return p;
  }

  double pe = cfg.pe_list.front(), da = cfg.da_list.front(), mu = cfg.mu_list.front();
  bool need_flow = pe > 0.0;
  FlowSolution flow = prepare_flow(mesh, cfg, need_flow);
  if (cfg.dump_fields && need_flow) write_vtk(cfg.out_dir + "/flow.vtk", mesh, {}, &flow.flux);
  if (!cfg.has_stage("spectral")) {
    EffectiveParameters p;
    p.porosity = mesh.porosity;
    return p;
  }

  bool run_closure = cfg.has_stage("closure");
  PointResult point;
  if (run_closure) {
    point = compute_effective_point(mesh, cfg.geometry, flow, pe, da, mu, cfg.aux,
                                    cfg.spectral, cfg.corrector);
  } else {
    SpectralProblem prob;
    prob.mesh = &mesh;
    prob.flux = &flow.flux;
    prob.pe = pe;
    prob.da = da;
    prob.opt = cfg.spectral;
    point.spectral = solve_eigenpairs(prob);
    point.params.pe = pe;
    point.params.da = da;
    point.params.porosity = mesh.porosity;
    point.params.lambda = point.spectral.lambda;
    point.params.spectral_iterations = point.spectral.iterations;
  }

  {
    std::ofstream conv(cfg.out_dir + "/convergence.csv");
    conv << "iteration,res_phi,res_phi_adj,lambda,lambda_adj,lambda_err\n";
    for (const IterRecord& r : point.spectral.history)
      conv << r.iter << "," << format_double(r.res_phi) << "," << format_double(r.res_phi_adj)
           << "," << format_double(r.lambda) << "," << format_double(r.lambda_adj) << ","
           << format_double(r.lambda_err) << "\n";
  }
  {
    std::ofstream res(cfg.out_dir + "/results.csv");
    res << effective_parameters_csv_header() << "\n"
        << effective_parameters_csv_row(point.params) << "\n";
  }
  if (cfg.dump_fields) {
    std::vector<std::pair<std::string, const CellField*>> fields;
    fields.emplace_back("phi", &point.spectral.phi);
    fields.emplace_back("phi_adj", &point.spectral.phi_adj);
    fields.emplace_back("beta", &point.spectral.beta);
    if (run_closure) {
      fields.emplace_back("chi_x", &point.corrector.chi_x);
      fields.emplace_back("chi_y", &point.corrector.chi_y);
    }
    if (!point.psi.empty()) fields.emplace_back("psi", &point.psi);
    write_vtk(cfg.out_dir + "/fields.vtk", mesh, fields, need_flow ? &flow.flux : nullptr);
  }

  if (run_closure && cfg.has_stage("macro")) {
    MacroProblem mp;
    mp.w_star = point.params.w_star[0];
    // the cell-average equation carries the intrinsic (porosity-normalized)
    // dispersion coefficient; d_eff stores the superficial tensor
    mp.d_eff = point.params.d_eff[0][0] / point.params.porosity;
    mp.lambda = point.params.lambda;
    mp.psi_avg = point.params.psi_avg;
    mp.length = cfg.n_cells;
    std::vector<double> xs;
    for (int k = 0; k < cfg.n_cells; ++k) xs.push_back(k + 0.5);
    MacroProfile prof = solve_macro_profile(mp, xs);
    std::vector<std::vector<double>> rows;
    for (size_t i = 0; i < xs.size(); ++i) rows.push_back({prof.x[i], prof.c[i]});
    write_csv(cfg.out_dir + "/macro_profile.csv", {"x", "c"}, rows);
  }
  return point.params;
}

void run_sweep(const RunConfig& cfg) {
  ensure_directory(cfg.out_dir);
  {
    nlohmann::json manifest;
    manifest["config_hash"] = config_hash(cfg.raw);
    manifest["config"] = cfg.raw.source_text;
    write_text_file(cfg.out_dir + "/manifest.json", manifest.dump(2) + "\n");
  }
  std::string csv_path = cfg.out_dir + "/results.csv";

  // resumable: reuse rows whose (pe, da, mu) key already exists
  std::map<std::string, std::string> existing;
  if (file_exists(csv_path)) {
    std::istringstream in(read_text_file(csv_path));
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
      if (first || line.empty()) {
        first = false;
        continue;
      }
      size_t c1 = line.find(',');
      size_t c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
      size_t c3 = c2 == std::string::npos ? c2 : line.find(',', c2 + 1);
      if (c3 != std::string::npos) existing[line.substr(0, c3)] = line;
    }
  }

  UnitCellMesh mesh = build_unit_cell(cfg.geometry);
  bool need_flow = false;
  for (double pe : cfg.pe_list) need_flow = need_flow || pe > 0.0;
  FlowSolution flow = prepare_flow(mesh, cfg, need_flow);

  struct Task {
    double pe, da, mu;
    std::string key;
  };
  std::vector<Task> tasks;
  for (double pe : cfg.pe_list)
    for (double da : cfg.da_list)
      for (double mu : cfg.mu_list) tasks.push_back({pe, da, mu, point_key(pe, da, mu)});

  std::vector<std::string> rows(tasks.size());
  std::atomic<size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&]() {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& t = tasks[i];
      auto it = existing.find(t.key);
      if (it != existing.end()) {
        rows[i] = it->second;
        continue;
      }
      try {
        PointResult pr = compute_effective_point(mesh, cfg.geometry, flow, t.pe, t.da, t.mu,
                                                 cfg.aux, cfg.spectral, cfg.corrector);
        rows[i] = effective_parameters_csv_row(pr.params);
      } catch (const std::exception& e) {
        EffectiveParameters p;
        p.pe = t.pe;
        p.da = t.da;
        p.mu = t.mu;
        p.porosity = mesh.porosity;
        p.lambda = std::nan("");
        p.diagnostics = std::string("failed: ") + e.what();
        rows[i] = effective_parameters_csv_row(p);
        std::lock_guard<std::mutex> lock(log_mutex);
      }
    }
  };
  int nworkers = std::min<int>(cfg.workers, static_cast<int>(tasks.size()));
  std::vector<std::thread> pool;
  for (int w = 0; w < nworkers; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  std::ofstream out(csv_path);
  out << effective_parameters_csv_header() << "\n";
  for (const std::string& row : rows) out << row << "\n";
}

double log_decay_slope(const std::vector<double>& averages, int first_cell, int last_cell) {
  int n = last_cell - first_cell + 1;
  if (n < 2) throw std::invalid_argument("log_decay_slope: window too small");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (int k = first_cell; k <= last_cell; ++k) {
    double v = averages[k - 1];
    if (v <= 0.0) throw std::runtime_error("log_decay_slope: nonpositive average");
    double x = k, y = std::log(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ValidationReport run_validation(const RunConfig& cfg) {
  ensure_directory(cfg.out_dir);
  double pe = cfg.pe_list.front(), da = cfg.da_list.front();

  UnitCellMesh unit = build_unit_cell(cfg.geometry);
  FlowSolution flow = prepare_flow(unit, cfg, pe > 0.0);
  PointResult point = compute_effective_point(unit, cfg.geometry, flow, pe, da, 0.0, cfg.aux,
                                              cfg.spectral, cfg.corrector);

  UnitCellMesh chain = build_chain_mesh(cfg.geometry, cfg.n_cells);
  FaceField chain_flux = tile_flux_to_chain(unit, flow.flux, chain);
  DnsCase dns;
  dns.chain = &chain;
  dns.flux = &chain_flux;
  dns.pe = pe;
  dns.da = da;
  dns.inlet = 1.0;
  SolverSettings dns_lin = cfg.spectral.linear;
  CellField c = solve_porescale(dns, dns_lin);

  ValidationReport rep;
  rep.params = point.params;
  rep.dns_avg = cell_averages(chain, c);
  rep.dns_rescaled = rescale_profile(rep.dns_avg);

  MacroProblem mp;
  mp.w_star = point.params.w_star[0];
  mp.d_eff = point.params.d_eff[0][0] / point.params.porosity;  // intrinsic form
  mp.lambda = point.params.lambda;
  mp.psi_avg = 0.0;  // the pore-scale oracle runs the homogeneous problem
  mp.length = cfg.n_cells;
  std::vector<double> xs;
  for (int k = 0; k < cfg.n_cells; ++k) xs.push_back(k + 0.5);
  MacroProfile prof = solve_macro_profile(mp, xs);
  double ref = prof.c[9];
  rep.macro_rescaled.resize(prof.c.size());
  for (size_t i = 0; i < prof.c.size(); ++i) rep.macro_rescaled[i] = prof.c[i] / ref;
  rep.error = compare_profiles(rep.dns_rescaled, rep.macro_rescaled);
  rep.dns_decay_rate = log_decay_slope(rep.dns_avg, rep.error.first_cell, rep.error.last_cell);
  rep.macro_decay_rate = prof.r_minus;

  if (cfg.dump_fields) write_vtk(cfg.out_dir + "/dns_field.vtk", chain, {{"c", &c}}, &chain_flux);

  std::vector<std::vector<double>> rows;
  for (size_t k = 0; k < rep.dns_avg.size(); ++k)
    rows.push_back({static_cast<double>(k + 1), rep.dns_avg[k], rep.dns_rescaled[k],
                    rep.macro_rescaled[k]});
  write_csv(cfg.out_dir + "/validation_profile.csv",
            {"cell", "dns_avg", "dns_rescaled", "macro_rescaled"}, rows);
  std::ostringstream report;
  report << "pe=" << format_double(pe) << " da=" << format_double(da)
         << " lambda=" << format_double(point.params.lambda)
         << " wstar=" << format_double(point.params.w_star[0])
         << " dxx=" << format_double(point.params.d_eff[0][0])
         << " max_rel_err=" << format_double(rep.error.max_rel)
         << " mean_rel_err=" << format_double(rep.error.mean_rel)
         << " dns_decay=" << format_double(rep.dns_decay_rate)
         << " macro_decay=" << format_double(rep.macro_decay_rate) << "\n";
  write_text_file(cfg.out_dir + "/validation_report.txt", report.str());
  return rep;
}

}  // namespace upscale
