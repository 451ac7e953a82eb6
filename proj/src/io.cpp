#include "upscale/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace upscale {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

Config Config::parse_text(const std::string& text) {
  Config cfg;
  cfg.source_text = text;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: missing '=' on line " + std::to_string(lineno));
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty()) throw std::runtime_error("config: empty key on line " + std::to_string(lineno));
    cfg.values[key] = val;
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str());
}

std::string Config::get(const std::string& key, const std::string& fallback) const {
  auto it = values.find(key);
  return it == values.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  try {
    size_t pos = 0;
    double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("config: bad number for " + key + ": " + it->second);
  }
}

int Config::get_int(const std::string& key, int fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  try {
    size_t pos = 0;
    int v = std::stoi(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("config: bad integer for " + key + ": " + it->second);
  }
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  const std::string& v = it->second;
  if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
  if (v == "off" || v == "false" || v == "0" || v == "no") return false;
  throw std::runtime_error("config: bad boolean for " + key + ": " + v);
}

std::vector<double> Config::get_list(const std::string& key, std::vector<double> fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  std::vector<double> out;
  std::string item;
  std::istringstream ss(it->second);
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw std::runtime_error("config: bad list entry for " + key + ": " + item);
    }
  }
  if (out.empty()) throw std::runtime_error("config: empty list for " + key);
  return out;
}

std::string config_hash(const Config& cfg) {
  // canonical form: sorted key=value lines
  std::string canon;
  for (const auto& [k, v] : cfg.values) canon += k + "=" + v + "\n";
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[19];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_vtk(const std::string& path, const UnitCellMesh& mesh,
               const std::vector<std::pair<std::string, const CellField*>>& fields,
               const FaceField* flux) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("vtk: cannot open " + path);
  out << "# vtk DataFile Version 3.0\n";
  out << "unit cell fields\n";
  out << "ASCII\n";
  out << "DATASET STRUCTURED_POINTS\n";
  out << "DIMENSIONS " << mesh.nx + 1 << " " << mesh.ny + 1 << " 2\n";
  out << "ORIGIN 0 0 0\n";
  out << "SPACING " << format_double(mesh.h) << " " << format_double(mesh.h) << " "
      << format_double(mesh.h) << "\n";
  out << "CELL_DATA " << mesh.nx * mesh.ny << "\n";

  auto dump_scalar = [&](const std::string& name, auto&& value_of) {
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (int iy = 0; iy < mesh.ny; ++iy)
      for (int ix = 0; ix < mesh.nx; ++ix) out << format_double(value_of(ix, iy)) << "\n";
  };

  dump_scalar("fluid", [&](int ix, int iy) { return mesh.is_fluid[mesh.raw(ix, iy)] ? 1.0 : 0.0; });
  dump_scalar("fluid_fraction", [&](int ix, int iy) { return mesh.fluid_fraction[mesh.raw(ix, iy)]; });
  for (const auto& [name, field] : fields)
    dump_scalar(name, [&](int ix, int iy) {
      int id = mesh.fluid_id[mesh.raw(ix, iy)];
      return id >= 0 ? (*field)[id] : 0.0;
    });
  if (flux) {
    CellField u, v;
    reconstruct_cell_velocity(mesh, *flux, u, v);
    out << "VECTORS velocity double\n";
    for (int iy = 0; iy < mesh.ny; ++iy)
      for (int ix = 0; ix < mesh.nx; ++ix) {
        int id = mesh.fluid_id[mesh.raw(ix, iy)];
        double uu = id >= 0 ? u[id] : 0.0, vv = id >= 0 ? v[id] : 0.0;
        out << format_double(uu) << " " << format_double(vv) << " 0\n";
      }
  }
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("csv: cannot open " + path);
  for (size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << "\n";
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
    out << "\n";
  }
}

std::string effective_parameters_csv_header() {
  return "pe,da,mu,porosity,lambda,vx,vy,dxx,dxy,dyy,psi_avg,iterations,diagnostics";
}

std::string effective_parameters_csv_row(const EffectiveParameters& p) {
  std::string s;
  s += format_double(p.pe) + ",";
  s += format_double(p.da) + ",";
  s += format_double(p.mu) + ",";
  s += format_double(p.porosity) + ",";
  s += format_double(p.lambda) + ",";
  s += format_double(p.v_star[0]) + ",";
  s += format_double(p.v_star[1]) + ",";
  s += format_double(p.d_eff[0][0]) + ",";
  s += format_double(p.d_eff[0][1]) + ",";
  s += format_double(p.d_eff[1][1]) + ",";
  s += format_double(p.psi_avg) + ",";
  s += std::to_string(p.spectral_iterations + p.corrector_iterations) + ",";
  s += "\"wdiv=" + format_double(p.drift_div_scaled) +
       ";dsym=" + format_double(p.deff_sym_mismatch) +
       (p.diagnostics.empty() ? "" : ";" + p.diagnostics) + "\"";
  return s;
}

bool file_exists(const std::string& path) { return std::filesystem::exists(path); }

void ensure_directory(const std::string& path) {
  if (!path.empty()) std::filesystem::create_directories(path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << text;
}

}  // namespace upscale
