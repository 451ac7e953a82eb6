#pragma once

#include <map>
#include <string>
#include <vector>

#include "upscale/closure.hpp"
#include "upscale/field.hpp"
#include "upscale/geometry.hpp"

namespace upscale {

//! Plain key = value configuration file: one pair per line, '#' comments,
//! comma-separated lists. Keys are case-sensitive.
struct Config {
  std::map<std::string, std::string> values;
  std::string source_text;

  static Config parse_file(const std::string& path);
  static Config parse_text(const std::string& text);

  bool has(const std::string& key) const { return values.count(key) > 0; }
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_list(const std::string& key, std::vector<double> fallback) const;
};

//! FNV-1a hash of the canonicalized config, hex-encoded.
std::string config_hash(const Config& cfg);

//! Fixed shortest round-trip formatting used by every CSV writer, so
//! repeated runs are byte-identical.
std::string format_double(double v);

//! Legacy-VTK structured-points dump of cell scalars (and optionally the
//! cell-centered velocity of a face flux).
void write_vtk(const std::string& path, const UnitCellMesh& mesh,
               const std::vector<std::pair<std::string, const CellField*>>& fields,
               const FaceField* flux = nullptr);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

std::string effective_parameters_csv_header();
std::string effective_parameters_csv_row(const EffectiveParameters& p);

bool file_exists(const std::string& path);
void ensure_directory(const std::string& path);
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace upscale
