#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

namespace upscale {

// Neighbor sentinels used in UnitCellMesh::nbr.
inline constexpr int kBlocked = -1;  // solid wall
inline constexpr int kInlet = -2;    // chain mesh, x = 0
inline constexpr int kOutlet = -3;   // chain mesh, x = L

// Direction indices for per-cell face/neighbor arrays.
enum Dir : int { W = 0, E = 1, S = 2, N = 3 };
inline constexpr double kDirSign[4] = {-1.0, +1.0, -1.0, +1.0};

struct Disk {
  double cx = 0.0, cy = 0.0, r = 0.0;
};

//! Describes a periodic unit cell with embedded solids.
//! All lengths are in cell lengths (the unit cell spans one length unit;
//! a channel cell spans one unit across the fluid gap, see build_unit_cell).
struct GeometrySpec {
  enum class Kind { full, channel, single_disk, fcc, multi_disk };

  Kind kind = Kind::full;
  int resolution = 64;         // cells per cell-length
  double wall_fraction = 0.0;  // channel: fraction of cell height per slab
  double radius = 0.0;         // single_disk / fcc
  std::vector<Disk> disks;     // multi_disk

  static GeometrySpec full_cell(int res);
  static GeometrySpec channel(double wall_fraction, int res);
  static GeometrySpec single_disk(double radius, int res);
  static GeometrySpec fcc(double radius, int res);
  static GeometrySpec fcc_porosity(double porosity, int res);
  static GeometrySpec multi_disk(std::vector<Disk> disks, int res);

  // fcc: one full disk at the center plus quarter disks at the corners,
  // so porosity = 1 - 2*pi*r^2.
  static double fcc_radius_for_porosity(double porosity);
};

//! One straight piece of the fluid-solid interface Gamma.
struct GammaSeg {
  int owner = -1;           // fluid cell (compact id) carrying the Robin term
  double len = 0.0;         // segment length
  double nx = 0.0, ny = 0.0;  // unit normal, pointing from fluid into solid
  double mx = 0.0, my = 0.0;  // segment midpoint
};

//! Periodic structured grid with solid mask, cut-cell fluid fractions and
//! the reactive-boundary face set. Immutable after construction.
struct UnitCellMesh {
  int nx = 0, ny = 0;
  double h = 0.0;
  bool periodic_x = true;  // false for chain meshes (inlet/outlet in x)
  int chain_cells = 1;     // unit cells tiled along x
  int tile_nx = 0;         // cells per tile in x

  // raw per-cell data, row-major (idx = iy*nx + ix)
  std::vector<uint8_t> is_fluid;
  std::vector<double> fluid_fraction;  // exact geometric fluid fraction
  std::vector<int> fluid_id;           // compact id, -1 for solid cells

  // compact fluid-cell data
  std::vector<int> cell_ix, cell_iy;
  std::vector<double> volume;           // fluid volume incl. reattached slivers
  std::vector<std::array<int, 4>> nbr;  // W,E,S,N fluid id or sentinel
  std::vector<std::array<int, 4>> face; // face ids into fx/fy arrays

  std::vector<GammaSeg> gamma;
  std::vector<std::pair<int, int>> periodic_pairs;  // raw-cell index pairs

  double porosity = 1.0;
  double total_area = 0.0;
  double gamma_length = 0.0;

  int n_fluid() const { return static_cast<int>(cell_ix.size()); }
  int raw(int ix, int iy) const { return iy * nx + ix; }
  int n_fx() const { return (periodic_x ? nx : nx + 1) * ny; }
  int n_fy() const { return nx * ny; }

  // x-face i is the west face of cell column i; wraps when periodic.
  int fx_id(int i, int j) const {
    int stride = periodic_x ? nx : nx + 1;
    if (periodic_x && i >= nx) i -= nx;
    return j * stride + i;
  }
  // y-face j is the south face of cell row j; y is always periodic.
  int fy_id(int i, int j) const {
    if (j >= ny) j -= ny;
    return j * nx + i;
  }

  double cx(int p) const { return (cell_ix[p] + 0.5) * h; }
  double cy(int p) const { return (cell_iy[p] + 0.5) * h; }
  double width() const { return nx * h; }
  double height() const { return ny * h; }
  double fluid_area() const { return porosity * total_area; }
};

UnitCellMesh build_unit_cell(const GeometrySpec& spec);
UnitCellMesh build_chain_mesh(const GeometrySpec& spec, int n_cells);

//! Fluid-volume average normalized by porosity: (1/|Y_f|) sum f dV.
double favre_average(const UnitCellMesh& mesh, const std::vector<double>& f);

//! Integral over Gamma of f, with f evaluated at the owning fluid cell.
double boundary_integral(const UnitCellMesh& mesh, const std::vector<double>& f);

//! Exact area of the intersection of a disk with an axis-aligned box.
double disk_box_overlap(double cx, double cy, double r, double x0, double y0,
                        double x1, double y1);

}  // namespace upscale
