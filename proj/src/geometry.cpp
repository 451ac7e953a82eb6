#include "upscale/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <string>

namespace upscale {

namespace {

constexpr double kPi = 3.14159265358979323846;

double clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

// antiderivative of sqrt(r^2 - u^2)
double circ_prim(double u, double r) {
  u = clamp(u, -r, r);
  return 0.5 * (u * std::sqrt(std::max(r * r - u * u, 0.0)) + r * r * std::asin(clamp(u / r, -1.0, 1.0)));
}

// area of the circular segment {u > t} of a disk of radius r at the origin
double segment_area(double t, double r) {
  if (t <= -r) return kPi * r * r;
  if (t >= r) return 0.0;
  return r * r * std::acos(clamp(t / r, -1.0, 1.0)) - t * std::sqrt(std::max(r * r - t * t, 0.0));
}

// area of the disk region {u > x, v > y}
double corner_area(double x, double y, double r) {
  if (x >= r || y >= r) return 0.0;
  if (y <= -r) return segment_area(x, r);
  if (x <= -r) return segment_area(y, r);
  double b = std::sqrt(std::max(r * r - y * y, 0.0));
  double area = 0.0;
  if (y >= 0.0) {
    double lo = std::max(x, -b);
    if (lo < b) area = (circ_prim(b, r) - circ_prim(lo, r)) - y * (b - lo);
  } else {
    double lo = std::max(x, -r);
    if (lo < -b) {
      area += 2.0 * (circ_prim(-b, r) - circ_prim(lo, r));
      lo = -b;
    }
    if (lo < b) area += (circ_prim(b, r) - circ_prim(lo, r)) - y * (b - lo);
    double start = std::max(b, std::max(x, -r));
    if (start < r) area += 2.0 * (circ_prim(r, r) - circ_prim(start, r));
  }
  return std::max(area, 0.0);
}

// area of the disk region {u <= x, v <= y}
double quadrant_area(double x, double y, double r) {
  if (x <= -r || y <= -r) return 0.0;
  if (x >= r && y >= r) return kPi * r * r;
  if (x >= r) return kPi * r * r - segment_area(y, r);
  if (y >= r) return kPi * r * r - segment_area(x, r);
  return kPi * r * r - segment_area(x, r) - segment_area(y, r) + corner_area(x, y, r);
}

struct Body {  // disk solid, possibly a periodic image of another body
  double cx, cy, r;
};

struct BuildInput {
  int nx = 0, ny = 0;
  double h = 0.0;
  bool periodic_x = true;
  int chain_cells = 1;
  int tile_nx = 0;
  std::vector<Body> bodies;       // disks incl. periodic images
  double slab_lo = 0.0, slab_hi = 0.0;  // channel: fluid gap [slab_lo, slab_hi]
  bool has_slabs = false;
};

double cell_solid_overlap(const BuildInput& in, int ix, int iy) {
  double x0 = ix * in.h, x1 = (ix + 1) * in.h;
  double y0 = iy * in.h, y1 = (iy + 1) * in.h;
  double solid = 0.0;
  for (const Body& b : in.bodies) {
    if (x0 > b.cx + b.r || x1 < b.cx - b.r || y0 > b.cy + b.r || y1 < b.cy - b.r) continue;
    solid += disk_box_overlap(b.cx, b.cy, b.r, x0, y0, x1, y1);
  }
  if (in.has_slabs) {
    double below = std::max(0.0, std::min(y1, in.slab_lo) - y0);
    double above = std::max(0.0, y1 - std::max(y0, in.slab_hi));
    solid += (below + above) * (x1 - x0);
  }
  return solid;
}

void check_body_overlaps(const std::vector<Body>& bodies) {
  for (size_t i = 0; i < bodies.size(); ++i)
    for (size_t j = i + 1; j < bodies.size(); ++j) {
      double dx = bodies[i].cx - bodies[j].cx, dy = bodies[i].cy - bodies[j].cy;
      double d = std::hypot(dx, dy);
      if (d < 1e-12) continue;  // coincident image, same body
      if (d < bodies[i].r + bodies[j].r - 1e-12)
        throw std::runtime_error("geometry: solids overlap");
    }
}

// Gamma segments of one disk body: split the circle at every grid-line
// crossing, keep arcs whose midpoint lies inside the domain, and store the
// exact chord with the radial normal pointing into the solid.
void gamma_from_body(const BuildInput& in, const Body& b, std::vector<GammaSeg>& out) {
  double Wd = in.nx * in.h, Hd = in.ny * in.h;
  if (b.cx + b.r <= 0.0 || b.cx - b.r >= Wd || b.cy + b.r <= 0.0 || b.cy - b.r >= Hd) return;

  std::vector<double> ang;
  auto push = [&](double a) {
    a = std::fmod(a, 2.0 * kPi);
    if (a < 0) a += 2.0 * kPi;
    ang.push_back(a);
  };
  int i0 = static_cast<int>(std::floor((b.cx - b.r) / in.h)) - 1;
  int i1 = static_cast<int>(std::ceil((b.cx + b.r) / in.h)) + 1;
  for (int i = i0; i <= i1; ++i) {
    double t = (i * in.h - b.cx) / b.r;
    if (t <= -1.0 || t >= 1.0) continue;
    double a = std::acos(t);
    push(a);
    push(-a);
  }
  int j0 = static_cast<int>(std::floor((b.cy - b.r) / in.h)) - 1;
  int j1 = static_cast<int>(std::ceil((b.cy + b.r) / in.h)) + 1;
  for (int j = j0; j <= j1; ++j) {
    double t = (j * in.h - b.cy) / b.r;
    if (t <= -1.0 || t >= 1.0) continue;
    double a = std::asin(t);
    push(a);
    push(kPi - a);
  }
  if (ang.empty()) throw std::runtime_error("geometry: resolution too coarse for disk");
  std::sort(ang.begin(), ang.end());
  ang.erase(std::unique(ang.begin(), ang.end(),
                        [](double a, double c) { return std::abs(a - c) < 1e-12; }),
            ang.end());

  size_t n = ang.size();
  for (size_t k = 0; k < n; ++k) {
    double a1 = ang[k];
    double a2 = (k + 1 < n) ? ang[k + 1] : ang[0] + 2.0 * kPi;
    if (a2 - a1 < 1e-12) continue;
    double am = 0.5 * (a1 + a2);
    double mx = b.cx + b.r * std::cos(am), my = b.cy + b.r * std::sin(am);
    if (mx < 0.0 || mx > Wd || my < 0.0 || my > Hd) continue;
    double p1x = b.cx + b.r * std::cos(a1), p1y = b.cy + b.r * std::sin(a1);
    double p2x = b.cx + b.r * std::cos(a2), p2y = b.cy + b.r * std::sin(a2);
    GammaSeg s;
    s.len = std::hypot(p2x - p1x, p2y - p1y);
    if (s.len < 1e-14) continue;
    s.nx = -std::cos(am);
    s.ny = -std::sin(am);
    s.mx = mx;
    s.my = my;
    out.push_back(s);
  }
}

UnitCellMesh assemble_mesh(const BuildInput& in) {
  UnitCellMesh m;
  m.nx = in.nx;
  m.ny = in.ny;
  m.h = in.h;
  m.periodic_x = in.periodic_x;
  m.chain_cells = in.chain_cells;
  m.tile_nx = in.tile_nx;
  m.total_area = m.nx * m.ny * m.h * m.h;

  int ncell = m.nx * m.ny;
  m.is_fluid.assign(ncell, 0);
  m.fluid_fraction.assign(ncell, 0.0);
  m.fluid_id.assign(ncell, -1);

  double fluid_total = 0.0;
  for (int iy = 0; iy < m.ny; ++iy)
    for (int ix = 0; ix < m.nx; ++ix) {
      double solid = cell_solid_overlap(in, ix, iy);
      double ff = clamp(1.0 - solid / (m.h * m.h), 0.0, 1.0);
      if (ff < 1e-12) ff = 0.0;
      if (ff > 1.0 - 1e-12) ff = 1.0;
      int c = m.raw(ix, iy);
      m.fluid_fraction[c] = ff;
      m.is_fluid[c] = ff >= 0.5 ? 1 : 0;
      fluid_total += ff * m.h * m.h;
    }
  m.porosity = fluid_total / m.total_area;
  if (m.porosity <= 0.0) throw std::runtime_error("geometry: no fluid region");

  // compact ids
  for (int iy = 0; iy < m.ny; ++iy)
    for (int ix = 0; ix < m.nx; ++ix) {
      int c = m.raw(ix, iy);
      if (!m.is_fluid[c]) continue;
      m.fluid_id[c] = m.n_fluid();
      m.cell_ix.push_back(ix);
      m.cell_iy.push_back(iy);
    }
  int nf = m.n_fluid();
  m.volume.assign(nf, 0.0);
  m.nbr.assign(nf, {kBlocked, kBlocked, kBlocked, kBlocked});
  m.face.assign(nf, {0, 0, 0, 0});

  auto raw_nbr = [&](int ix, int iy, int dir) -> int {
    int jx = ix, jy = iy;
    if (dir == W) jx = ix - 1;
    if (dir == E) jx = ix + 1;
    if (dir == S) jy = iy - 1;
    if (dir == N) jy = iy + 1;
    if (jy < 0) jy += m.ny;
    if (jy >= m.ny) jy -= m.ny;
    if (jx < 0) {
      if (!m.periodic_x) return kInlet;
      jx += m.nx;
    }
    if (jx >= m.nx) {
      if (!m.periodic_x) return kOutlet;
      jx -= m.nx;
    }
    int c = m.raw(jx, jy);
    return m.is_fluid[c] ? m.fluid_id[c] : kBlocked;
  };

  for (int p = 0; p < nf; ++p) {
    int ix = m.cell_ix[p], iy = m.cell_iy[p];
    m.volume[p] = m.fluid_fraction[m.raw(ix, iy)] * m.h * m.h;
    for (int d = 0; d < 4; ++d) m.nbr[p][d] = raw_nbr(ix, iy, d);
    m.face[p][W] = m.fx_id(ix, iy);
    m.face[p][E] = m.fx_id(ix + 1, iy);
    m.face[p][S] = m.fy_id(ix, iy);
    m.face[p][N] = m.fy_id(ix, iy + 1);
  }

  // connectivity of the fluid region
  if (nf > 0) {
    std::vector<uint8_t> seen(nf, 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    int reached = 1;
    while (!q.empty()) {
      int p = q.front();
      q.pop();
      for (int d = 0; d < 4; ++d) {
        int n = m.nbr[p][d];
        if (n >= 0 && !seen[n]) {
          seen[n] = 1;
          ++reached;
          q.push(n);
        }
      }
    }
    if (reached != nf) throw std::runtime_error("geometry: fluid not connected");
  }

  // reattach sub-threshold cut-cell slivers to a neighboring fluid cell so
  // volume integrals see the exact fluid area
  for (int iy = 0; iy < m.ny; ++iy)
    for (int ix = 0; ix < m.nx; ++ix) {
      int c = m.raw(ix, iy);
      if (m.is_fluid[c] || m.fluid_fraction[c] <= 1e-14) continue;
      // split among the largest-fraction fluid neighbors; exact ties share
      // equally so mirror-symmetric meshes keep symmetric volumes
      std::vector<int> targets;
      double best_ff = -1.0;
      for (int d = 0; d < 4; ++d) {
        int jx = ix + (d == E) - (d == W), jy = iy + (d == N) - (d == S);
        if (jy < 0) jy += m.ny;
        if (jy >= m.ny) jy -= m.ny;
        if (jx < 0) { if (!m.periodic_x) continue; jx += m.nx; }
        if (jx >= m.nx) { if (!m.periodic_x) continue; jx -= m.nx; }
        int n = m.raw(jx, jy);
        if (!m.is_fluid[n]) continue;
        if (m.fluid_fraction[n] > best_ff + 1e-9) {
          best_ff = m.fluid_fraction[n];
          targets.assign(1, m.fluid_id[n]);
        } else if (m.fluid_fraction[n] > best_ff - 1e-9) {
          targets.push_back(m.fluid_id[n]);
        }
      }
      if (targets.empty()) {
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            int jx = ix + dx, jy = iy + dy;
            if (jy < 0) jy += m.ny;
            if (jy >= m.ny) jy -= m.ny;
            if (jx < 0) { if (!m.periodic_x) continue; jx += m.nx; }
            if (jx >= m.nx) { if (!m.periodic_x) continue; jx -= m.nx; }
            int n = m.raw(jx, jy);
            if (m.is_fluid[n]) targets.push_back(m.fluid_id[n]);
          }
      }
      if (targets.empty()) throw std::runtime_error("geometry: isolated solid sliver");
      double share = m.fluid_fraction[c] * m.h * m.h / targets.size();
      for (int t : targets) m.volume[t] += share;
    }

  // gamma segments
  std::vector<GammaSeg> segs;
  for (const Body& b : in.bodies) gamma_from_body(in, b, segs);
  if (in.has_slabs) {
    int j_lo = static_cast<int>(std::lround(in.slab_lo / in.h));
    int j_hi = static_cast<int>(std::lround(in.slab_hi / in.h));
    for (int ix = 0; ix < m.nx; ++ix) {
      GammaSeg lo;
      lo.len = m.h;
      lo.nx = 0.0;
      lo.ny = -1.0;
      lo.mx = (ix + 0.5) * m.h;
      lo.my = in.slab_lo;
      lo.owner = m.fluid_id[m.raw(ix, j_lo)];
      GammaSeg hi = lo;
      hi.ny = 1.0;
      hi.my = in.slab_hi;
      hi.owner = m.fluid_id[m.raw(ix, j_hi - 1)];
      segs.push_back(lo);
      segs.push_back(hi);
    }
  }

  // assign owners for disk segments by walking into the fluid
  double Wd = m.width(), Hd = m.height();
  auto cell_at = [&](double x, double y) -> int {
    if (m.periodic_x) {
      x = std::fmod(x, Wd);
      if (x < 0) x += Wd;
    } else if (x < 0.0 || x >= Wd) {
      return -1;
    }
    y = std::fmod(y, Hd);
    if (y < 0) y += Hd;
    int ix = std::min(static_cast<int>(x / m.h), m.nx - 1);
    int iy = std::min(static_cast<int>(y / m.h), m.ny - 1);
    return m.raw(ix, iy);
  };
  for (GammaSeg& s : segs) {
    if (s.owner >= 0) continue;
    for (double step = 0.0; step < 3.1; step += 0.5) {
      int c = cell_at(s.mx - s.nx * step * m.h, s.my - s.ny * step * m.h);
      if (c >= 0 && m.is_fluid[c]) {
        s.owner = m.fluid_id[c];
        break;
      }
    }
    if (s.owner < 0) throw std::runtime_error("geometry: gamma segment without fluid owner");
  }
  m.gamma = std::move(segs);
  for (const GammaSeg& s : m.gamma) m.gamma_length += s.len;

  // periodic face pairing (kept as data for introspection and tests)
  if (m.periodic_x)
    for (int j = 0; j < m.ny; ++j) m.periodic_pairs.emplace_back(m.raw(0, j), m.raw(m.nx - 1, j));
  for (int i = 0; i < m.nx; ++i) m.periodic_pairs.emplace_back(m.raw(i, 0), m.raw(i, m.ny - 1));

  return m;
}

BuildInput make_input(const GeometrySpec& spec, int n_cells, bool periodic_x) {
  if (spec.resolution < 8) throw std::runtime_error("geometry: resolution must be >= 8");
  if (n_cells < 1) throw std::runtime_error("geometry: n_cells must be >= 1");

  BuildInput in;
  in.h = 1.0 / spec.resolution;
  in.tile_nx = spec.resolution;
  in.chain_cells = n_cells;
  in.periodic_x = periodic_x;
  in.nx = spec.resolution * n_cells;
  in.ny = spec.resolution;

  std::vector<Disk> unit;
  switch (spec.kind) {
    case GeometrySpec::Kind::full:
      break;
    case GeometrySpec::Kind::channel: {
      double w = spec.wall_fraction;
      if (w < 0.0 || w >= 0.5) throw std::runtime_error("geometry: wall_fraction must be in [0, 0.5)");
      if (w > 0.0) {
        // the fluid gap is the unit length; each slab adds w/(1-2w) cell-lengths
        int t_cells = std::max(1, static_cast<int>(std::lround(w / (1.0 - 2.0 * w) * spec.resolution)));
        in.ny = spec.resolution + 2 * t_cells;
        in.has_slabs = true;
        in.slab_lo = t_cells * in.h;
        in.slab_hi = (t_cells + spec.resolution) * in.h;
      }
      break;
    }
    case GeometrySpec::Kind::single_disk:
      if (spec.radius <= 0.0 || spec.radius >= 0.5)
        throw std::runtime_error("geometry: disk radius must be in (0, 0.5)");
      unit.push_back({0.5, 0.5, spec.radius});
      break;
    case GeometrySpec::Kind::fcc:
      if (spec.radius <= 0.0 || 2.0 * spec.radius >= std::sqrt(0.5))
        throw std::runtime_error("geometry: fcc disks overlap");
      unit.push_back({0.5, 0.5, spec.radius});
      unit.push_back({0.0, 0.0, spec.radius});
      break;
    case GeometrySpec::Kind::multi_disk:
      unit = spec.disks;
      break;
  }

  if (!unit.empty()) {
    for (const Disk& d : unit)
      if (d.r < 2.0 * in.h) throw std::runtime_error("geometry: resolution too coarse for disk");
    double Wd = static_cast<double>(n_cells);
    for (int k = 0; k < n_cells; ++k)
      for (const Disk& d : unit)
        for (int ox = -1; ox <= 1; ++ox)
          for (int oy = -1; oy <= 1; ++oy) {
            Body b{d.cx + k + ox, d.cy + oy, d.r};
            if (b.cx + b.r <= 0.0 || b.cx - b.r >= Wd || b.cy + b.r <= 0.0 || b.cy - b.r >= 1.0)
              continue;
            bool dup = false;
            for (const Body& e : in.bodies)
              if (std::abs(e.cx - b.cx) < 1e-12 && std::abs(e.cy - b.cy) < 1e-12) dup = true;
            if (!dup) in.bodies.push_back(b);
          }
    check_body_overlaps(in.bodies);
  }
  return in;
}

}  // namespace

double disk_box_overlap(double cx, double cy, double r, double x0, double y0,
                        double x1, double y1) {
  if (r <= 0.0) return 0.0;
  double a = quadrant_area(x1 - cx, y1 - cy, r) - quadrant_area(x0 - cx, y1 - cy, r) -
             quadrant_area(x1 - cx, y0 - cy, r) + quadrant_area(x0 - cx, y0 - cy, r);
  return clamp(a, 0.0, std::min(kPi * r * r, (x1 - x0) * (y1 - y0)));
}

GeometrySpec GeometrySpec::full_cell(int res) {
  GeometrySpec s;
  s.kind = Kind::full;
  s.resolution = res;
  return s;
}

GeometrySpec GeometrySpec::channel(double wall_fraction, int res) {
  GeometrySpec s;
  s.kind = Kind::channel;
  s.wall_fraction = wall_fraction;
  s.resolution = res;
  return s;
}

GeometrySpec GeometrySpec::single_disk(double radius, int res) {
  GeometrySpec s;
  s.kind = Kind::single_disk;
  s.radius = radius;
  s.resolution = res;
  return s;
}

GeometrySpec GeometrySpec::fcc(double radius, int res) {
  GeometrySpec s;
  s.kind = Kind::fcc;
  s.radius = radius;
  s.resolution = res;
  return s;
}

GeometrySpec GeometrySpec::fcc_porosity(double porosity, int res) {
  return fcc(fcc_radius_for_porosity(porosity), res);
}

GeometrySpec GeometrySpec::multi_disk(std::vector<Disk> disks, int res) {
  GeometrySpec s;
  s.kind = Kind::multi_disk;
  s.disks = std::move(disks);
  s.resolution = res;
  return s;
}

double GeometrySpec::fcc_radius_for_porosity(double porosity) {
  if (porosity <= 0.0 || porosity >= 1.0)
    throw std::runtime_error("geometry: porosity must be in (0, 1)");
  return std::sqrt((1.0 - porosity) / (2.0 * kPi));
}

UnitCellMesh build_unit_cell(const GeometrySpec& spec) {
  return assemble_mesh(make_input(spec, 1, true));
}

UnitCellMesh build_chain_mesh(const GeometrySpec& spec, int n_cells) {
  return assemble_mesh(make_input(spec, n_cells, false));
}

double favre_average(const UnitCellMesh& mesh, const std::vector<double>& f) {
  double num = 0.0, den = 0.0;
  for (int p = 0; p < mesh.n_fluid(); ++p) {
    num += f[p] * mesh.volume[p];
    den += mesh.volume[p];
  }
  return num / den;
}

double boundary_integral(const UnitCellMesh& mesh, const std::vector<double>& f) {
  double s = 0.0;
  for (const GammaSeg& g : mesh.gamma) s += f[g.owner] * g.len;
  return s;
}

}  // namespace upscale
