#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "ac2/common.hpp"

namespace ac2 {

struct Grid2D {
  int nx = 0, ny = 0;
  double hx = 0.0, hy = 0.0;
  double x0 = 0.0, y0 = 0.0;  // coordinates of sample (0, 0)

  double x(int i) const { return x0 + i * hx; }
  double y(int j) const { return y0 + j * hy; }
  double x_max() const { return x(nx - 1); }
  double y_max() const { return y(ny - 1); }

  static Grid2D centered(double lx, double ly, double hx, double hy) {
    Grid2D g;
    g.nx = 2 * static_cast<int>(std::llround(lx / hx)) + 1;
    g.ny = 2 * static_cast<int>(std::llround(ly / hy)) + 1;
    g.hx = hx;
    g.hy = hy;
    g.x0 = -hx * (g.nx - 1) / 2.0;
    g.y0 = -hy * (g.ny - 1) / 2.0;
    return g;
  }

  // [0, lx] x [-ly, ly], used for the Neumann half-plane configuration
  static Grid2D half(double lx, double ly, double hx, double hy) {
    Grid2D g;
    g.nx = static_cast<int>(std::llround(lx / hx)) + 1;
    g.ny = 2 * static_cast<int>(std::llround(ly / hy)) + 1;
    g.hx = hx;
    g.hy = hy;
    g.x0 = 0.0;
    g.y0 = -hy * (g.ny - 1) / 2.0;
    return g;
  }
};

// Sampled 2D solution on a rectangular grid, row-major (j*nx + i).
struct Field2D {
  Grid2D grid;
  std::vector<double> values;
  std::string potential_id;
  std::string bc_json;               // sidecar boundary description
  bool neumann_left = false;         // mirror symmetry edge at x = x0
  double residual_max = std::numeric_limits<double>::quiet_NaN();

  double at(int i, int j) const { return values[static_cast<std::size_t>(j) * grid.nx + i]; }
  double& at(int i, int j) { return values[static_cast<std::size_t>(j) * grid.nx + i]; }

  bool contains(double x, double y) const {
    return x >= grid.x0 - 1e-12 && x <= grid.x_max() + 1e-12 &&
           y >= grid.y0 - 1e-12 && y <= grid.y_max() + 1e-12;
  }

  double interp(double x, double y) const {
    const auto& g = grid;
    double fx = (x - g.x0) / g.hx;
    double fy = (y - g.y0) / g.hy;
    int i = std::clamp(static_cast<int>(std::floor(fx)), 0, g.nx - 2);
    int j = std::clamp(static_cast<int>(std::floor(fy)), 0, g.ny - 2);
    const double tx = std::clamp(fx - i, 0.0, 1.0);
    const double ty = std::clamp(fy - j, 0.0, 1.0);
    return (1 - tx) * (1 - ty) * at(i, j) + tx * (1 - ty) * at(i + 1, j) +
           (1 - tx) * ty * at(i, j + 1) + tx * ty * at(i + 1, j + 1);
  }

  // Centered difference gradient, one-sided at the grid edges.
  double grad_x(int i, int j) const {
    const int nx = grid.nx;
    if (i == 0) return (-3.0 * at(0, j) + 4.0 * at(1, j) - at(2, j)) / (2.0 * grid.hx);
    if (i == nx - 1)
      return (3.0 * at(nx - 1, j) - 4.0 * at(nx - 2, j) + at(nx - 3, j)) / (2.0 * grid.hx);
    return (at(i + 1, j) - at(i - 1, j)) / (2.0 * grid.hx);
  }
  double grad_y(int i, int j) const {
    const int ny = grid.ny;
    if (j == 0) return (-3.0 * at(i, 0) + 4.0 * at(i, 1) - at(i, 2)) / (2.0 * grid.hy);
    if (j == ny - 1)
      return (3.0 * at(i, ny - 1) - 4.0 * at(i, ny - 2) + at(i, ny - 3)) / (2.0 * grid.hy);
    return (at(i, j + 1) - at(i, j - 1)) / (2.0 * grid.hy);
  }
};

namespace detail {

inline void write_le_doubles(std::ostream& os, const std::vector<double>& v) {
  static_assert(sizeof(double) == 8);
  if constexpr (std::endian::native == std::endian::little) {
    os.write(reinterpret_cast<const char*>(v.data()),
             static_cast<std::streamsize>(v.size() * 8));
  } else {
    for (double d : v) {
      std::uint64_t u;
      std::memcpy(&u, &d, 8);
      char b[8];
      for (int k = 0; k < 8; ++k) b[k] = static_cast<char>((u >> (8 * k)) & 0xff);
      os.write(b, 8);
    }
  }
}

inline void read_le_doubles(std::istream& is, std::vector<double>& v) {
  if constexpr (std::endian::native == std::endian::little) {
    is.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(v.size() * 8));
  } else {
    for (double& d : v) {
      char b[8];
      is.read(b, 8);
      std::uint64_t u = 0;
      for (int k = 0; k < 8; ++k)
        u |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[k])) << (8 * k);
      std::memcpy(&d, &u, 8);
    }
  }
}

}  // namespace detail

// Snapshot: header line "AC2 nx ny hx hy x0 y0 potential_id" followed by
// nx*ny little-endian 64-bit floats, row-major. The BoundarySpec and
// residual travel in a sidecar JSON next to the snapshot.
inline void save_snapshot(const Field2D& f, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::InvalidInput, "cannot open " + path + " for writing");
  std::ostringstream hdr;
  hdr.precision(17);
  hdr << "AC2 " << f.grid.nx << " " << f.grid.ny << " " << f.grid.hx << " "
      << f.grid.hy << " " << f.grid.x0 << " " << f.grid.y0 << " "
      << (f.potential_id.empty() ? "unknown" : f.potential_id) << "\n";
  os << hdr.str();
  detail::write_le_doubles(os, f.values);
  if (!os) throw Error(ErrorKind::InvalidInput, "write failed for " + path);
}

inline Field2D load_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::InvalidInput, "cannot open " + path);
  std::string line;
  std::getline(is, line);
  std::istringstream hs(line);
  std::string magic;
  Field2D f;
  hs >> magic >> f.grid.nx >> f.grid.ny >> f.grid.hx >> f.grid.hy >>
      f.grid.x0 >> f.grid.y0 >> f.potential_id;
  if (magic != "AC2" || !hs || f.grid.nx <= 0 || f.grid.ny <= 0)
    throw Error(ErrorKind::InvalidInput, "bad snapshot header in " + path);
  f.values.resize(static_cast<std::size_t>(f.grid.nx) * f.grid.ny);
  detail::read_le_doubles(is, f.values);
  if (!is) throw Error(ErrorKind::InvalidInput, "truncated snapshot " + path);
  return f;
}

}  // namespace ac2
