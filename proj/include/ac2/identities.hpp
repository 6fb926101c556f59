#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

#include "ac2/common.hpp"
#include "ac2/grid.hpp"
#include "ac2/potential.hpp"

namespace ac2 {

struct HamiltonianReport {
  double theta = 0.0;               // slicing direction
  std::vector<double> abscissas;    // slice positions z2
  std::vector<double> rho;          // rho per slice
  double reference = 0.0;           // rho at the slice nearest z2 = 0
  double max_abs_deviation = 0.0;
};

struct MomentReport {
  std::vector<double> abscissas;
  std::vector<double> values;       // E per slice
  double reference = 0.0;
  double max_abs_deviation = 0.0;
  double max_abs_value = 0.0;
};

struct EnergyCurve {
  std::vector<double> radii;
  std::vector<double> energy;       // E_R
  std::vector<double> energy_per_r; // E_R / R
  double beta_ref = 0.0;
  double tail_slope = 0.0;          // d(E_R/R)/dR over the last 5 radii
  int end_count_estimate = 0;       // 0 when the tail has not settled
};

struct ModicaReport {
  double max_violation = 0.0;  // positive part of |grad u|^2 - 2F
  double x = 0.0, y = 0.0;
  int i = 0, j = 0;
};

struct DecayFit {
  double nu = 0.0;
  double prefactor = 0.0;
  double r2 = 0.0;
  int samples = 0;
};

struct Window {
  double x0, x1, y0, y1;
  bool contains(double x, double y) const {
    return x >= x0 && x <= x1 && y >= y0 && y <= y1;
  }
};

// Constancy checks exclude a band of 6 interface widths along every
// truncation edge, where Dirichlet pinning breaks the identities. A
// mirror edge is not a truncation edge.
inline Window interior_window(const Field2D& f, const Potential& p) {
  const double m = 6.0 * p.interface_width();
  Window w;
  w.x0 = f.neumann_left ? f.grid.x0 : f.grid.x0 + m;
  w.x1 = f.grid.x_max() - m;
  w.y0 = f.grid.y0 + m;
  w.y1 = f.grid.y_max() - m;
  if (!(w.x1 > w.x0 && w.y1 > w.y0))
    throw Error(ErrorKind::Geometry, "domain too small for the interior window");
  return w;
}

namespace detail {

// Precomputed gradient samples for bilinear interpolation.
struct GradientField {
  Field2D gx, gy;
  explicit GradientField(const Field2D& f) {
    gx.grid = gy.grid = f.grid;
    gx.values.resize(f.values.size());
    gy.values.resize(f.values.size());
    for (int j = 0; j < f.grid.ny; ++j)
      for (int i = 0; i < f.grid.nx; ++i) {
        gx.at(i, j) = f.grad_x(i, j);
        gy.at(i, j) = f.grad_y(i, j);
      }
  }
};

inline std::size_t nearest_index(const std::vector<double>& xs, double x) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < xs.size(); ++k)
    if (std::abs(xs[k] - x) < std::abs(xs[best] - x)) best = k;
  return best;
}

}  // namespace detail

// rho along slices perpendicular to the direction theta:
//   rho(z2) = int [ F(u) + (1/2) u_{z1}^2 - (1/2) u_{z2}^2 ] dz1
// with (z1, z2) the frame rotated by theta; theta = 0 slices x = const.
//
// Slice positions are confined to the interior window, but each chord
// integrates across the whole domain: the identity integral needs the
// full transversal tails. Slices whose chord-end bands still carry
// visible energy density (an interface leaves through the chord end, so
// the tail is cut off) are skipped rather than reported wrong.
inline HamiltonianReport hamiltonian_profile(const Field2D& f, const Potential& p,
                                             double theta, int n_slices = 41) {
  if (n_slices < 2)
    throw Error(ErrorKind::Geometry, "hamiltonian profile needs >= 2 slices");
  const Window w = interior_window(f, p);
  const auto& g = f.grid;
  detail::GradientField grad(f);
  const double c = std::cos(theta), s = std::sin(theta);
  // e2 = (c, s) carries the slice position, e1 = (-s, c) the integration

  // candidate slice range: projection of the window onto e2
  double z2_lo = 1e300, z2_hi = -1e300;
  for (double wx : {w.x0, w.x1})
    for (double wy : {w.y0, w.y1}) {
      z2_lo = std::min(z2_lo, wx * c + wy * s);
      z2_hi = std::max(z2_hi, wx * c + wy * s);
    }

  const double step = std::min(g.hx, g.hy);
  const double band = 3.0 * p.interface_width();   // chord-end probe length
  const double thr = std::max(2e-4, 0.5 * step * step);  // above the FD noise floor
  HamiltonianReport rep;
  rep.theta = theta;
  for (int k = 0; k < n_slices; ++k) {
    const double z2 = z2_lo + (z2_hi - z2_lo) * k / (n_slices - 1);
    // chord through the full domain along e1
    double t_lo = -1e300, t_hi = 1e300;
    auto clip = [&](double coef, double lo_b, double hi_b, double base) {
      // lo_b <= base + coef * t <= hi_b
      if (std::abs(coef) < 1e-14) {
        if (base < lo_b - 1e-12 || base > hi_b + 1e-12) t_lo = 1.0, t_hi = 0.0;
        return;
      }
      double a = (lo_b - base) / coef, b = (hi_b - base) / coef;
      if (a > b) std::swap(a, b);
      t_lo = std::max(t_lo, a);
      t_hi = std::min(t_hi, b);
    };
    clip(-s, g.x0, g.x_max(), z2 * c);
    clip(c, g.y0, g.y_max(), z2 * s);
    if (!(t_hi - t_lo > 2.0 * band + 4.0 * step)) continue;  // corner sliver
    const int m = std::max(2, static_cast<int>(std::ceil((t_hi - t_lo) / step)));
    const double dt = (t_hi - t_lo) / m;
    double acc = 0.0, end_max = 0.0;
    for (int q = 0; q <= m; ++q) {
      const double t = t_lo + q * dt;
      const double x = z2 * c - t * s;
      const double y = z2 * s + t * c;
      const double gx = grad.gx.interp(x, y), gy = grad.gy.interp(x, y);
      const double u1 = -gx * s + gy * c;
      const double u2 = gx * c + gy * s;
      const double dens = p(f.interp(x, y)) + 0.5 * (u1 * u1 - u2 * u2);
      acc += (q == 0 || q == m) ? 0.5 * dens : dens;
      if (t - t_lo < band || t_hi - t < band)
        end_max = std::max(end_max, std::abs(dens));
    }
    if (end_max > thr) continue;  // tail leaves through the chord end
    rep.abscissas.push_back(z2);
    rep.rho.push_back(acc * dt);
  }
  if (rep.abscissas.size() < 2)
    throw Error(ErrorKind::Geometry,
                "no slice chord resolves its interface tails inside the domain");
  rep.reference = rep.rho[detail::nearest_index(rep.abscissas, 0.0)];
  for (double v : rep.rho)
    rep.max_abs_deviation = std::max(rep.max_abs_deviation, std::abs(v - rep.reference));
  return rep;
}

namespace detail {

// Shared slice machinery for the two moment orientations. axis_x=true
// computes E(x) = int (y-cy) [F + u_y^2/2 - u_x^2/2] dy on grid columns.
// Slice positions stay in the interior window. Each slice integrates a
// range symmetric about the center (so residual tail truncation cancels
// for even solutions); slices whose end bands still carry visible
// density (an interface leaves through the end) are skipped.
inline MomentReport moment_impl(const Field2D& f, const Potential& p,
                                int n_slices, Point center, bool axis_x) {
  const Window w = interior_window(f, p);
  GradientField grad(f);
  const auto& g = f.grid;
  MomentReport rep;
  const double slice_lo = axis_x ? w.x0 : w.y0;
  const double slice_hi = axis_x ? w.x1 : w.y1;
  const double ref_pos = axis_x ? center.x : center.y;
  const double c_int = axis_x ? center.y : center.x;
  const double h_int = axis_x ? g.hy : g.hx;
  const double lo_dom = axis_x ? g.y0 : g.x0;
  const double hi_dom = axis_x ? g.y_max() : g.x_max();
  const double band = 3.0 * p.interface_width();
  const double thr = std::max(2e-4, 0.5 * h_int * h_int);
  const double half = std::min(c_int - lo_dom, hi_dom - c_int);
  if (half <= 2.0 * band)
    throw Error(ErrorKind::Geometry, "moment center too close to the domain edge");
  const double g0_int = axis_x ? g.y0 : g.x0;
  const int q0 = static_cast<int>(std::ceil((c_int - half - g0_int) / h_int - 1e-9));
  const int q1 = static_cast<int>(std::floor((c_int + half - g0_int) / h_int + 1e-9));
  for (int k = 0; k < n_slices; ++k) {
    const double pos = slice_lo + (slice_hi - slice_lo) * k / std::max(1, n_slices - 1);
    double acc = 0.0, end_max = 0.0;
    double abscissa = 0.0;
    for (int q = q0; q <= q1; ++q) {
      int i, j;
      if (axis_x) {
        i = std::clamp(static_cast<int>(std::llround((pos - g.x0) / g.hx)), 0, g.nx - 1);
        j = q;
        abscissa = g.x(i);
      } else {
        j = std::clamp(static_cast<int>(std::llround((pos - g.y0) / g.hy)), 0, g.ny - 1);
        i = q;
        abscissa = g.y(j);
      }
      const double gx = grad.gx.at(i, j), gy = grad.gy.at(i, j);
      const double coord = g0_int + q * h_int;
      const double raw = axis_x ? p(f.at(i, j)) + 0.5 * (gy * gy - gx * gx)
                                : p(f.at(i, j)) + 0.5 * (gx * gx - gy * gy);
      const double dens = (coord - c_int) * raw;
      acc += (q == q0 || q == q1) ? 0.5 * dens : dens;
      if (coord - (c_int - half) < band || (c_int + half) - coord < band)
        end_max = std::max(end_max, std::abs(raw));
    }
    if (end_max > thr) continue;
    rep.abscissas.push_back(abscissa);
    rep.values.push_back(acc * h_int);
  }
  if (rep.abscissas.empty())
    throw Error(ErrorKind::Geometry,
                "no moment slice resolves its interface tails inside the domain");
  rep.reference = rep.values[nearest_index(rep.abscissas, ref_pos)];
  for (double v : rep.values) {
    rep.max_abs_deviation = std::max(rep.max_abs_deviation, std::abs(v - rep.reference));
    rep.max_abs_value = std::max(rep.max_abs_value, std::abs(v));
  }
  return rep;
}

}  // namespace detail

// Moment identity E(x) = int (y - c_y) [F + u_y^2/2 - u_x^2/2] dy.
inline MomentReport moment_profile(const Field2D& f, const Potential& p,
                                   int n_slices = 41, Point center = {}) {
  return detail::moment_impl(f, p, n_slices, center, true);
}

// The x<->y counterpart, used to pin the x-translation.
inline MomentReport moment_profile_swapped(const Field2D& f, const Potential& p,
                                           int n_slices = 41, Point center = {}) {
  return detail::moment_impl(f, p, n_slices, center, false);
}

// Translation that zeroes both moment identities: the moment about c
// satisfies E_c(x) = E_0(x) - c * rho(x), so c = mean(E_0)/mean(rho).
// Two passes: the second measures about the first estimate, where the
// symmetric integration range cancels residual truncation bias.
inline Point canonical_center(const Field2D& f, const Potential& p,
                              int n_slices = 41) {
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  const auto rho_x = hamiltonian_profile(f, p, 0.0, n_slices);
  const auto rho_y = hamiltonian_profile(f, p, kPi / 2.0, n_slices);
  const double rx = mean(rho_x.rho), ry = mean(rho_y.rho);
  Point c{0.0, 0.0};
  for (int pass = 0; pass < 2; ++pass) {
    const auto mom_x = moment_profile(f, p, n_slices, c);
    const auto mom_y = moment_profile_swapped(f, p, n_slices, c);
    if (std::abs(rx) > 1e-12) c.y += mean(mom_x.values) / rx;
    if (std::abs(ry) > 1e-12) c.x += mean(mom_y.values) / ry;
  }
  return c;
}

// Pointwise gradient bound |grad u|^2 <= 2 F(u); reports the largest
// positive defect over interior nodes.
inline ModicaReport modica_check(const Field2D& f, const Potential& p) {
  ModicaReport rep;
  for (int j = 1; j < f.grid.ny - 1; ++j)
    for (int i = 1; i < f.grid.nx - 1; ++i) {
      const double gx = f.grad_x(i, j), gy = f.grad_y(i, j);
      const double v = gx * gx + gy * gy - 2.0 * p(f.at(i, j));
      if (v > rep.max_violation) {
        rep.max_violation = v;
        rep.i = i;
        rep.j = j;
        rep.x = f.grid.x(i);
        rep.y = f.grid.y(j);
      }
    }
  return rep;
}

namespace detail {

// Area of the intersection of the disk of radius R about the origin
// with the rectangle [x0,x1] x [y0,y1], exact.
inline double circle_rect_area(double R, double x0, double y0, double x1,
                               double y1) {
  auto seg = [R](double t) {  // int_0^t sqrt(R^2 - s^2) ds, t in [0, R]
    return 0.5 * (t * std::sqrt(std::max(0.0, R * R - t * t)) +
                  R * R * std::asin(std::clamp(t / R, -1.0, 1.0)));
  };
  auto corner = [&](double x, double y) {  // area in [0,x] x [0,y], x,y >= 0
    if (x <= 0.0 || y <= 0.0) return 0.0;
    x = std::min(x, R);
    y = std::min(y, R);
    if (x * x + y * y <= R * R) return x * y;
    const double xc = std::sqrt(std::max(0.0, R * R - y * y));
    if (x <= xc) return x * y;
    return xc * y + seg(x) - seg(xc);
  };
  auto signed_corner = [&](double x, double y) {
    const double sx = x < 0 ? -1.0 : 1.0;
    const double sy = y < 0 ? -1.0 : 1.0;
    return sx * sy * corner(std::abs(x), std::abs(y));
  };
  return signed_corner(x1, y1) - signed_corner(x0, y1) - signed_corner(x1, y0) +
         signed_corner(x0, y0);
}

}  // namespace detail

// E_R over disks about `center`, with exact fractional weighting of the
// boundary cells so that E_R is smooth in R.
inline EnergyCurve energy_curve(const Field2D& f, const Potential& p,
                                const std::vector<double>& radii, Point center) {
  const auto& g = f.grid;
  for (double R : radii) {
    if (!(R > 0.0))
      throw Error(ErrorKind::Geometry, "energy curve radii must be positive");
    if (center.x - R < g.x0 - 1e-12 || center.x + R > g.x_max() + 1e-12 ||
        center.y - R < g.y0 - 1e-12 || center.y + R > g.y_max() + 1e-12) {
      std::ostringstream os;
      os << "disk of radius " << R << " leaves the domain";
      throw Error(ErrorKind::Geometry, os.str());
    }
  }
  EnergyCurve curve;
  curve.radii = radii;
  curve.beta_ref = p.beta();
  curve.energy.assign(radii.size(), 0.0);
  const double half_diag = 0.5 * std::hypot(g.hx, g.hy);
  const double cell_area = g.hx * g.hy;
  for (int j = 0; j + 1 < g.ny; ++j) {
    for (int i = 0; i + 1 < g.nx; ++i) {
      // cell-centered energy density from the four corners
      const double ux = ((f.at(i + 1, j) + f.at(i + 1, j + 1)) -
                         (f.at(i, j) + f.at(i, j + 1))) / (2.0 * g.hx);
      const double uy = ((f.at(i, j + 1) + f.at(i + 1, j + 1)) -
                         (f.at(i, j) + f.at(i + 1, j))) / (2.0 * g.hy);
      const double um = 0.25 * (f.at(i, j) + f.at(i + 1, j) + f.at(i, j + 1) +
                                f.at(i + 1, j + 1));
      const double e = 0.5 * (ux * ux + uy * uy) + p(um);
      const double cx0 = g.x(i) - center.x, cy0 = g.y(j) - center.y;
      const double d = std::hypot(cx0 + 0.5 * g.hx, cy0 + 0.5 * g.hy);
      for (std::size_t k = 0; k < radii.size(); ++k) {
        const double R = radii[k];
        if (d - half_diag >= R) continue;
        if (d + half_diag <= R) {
          curve.energy[k] += e * cell_area;
        } else {
          curve.energy[k] += e * detail::circle_rect_area(R, cx0, cy0,
                                                          cx0 + g.hx, cy0 + g.hy);
        }
      }
    }
  }
  for (std::size_t k = 0; k < radii.size(); ++k)
    curve.energy_per_r.push_back(curve.energy[k] / radii[k]);

  // tail diagnostics: commit to an end count only on a settled tail
  const std::size_t nt = std::min<std::size_t>(5, radii.size());
  if (nt >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = radii.size() - nt; k < radii.size(); ++k) {
      sx += radii[k];
      sy += curve.energy_per_r[k];
      sxx += radii[k] * radii[k];
      sxy += radii[k] * curve.energy_per_r[k];
    }
    const double n = static_cast<double>(nt);
    curve.tail_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double tail_mean = sy / n;
    if (std::abs(curve.tail_slope) < 0.02 * curve.beta_ref)
      curve.end_count_estimate =
          static_cast<int>(std::llround(tail_mean / curve.beta_ref));
  }
  return curve;
}

// Log-linear fit of 1 - |u| against the distance to the zero level set
// over d in [d_lo, d_hi]; nu is the exponential decay rate.
inline DecayFit decay_fit(const Field2D& f, const Potential& p,
                          const std::vector<std::vector<Point>>& levelset,
                          double d_lo = 2.0, double d_hi = 7.0) {
  std::vector<Point> verts;
  for (const auto& poly : levelset)
    for (const auto& q : poly) verts.push_back(q);
  if (verts.empty())
    throw Error(ErrorKind::InsufficientData, "no level set to measure decay from");

  const double bin = 1.0;
  std::map<std::pair<int, int>, std::vector<Point>> bins;
  for (const auto& q : verts)
    bins[{static_cast<int>(std::floor(q.x / bin)),
          static_cast<int>(std::floor(q.y / bin))}].push_back(q);

  auto nearest = [&](double x, double y) {
    const int bx = static_cast<int>(std::floor(x / bin));
    const int by = static_cast<int>(std::floor(y / bin));
    double best = 1e300;
    const int kmax = static_cast<int>(std::ceil(d_hi / bin)) + 2;
    for (int k = 0; k <= kmax; ++k) {
      if ((k - 1) * bin > best) break;
      for (int dx = -k; dx <= k; ++dx)
        for (int dy = -k; dy <= k; ++dy) {
          if (std::max(std::abs(dx), std::abs(dy)) != k) continue;
          auto it = bins.find({bx + dx, by + dy});
          if (it == bins.end()) continue;
          for (const auto& q : it->second)
            best = std::min(best, std::hypot(q.x - x, q.y - y));
        }
    }
    return best;
  };

  const Window w = interior_window(f, p);
  std::vector<double> ds, ls;
  for (int j = 1; j < f.grid.ny - 1; ++j)
    for (int i = 1; i < f.grid.nx - 1; ++i) {
      const double x = f.grid.x(i), y = f.grid.y(j);
      if (!w.contains(x, y)) continue;
      const double d = nearest(x, y);
      if (d < d_lo || d > d_hi) continue;
      const double gap = 1.0 - std::abs(f.at(i, j));
      if (gap < 1e-13) continue;
      ds.push_back(d);
      ls.push_back(std::log(gap));
    }
  if (ds.size() < 100)
    throw Error(ErrorKind::InsufficientData,
                "fewer than 100 usable nodes for the decay fit");
  const double n = static_cast<double>(ds.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t k = 0; k < ds.size(); ++k) {
    sx += ds[k];
    sy += ls[k];
    sxx += ds[k] * ds[k];
    sxy += ds[k] * ls[k];
    syy += ls[k] * ls[k];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double icept = (sy - slope * sx) / n;
  DecayFit fit;
  fit.nu = -slope;
  fit.prefactor = std::exp(icept);
  fit.samples = static_cast<int>(ds.size());
  const double sstot = syy - sy * sy / n;
  double ssres = 0.0;
  for (std::size_t k = 0; k < ds.size(); ++k) {
    const double e = ls[k] - (icept + slope * ds[k]);
    ssres += e * e;
  }
  fit.r2 = sstot > 0.0 ? 1.0 - ssres / sstot : 1.0;
  return fit;
}

}  // namespace ac2
