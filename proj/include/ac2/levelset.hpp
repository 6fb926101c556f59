#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

#include "ac2/common.hpp"
#include "ac2/grid.hpp"
#include "ac2/identities.hpp"
#include "ac2/potential.hpp"

namespace ac2 {

struct ZeroSet {
  std::vector<std::vector<Point>> polylines;
  Grid2D grid;

  std::size_t total_points() const {
    std::size_t n = 0;
    for (const auto& p : polylines) n += p.size();
    return n;
  }
};

// Fitted asymptotic ray of the zero set. The line is stored in the
// ray's own rotated frame: direction nu = (cos theta, sin theta) and
// perpendicular offset c, i.e. {t nu + c n} with n = (-sin, cos).
struct EndRay {
  double theta = 0.0;       // outward direction, in [0, 2pi)
  double offset = 0.0;      // perpendicular offset from the origin
  double rms = 0.0;
  double r_lo = 0.0, r_hi = 0.0;
  int npoints = 0;

  Point nu() const { return {std::cos(theta), std::sin(theta)}; }
  // y = tan(theta) x + A form; blows up for near-vertical rays
  double intercept() const { return offset / std::cos(theta); }
};

namespace detail {

// edge keys for stitching: horizontal edge (i,j) joins nodes (i,j) and
// (i+1,j); vertical joins (i,j) and (i,j+1)
inline std::int64_t hkey(int i, int j, int nx) {
  return static_cast<std::int64_t>(j) * nx + i;
}
inline std::int64_t vkey(int i, int j, int nx) {
  return (static_cast<std::int64_t>(1) << 40) +
         static_cast<std::int64_t>(j) * nx + i;
}

}  // namespace detail

// Marching squares with linear edge interpolation; ambiguous cells are
// resolved by the sign of the cell-center average. Segments are
// stitched into open or closed polylines.
inline ZeroSet extract_zero_set(const Field2D& f) {
  const auto& g = f.grid;
  for (double v : f.values)
    if (!std::isfinite(v))
      throw Error(ErrorKind::InvalidInput, "field has non-finite values");

  std::map<std::int64_t, Point> pts;
  std::map<std::int64_t, std::vector<std::int64_t>> adj;
  auto link = [&](std::int64_t a, std::int64_t b) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  };
  auto edge_point = [&](double x0, double y0, double x1, double y1, double u0,
                        double u1) -> Point {
    const double t = u0 / (u0 - u1);
    return {x0 + t * (x1 - x0), y0 + t * (y1 - y0)};
  };

  for (int j = 0; j + 1 < g.ny; ++j) {
    for (int i = 0; i + 1 < g.nx; ++i) {
      const double ua = f.at(i, j), ub = f.at(i + 1, j);
      const double uc = f.at(i + 1, j + 1), ud = f.at(i, j + 1);
      const bool sa = ua >= 0, sb = ub >= 0, sc = uc >= 0, sd = ud >= 0;
      if (sa == sb && sb == sc && sc == sd) continue;
      const double xa = g.x(i), xb = g.x(i + 1), ya = g.y(j), yb = g.y(j + 1);

      std::vector<std::int64_t> crossings;
      auto add = [&](bool crossed, std::int64_t key, Point pt) {
        if (!crossed) return;
        pts[key] = pt;
        crossings.push_back(key);
      };
      const auto kb = detail::hkey(i, j, g.nx);      // bottom
      const auto kt = detail::hkey(i, j + 1, g.nx);  // top
      const auto kl = detail::vkey(i, j, g.nx);      // left
      const auto kr = detail::vkey(i + 1, j, g.nx);  // right
      add(sa != sb, kb, edge_point(xa, ya, xb, ya, ua, ub));
      add(sb != sc, kr, edge_point(xb, ya, xb, yb, ub, uc));
      add(sd != sc, kt, edge_point(xa, yb, xb, yb, ud, uc));
      add(sa != sd, kl, edge_point(xa, ya, xa, yb, ua, ud));

      if (crossings.size() == 2) {
        link(crossings[0], crossings[1]);
      } else if (crossings.size() == 4) {
        const bool center_pos = (ua + ub + uc + ud) >= 0;
        if (center_pos == sa) {
          link(kb, kr);  // isolate corners b and d
          link(kt, kl);
        } else {
          link(kb, kl);  // isolate corners a and c
          link(kt, kr);
        }
      }
    }
  }

  ZeroSet z;
  z.grid = g;
  std::map<std::int64_t, bool> used;
  auto walk = [&](std::int64_t start) {
    std::vector<Point> poly;
    std::int64_t prev = -1, cur = start;
    while (true) {
      used[cur] = true;
      poly.push_back(pts[cur]);
      std::int64_t next = -1;
      for (auto nb : adj[cur])
        if (nb != prev && !used[nb]) {
          next = nb;
          break;
        }
      if (next < 0) {
        // close the loop explicitly when we came around
        for (auto nb : adj[cur])
          if (nb == start && poly.size() > 2) poly.push_back(pts[start]);
        break;
      }
      prev = cur;
      cur = next;
    }
    return poly;
  };
  for (const auto& [key, nbrs] : adj)
    if (nbrs.size() == 1 && !used[key]) z.polylines.push_back(walk(key));
  for (const auto& [key, nbrs] : adj)
    if (!used[key]) z.polylines.push_back(walk(key));
  return z;
}

inline Point zero_set_centroid(const ZeroSet& z) {
  double sx = 0, sy = 0;
  std::size_t n = 0;
  for (const auto& poly : z.polylines)
    for (const auto& q : poly) {
      sx += q.x;
      sy += q.y;
      ++n;
    }
  if (n == 0) return {0.0, 0.0};
  return {sx / static_cast<double>(n), sy / static_cast<double>(n)};
}

// Total-least-squares ray fits over the annulus r_min < r < r_max about
// `center` (default: centroid of the zero set). Clusters are contiguous
// polyline runs inside the annulus, merged when their mean directions
// agree within 5 degrees.
inline std::vector<EndRay> fit_ends(const ZeroSet& z, double r_min, double r_max,
                                    std::optional<Point> center_opt = {}) {
  if (!(r_max > r_min) || !(r_min >= 0.0))
    throw Error(ErrorKind::InvalidInput, "fit_ends needs 0 <= r_min < r_max");
  const Point center = center_opt.value_or(zero_set_centroid(z));

  std::vector<std::vector<Point>> clusters;
  for (const auto& poly : z.polylines) {
    std::vector<Point> run;
    auto flush = [&]() {
      if (run.size() >= 3) clusters.push_back(run);
      run.clear();
    };
    for (const auto& q : poly) {
      const double r = std::hypot(q.x - center.x, q.y - center.y);
      if (r > r_min && r < r_max)
        run.push_back(q);
      else
        flush();
    }
    flush();
  }

  auto mean_dir = [&](const std::vector<Point>& c) {
    double sx = 0, sy = 0;
    for (const auto& q : c) {
      const double r = std::hypot(q.x - center.x, q.y - center.y);
      sx += (q.x - center.x) / r;
      sy += (q.y - center.y) / r;
    }
    return std::atan2(sy, sx);
  };

  // merge angularly coincident runs (the same end crossed the annulus
  // through several polyline fragments)
  bool merged = true;
  while (merged) {
    merged = false;
    for (std::size_t a = 0; a < clusters.size() && !merged; ++a)
      for (std::size_t b = a + 1; b < clusters.size() && !merged; ++b)
        if (std::abs(wrap_signed(mean_dir(clusters[a]) - mean_dir(clusters[b]))) <
            deg2rad(5.0)) {
          clusters[a].insert(clusters[a].end(), clusters[b].begin(),
                             clusters[b].end());
          clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(b));
          merged = true;
        }
  }

  std::vector<EndRay> ends;
  for (const auto& c : clusters) {
    // angular width guard: a blob wider than pi/2 is not a separated end
    const double dir = mean_dir(c);
    double width = 0.0;
    for (const auto& q : c)
      width = std::max(width, 2.0 * std::abs(wrap_signed(
                                  std::atan2(q.y - center.y, q.x - center.x) - dir)));
    if (width > kPi / 2.0)
      throw Error(ErrorKind::Structural,
                  "level-set cluster spans more than pi/2; ends are not "
                  "separated, enlarge r_min");

    double mx = 0, my = 0;
    for (const auto& q : c) {
      mx += q.x;
      my += q.y;
    }
    mx /= static_cast<double>(c.size());
    my /= static_cast<double>(c.size());
    double sxx = 0, sxy = 0, syy = 0;
    for (const auto& q : c) {
      sxx += (q.x - mx) * (q.x - mx);
      sxy += (q.x - mx) * (q.y - my);
      syy += (q.y - my) * (q.y - my);
    }
    // principal axis of the 2x2 scatter (orthogonal regression)
    const double ang = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
    double vx = std::cos(ang), vy = std::sin(ang);
    if (vx * (mx - center.x) + vy * (my - center.y) < 0.0) {
      vx = -vx;
      vy = -vy;
    }
    EndRay ray;
    ray.theta = wrap_angle(std::atan2(vy, vx));
    const double nx = -vy, ny = vx;
    ray.offset = nx * mx + ny * my;
    double ss = 0.0;
    ray.r_lo = 1e300;
    for (const auto& q : c) {
      const double d = nx * q.x + ny * q.y - ray.offset;
      ss += d * d;
      const double r = std::hypot(q.x - center.x, q.y - center.y);
      ray.r_lo = std::min(ray.r_lo, r);
      ray.r_hi = std::max(ray.r_hi, r);
    }
    ray.rms = std::sqrt(ss / static_cast<double>(c.size()));
    ray.npoints = static_cast<int>(c.size());
    ends.push_back(ray);
  }
  std::sort(ends.begin(), ends.end(),
            [](const EndRay& a, const EndRay& b) { return a.theta < b.theta; });
  return ends;
}

// Euclidean norm of the sum of the end directions (Eq-level balance).
inline double balance_defect(const std::vector<EndRay>& ends) {
  if (ends.size() < 2)
    throw Error(ErrorKind::Structural, "balance needs at least two ends");
  double sx = 0, sy = 0;
  for (const auto& e : ends) {
    sx += std::cos(e.theta);
    sy += std::sin(e.theta);
  }
  return std::hypot(sx, sy);
}

// The balance identity probed on a grid of rotations: for a genuine
// 2k-end configuration, sum_i sin(theta_i + theta) vanishes for all
// theta.
inline double rotated_balance_defect(const std::vector<EndRay>& ends,
                                     int n_angles = 32) {
  double worst = 0.0;
  for (int k = 0; k < n_angles; ++k) {
    const double th = 2.0 * kPi * k / n_angles;
    double s = 0.0;
    for (const auto& e : ends) s += std::sin(e.theta + th);
    worst = std::max(worst, std::abs(s));
  }
  return worst;
}

struct AngleReport {
  int n_ends = 0;
  std::vector<double> thetas;       // canonical-frame angles, sorted
  double rotation = 0.0;            // applied canonical rotation
  double defect_12 = 0.0;           // |theta1 - (pi - theta2)|
  double defect_13 = 0.0;           // |theta1 - (theta3 - pi)|
  double contact_angle = 0.0;       // Theta = 2 theta1
  double antipodality = 0.0;        // 2-end case: |theta2 - theta1 - pi|
};

// Canonical rotation puts the bisector of the two ends nearest the +x
// axis on that axis; four-end relations are evaluated in this frame.
inline AngleReport angle_relations(const std::vector<EndRay>& ends) {
  AngleReport rep;
  rep.n_ends = static_cast<int>(ends.size());
  if (ends.size() == 2) {
    rep.antipodality = std::abs(wrap_signed(ends[1].theta - ends[0].theta - kPi));
    for (const auto& e : ends) rep.thetas.push_back(e.theta);
    return rep;
  }
  if (ends.size() != 4)
    throw Error(ErrorKind::Structural,
                "angle relations need exactly 2 or 4 ends");

  // the two ends with the smallest |signed angle| straddle the +x axis
  std::vector<std::size_t> order{0, 1, 2, 3};
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(wrap_signed(ends[a].theta)) < std::abs(wrap_signed(ends[b].theta));
  });
  const double a0 = wrap_signed(ends[order[0]].theta);
  const double a1 = wrap_signed(ends[order[1]].theta);
  rep.rotation = -0.5 * (a0 + a1);
  for (const auto& e : ends) rep.thetas.push_back(wrap_angle(e.theta + rep.rotation));
  std::sort(rep.thetas.begin(), rep.thetas.end());
  const double t1 = rep.thetas[0], t2 = rep.thetas[1], t3 = rep.thetas[2];
  rep.defect_12 = std::abs(t1 - (kPi - t2));
  rep.defect_13 = std::abs(t1 - (t3 - kPi));
  rep.contact_angle = 2.0 * t1;
  return rep;
}

struct SymmetryReport {
  double y_mirror_defect = 0.0;  // max |u(x,y) - u(x, 2cy - y)|
  double x_mirror_defect = 0.0;  // max |u(x,y) - u(2cx - x, y)|
  double min_ux = 0.0;           // most negative u_x on {x > cx + 2h}
  double max_uy = 0.0;           // most positive u_y on the first quadrant
};

// Mirror defects about `center` over the common subgrid (bilinear when
// the center is off-grid) plus the Thm-1.2-style monotonicity defects.
inline SymmetryReport symmetry_report(const Field2D& f, const Potential& p,
                                      Point center) {
  SymmetryReport rep;
  rep.min_ux = 1e300;
  rep.max_uy = -1e300;
  const auto& g = f.grid;
  const Window w = interior_window(f, p);
  const double dx = 2.0 * g.hx, dy = 2.0 * g.hy;
  for (int j = 1; j < g.ny - 1; ++j) {
    for (int i = 1; i < g.nx - 1; ++i) {
      const double x = g.x(i), y = g.y(j);
      const double ry = 2.0 * center.y - y;
      if (ry >= g.y0 && ry <= g.y_max())
        rep.y_mirror_defect =
            std::max(rep.y_mirror_defect, std::abs(f.at(i, j) - f.interp(x, ry)));
      const double rx = 2.0 * center.x - x;
      if (rx >= g.x0 && rx <= g.x_max())
        rep.x_mirror_defect =
            std::max(rep.x_mirror_defect, std::abs(f.at(i, j) - f.interp(rx, y)));
      if (!w.contains(x, y)) continue;
      if (x > center.x + dx) rep.min_ux = std::min(rep.min_ux, f.grad_x(i, j));
      if (x > center.x + dx && y > center.y + dy)
        rep.max_uy = std::max(rep.max_uy, f.grad_y(i, j));
    }
  }
  if (rep.min_ux > 1e299) rep.min_ux = 0.0;
  if (rep.max_uy < -1e299) rep.max_uy = 0.0;
  return rep;
}

}  // namespace ac2
