#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ac2/common.hpp"
#include "ac2/grid.hpp"
#include "ac2/potential.hpp"
#include "ac2/profile1d.hpp"

namespace ac2 {

// Planar interface: u = g(x cos(theta) - y sin(theta) - offset).
// theta = 0 gives the vertical interface x = offset, theta = pi/2 the
// horizontal one with u -> 1 below.
struct PlanarSpec {
  double theta = 0.0;
  double offset = 0.0;
};

// Four ends at angles {theta, pi-theta, pi+theta, 2pi-theta}; offsets
// are the perpendicular offsets of each end ray's line.
struct FourEndSpec {
  double theta = kPi / 4.0;  // half contact angle, in (0, pi/2)
  std::array<double, 4> offsets{0.0, 0.0, 0.0, 0.0};
};

// General 2k-end configuration: (theta_i, perpendicular offset c_i),
// angles strictly increasing in [0, 2pi).
struct MultiEndSpec {
  std::vector<std::pair<double, double>> ends;
};

// Half plane x >= 0 with a mirror (Neumann) edge at x = 0 and two
// level-set branches opening along +x at polar angles +-theta.
struct HalfPlaneSpec {
  double theta = kPi / 4.0;
  double offset = 0.0;  // perpendicular offset of the upper branch line
};

using BoundarySpec = std::variant<PlanarSpec, FourEndSpec, MultiEndSpec, HalfPlaneSpec>;

namespace detail {

// One full interface line, {t*(cos a, sin a) + c*(-sin a, cos a)}.
struct AnsatzLine {
  double angle;
  double offset;
  double signed_distance(double x, double y) const {
    return -x * std::sin(angle) + y * std::cos(angle) - offset;
  }
};

inline std::vector<std::pair<double, double>> end_list(const BoundarySpec& spec) {
  std::vector<std::pair<double, double>> ends;
  if (const auto* f = std::get_if<FourEndSpec>(&spec)) {
    ends = {{f->theta, f->offsets[0]},
            {kPi - f->theta, f->offsets[1]},
            {kPi + f->theta, f->offsets[2]},
            {2.0 * kPi - f->theta, f->offsets[3]}};
  } else if (const auto* m = std::get_if<MultiEndSpec>(&spec)) {
    ends = m->ends;
  } else if (const auto* hp = std::get_if<HalfPlaneSpec>(&spec)) {
    ends = {{hp->theta, hp->offset}, {2.0 * kPi - hp->theta, -hp->offset}};
  }
  return ends;
}

// Pair antipodal ends into full lines; an unpaired end keeps its own
// line. Lines carry the representative angle in [0, pi).
inline std::vector<AnsatzLine> ansatz_lines(const BoundarySpec& spec) {
  std::vector<AnsatzLine> lines;
  if (const auto* pl = std::get_if<PlanarSpec>(&spec)) {
    // signed distance x cos(theta) - y sin(theta) - offset corresponds
    // to a line with tangent angle -(theta + pi/2)
    lines.push_back({-pl->theta - kPi / 2.0, pl->offset});
    return lines;
  }
  if (const auto* hp = std::get_if<HalfPlaneSpec>(&spec)) {
    lines.push_back({hp->theta, hp->offset});
    lines.push_back({-hp->theta, -hp->offset});
    return lines;
  }
  auto ends = end_list(spec);
  std::vector<bool> used(ends.size(), false);
  for (std::size_t i = 0; i < ends.size(); ++i) {
    if (used[i]) continue;
    used[i] = true;
    AnsatzLine line{ends[i].first, ends[i].second};
    for (std::size_t j = i + 1; j < ends.size(); ++j) {
      if (used[j]) continue;
      const bool antipodal =
          std::abs(wrap_signed(ends[j].first - ends[i].first - kPi)) < 1e-9;
      const bool colinear = std::abs(ends[j].second + ends[i].second) < 1e-9;
      if (antipodal && colinear) {
        used[j] = true;
        break;
      }
    }
    lines.push_back(line);
  }
  return lines;
}

}  // namespace detail

// Structural validation of a boundary configuration (Config errors).
inline void validate_boundary(const BoundarySpec& spec, double balance_tol = 0.05) {
  if (const auto* f = std::get_if<FourEndSpec>(&spec)) {
    if (!(f->theta > 0.0 && f->theta < kPi / 2.0))
      throw Error(ErrorKind::Config, "fourend half contact angle must lie in (0, pi/2)");
    return;
  }
  if (const auto* hp = std::get_if<HalfPlaneSpec>(&spec)) {
    if (!(hp->theta > 0.0 && hp->theta < kPi / 2.0))
      throw Error(ErrorKind::Config, "halfplane branch angle must lie in (0, pi/2)");
    return;
  }
  if (const auto* m = std::get_if<MultiEndSpec>(&spec)) {
    const auto& ends = m->ends;
    if (ends.size() < 2)
      throw Error(ErrorKind::Config, "multiend needs at least two ends");
    for (std::size_t i = 0; i < ends.size(); ++i) {
      const double a = ends[i].first;
      if (!(a >= 0.0 && a < 2.0 * kPi))
        throw Error(ErrorKind::Config, "multiend angles must lie in [0, 2pi)");
      if (i > 0 && !(a > ends[i - 1].first))
        throw Error(ErrorKind::Config, "multiend angles must be strictly increasing");
    }
    for (std::size_t i = 0; i < ends.size(); ++i) {
      const double gap = (i + 1 < ends.size())
                             ? ends[i + 1].first - ends[i].first
                             : ends[0].first + 2.0 * kPi - ends[i].first;
      if (!(gap < kPi))
        throw Error(ErrorKind::Config, "adjacent end sector width must be < pi");
    }
    double sx = 0.0, sy = 0.0;
    for (const auto& [a, c] : ends) {
      sx += std::cos(a);
      sy += std::sin(a);
    }
    if (std::hypot(sx, sy) > balance_tol) {
      std::ostringstream os;
      os << "multiend directions violate the balance condition: |sum nu| = "
         << std::hypot(sx, sy) << " > " << balance_tol;
      throw Error(ErrorKind::Config, os.str());
    }
  }
}

// Far-field ansatz: signed product of 1D layers over the interface
// lines, normalized so the sector containing the +x axis tends to +1.
class Ansatz {
 public:
  Ansatz(const BoundarySpec& spec, const Profile1D& prof)
      : lines_(detail::ansatz_lines(spec)), prof_(&prof) {
    if (std::holds_alternative<PlanarSpec>(spec)) {
      sign_ = 1.0;  // a planar layer is g(d) verbatim, no sector rule
      return;
    }
    // sector containing angle 0: asymptotic sign of the raw product is
    // prod_l sign(sin(phi - angle_l)) along direction phi
    double phi = 0.0;
    const auto ends = detail::end_list(spec);
    if (!ends.empty()) {
      // bisector of the angular sector around the +x axis
      double below = -2.0 * kPi, above = 2.0 * kPi;
      for (const auto& [a, c] : ends) {
        const double w = wrap_signed(a);
        if (w <= 0.0 && w > below) below = w;
        if (w >= 0.0 && w < above) above = w;
      }
      if (below > -2.0 * kPi && above < 2.0 * kPi) phi = 0.5 * (below + above);
    }
    double sgn = 1.0;
    for (const auto& l : lines_) {
      const double s = std::sin(phi - l.angle);
      sgn *= (s >= 0.0) ? 1.0 : -1.0;
    }
    sign_ = sgn;
  }

  double operator()(double x, double y) const {
    double v = sign_;
    for (const auto& l : lines_) v *= (*prof_)(l.signed_distance(x, y));
    return std::clamp(v, -1.0, 1.0);
  }

  const std::vector<detail::AnsatzLine>& lines() const { return lines_; }

 private:
  std::vector<detail::AnsatzLine> lines_;
  const Profile1D* prof_;
  double sign_;
};

// Margin rule: pairwise intersections of distinct interface lines must
// stay >= 5 interface widths away from every domain edge.
inline void check_geometry(const BoundarySpec& spec, const Grid2D& grid,
                           const Potential& p) {
  const auto lines = detail::ansatz_lines(spec);
  const bool mirror_left = std::holds_alternative<HalfPlaneSpec>(spec);
  const double w = p.interface_width();
  const double margin = 5.0 * w;
  for (std::size_t a = 0; a < lines.size(); ++a) {
    for (std::size_t b = a + 1; b < lines.size(); ++b) {
      const double ca = std::cos(lines[a].angle), sa = std::sin(lines[a].angle);
      const double cb = std::cos(lines[b].angle), sb = std::sin(lines[b].angle);
      const double det = -sa * cb + ca * sb;  // cross of the two normals
      if (std::abs(det) < 1e-12) continue;    // parallel lines
      // solve  -x sa + y ca = oa ;  -x sb + y cb = ob
      const double oa = lines[a].offset, ob = lines[b].offset;
      const double xi = (oa * cb - ob * ca) / det;
      const double yi = (oa * sb - ob * sa) / det;
      if (mirror_left && xi <= grid.x0 + 1e-12)
        continue;  // virtual junction behind the mirror edge
      double d_edge = std::min(std::min(grid.x_max() - xi, yi - grid.y0),
                               grid.y_max() - yi);
      if (!mirror_left) d_edge = std::min(d_edge, xi - grid.x0);
      if (d_edge < margin) {
        std::ostringstream os;
        os << "interface junction at (" << xi << ", " << yi << ") is " << d_edge
           << " from the domain edge; need >= 5 interface widths (" << margin
           << ")";
        throw Error(ErrorKind::Geometry, os.str());
      }
    }
  }
  const double lx = std::min(grid.x_max() - grid.x0, grid.y_max() - grid.y0);
  double max_off = 0.0;
  for (const auto& l : lines) max_off = std::max(max_off, std::abs(l.offset));
  if (lx < 6.0 * w + max_off) {
    std::ostringstream os;
    os << "domain extent " << lx << " violates the margin rule min(Lx,Ly) >= "
       << 6.0 * w + max_off;
    throw Error(ErrorKind::Geometry, os.str());
  }
}

// Dirichlet data on the grid edges from the far-field ansatz.
inline std::vector<double> build_boundary(const BoundarySpec& spec,
                                          const Grid2D& grid,
                                          const Profile1D& prof,
                                          const Potential& p) {
  validate_boundary(spec);
  check_geometry(spec, grid, p);
  Ansatz ansatz(spec, prof);
  std::vector<double> edge(static_cast<std::size_t>(grid.nx) * grid.ny, 0.0);
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i)
      if (i == 0 || j == 0 || i == grid.nx - 1 || j == grid.ny - 1)
        edge[static_cast<std::size_t>(j) * grid.nx + i] = ansatz(grid.x(i), grid.y(j));
  return edge;
}

// For an unequal-angle four-end structure (and its half-plane mirror) the
// nodal curves do not cross: they reconnect near the junction with a neck
// 2b, opening toward the wider sector pair. The neck equilibrium balances
// curvature t^2/b against the interface attraction ~ C exp(-2 sqrt(2) b),
// giving b ~ ln(C / tan^2) / (2 sqrt(2)). The reconnected solution is an
// index-1 critical point: gradient flow either pinches the narrow wedges
// or blows the neck open, so these configurations are solved by Newton
// directly from this guess.
inline double junction_neck(double theta, const Potential& p) {
  const double t = std::tan(std::min(theta, kPi / 2.0 - theta));
  const double nu = p.decay_rate();
  return std::max(0.5 * std::sqrt(2.0) / nu, std::log(17.5 / (t * t)) / (2.0 * nu));
}

// Overwrite the interior iterate with the reconnected-curve product
//   u = g(s_below_upper) * g(s_above_lower),  curves y = +-sqrt(x^2 t^2 + b^2)
// (axes swapped and sign flipped for theta > pi/4). Boundary rows are
// left untouched. Valid for the centered symmetric junction only.
inline void apply_junction_guess(Field2D& f, const Profile1D& prof, double theta,
                                 double neck) {
  if (!(theta > 0.0 && theta < kPi / 2.0))
    throw Error(ErrorKind::Config, "junction guess needs theta in (0, pi/2)");
  const bool flip = theta > kPi / 4.0;
  const double t = std::tan(flip ? kPi / 2.0 - theta : theta);
  const int i_lo = f.neumann_left ? 0 : 1;
  for (int j = 1; j < f.grid.ny - 1; ++j)
    for (int i = i_lo; i < f.grid.nx - 1; ++i) {
      double x = f.grid.x(i), y = f.grid.y(j);
      if (flip) std::swap(x, y);
      const double yc = std::sqrt(x * x * t * t + neck * neck);
      const double c = std::cos(std::atan(std::abs(x) * t * t / yc));
      const double v = prof((yc - y) * c) * prof((y + yc) * c);
      f.at(i, j) = flip ? -v : v;
    }
}

// Full-grid initial iterate from the same ansatz.
inline Field2D initial_field(const BoundarySpec& spec, const Grid2D& grid,
                             const Profile1D& prof, const Potential& p) {
  validate_boundary(spec);
  check_geometry(spec, grid, p);
  Ansatz ansatz(spec, prof);
  Field2D f;
  f.grid = grid;
  f.potential_id = p.id();
  f.neumann_left = std::holds_alternative<HalfPlaneSpec>(spec);
  f.values.resize(static_cast<std::size_t>(grid.nx) * grid.ny);
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) f.at(i, j) = ansatz(grid.x(i), grid.y(j));
  return f;
}

}  // namespace ac2
