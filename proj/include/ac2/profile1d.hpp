#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "ac2/common.hpp"
#include "ac2/potential.hpp"

namespace ac2 {

// Sampled 1D transition layer g on the symmetric grid s = -L..L,
// normalized so the interpolated zero of g sits at s = 0.
struct Profile1D {
  double half_length = 0.0;
  double step = 0.0;
  std::vector<double> s;
  std::vector<double> g;
  std::vector<double> dg;

  int size() const { return static_cast<int>(g.size()); }

  // Cubic (4-point Lagrange) interpolation of g; queries beyond the
  // grid return the end sample, which is within e^{-cL} of +-1.
  double operator()(double q) const {
    const int n = size();
    if (q <= s.front()) return g.front();
    if (q >= s.back()) return g.back();
    int k = static_cast<int>(std::floor((q - s.front()) / step));
    k = std::clamp(k, 1, n - 3);
    const double t = (q - s[k]) / step;  // in [0,1) for the [k, k+1] cell
    const double gm = g[k - 1], g0 = g[k], g1 = g[k + 1], g2 = g[k + 2];
    return g0 +
           t * (0.5 * (g1 - gm) +
                t * (gm - 2.5 * g0 + 2.0 * g1 - 0.5 * g2 +
                     t * (0.5 * (g2 - gm) + 1.5 * (g0 - g1))));
  }

  double derivative(double q) const {
    const int n = size();
    if (q <= s.front() || q >= s.back()) return 0.0;
    int k = static_cast<int>(std::floor((q - s.front()) / step));
    k = std::clamp(k, 0, n - 2);
    const double t = (q - s[k]) / step;
    return (1.0 - t) * dg[k] + t * dg[k + 1];
  }
};

namespace detail {

inline void thomas_solve(std::vector<double>& a, std::vector<double>& b,
                         std::vector<double>& c, std::vector<double>& d) {
  const std::size_t n = b.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double w = a[i] / b[i - 1];
    b[i] -= w * c[i - 1];
    d[i] -= w * d[i - 1];
  }
  d[n - 1] /= b[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) d[i] = (d[i] - c[i] * d[i + 1]) / b[i];
}

inline std::vector<double> centered_derivative(const std::vector<double>& g,
                                               double h) {
  const std::size_t n = g.size();
  std::vector<double> d(n);
  d[0] = (-3.0 * g[0] + 4.0 * g[1] - g[2]) / (2.0 * h);
  d[n - 1] = (3.0 * g[n - 1] - 4.0 * g[n - 2] + g[n - 3]) / (2.0 * h);
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (g[i + 1] - g[i - 1]) / (2.0 * h);
  return d;
}

}  // namespace detail

// Damped-Newton solve of the centered finite-difference system for
// g'' = F'(g) with Dirichlet data at +-L matched to the linearized
// exponential tails, then shifted so that g(0) = 0.
inline Profile1D solve_profile(const Potential& p, double L = 12.0,
                               double h = 0.01, double tol = 1e-10) {
  if (!(L >= 8.0)) throw Error(ErrorKind::InvalidInput, "profile requires L >= 8");
  if (!(h <= 0.05) || !(h > 0.0))
    throw Error(ErrorKind::InvalidInput, "profile requires 0 < h <= 0.05");
  if (!(tol >= 1e-12))
    throw Error(ErrorKind::InvalidInput, "profile requires tol >= 1e-12");

  const int half = static_cast<int>(std::llround(L / h));
  const int n = 2 * half + 1;
  const double hh = h * h;
  const double nu_r = std::sqrt(p.ddF(1.0));
  const double nu_l = std::sqrt(p.ddF(-1.0));
  const double g_right = 1.0 - std::exp(-nu_r * L);
  const double g_left = -1.0 + std::exp(-nu_l * L);

  std::vector<double> s(n), g(n);
  for (int i = 0; i < n; ++i) {
    s[i] = -L + i * h;
    g[i] = std::tanh(0.5 * nu_r * s[i]);
  }
  g.front() = g_left;
  g.back() = g_right;

  auto residual = [&](const std::vector<double>& v, std::vector<double>& r) {
    double rmax = 0.0;
    for (int i = 1; i + 1 < n; ++i) {
      r[i] = (v[i - 1] - 2.0 * v[i] + v[i + 1]) / hh - p.dF(v[i]);
      rmax = std::max(rmax, std::abs(r[i]));
    }
    return rmax;
  };

  std::vector<double> r(n, 0.0), trial(n);
  std::vector<double> history;
  double rmax = residual(g, r);
  int iter = 0;
  const int m = n - 2;  // interior unknowns
  std::vector<double> ja(m), jb(m), jc(m), jd(m);
  while (rmax > tol) {
    if (++iter > 200) {
      std::ostringstream os;
      os << "1D Newton did not converge in 200 iterations; residual history:";
      for (std::size_t k = history.size() > 8 ? history.size() - 8 : 0;
           k < history.size(); ++k)
        os << " " << history[k];
      throw Error(ErrorKind::Solver, os.str());
    }
    for (int i = 0; i < m; ++i) {
      ja[i] = 1.0 / hh;
      jc[i] = 1.0 / hh;
      jb[i] = -2.0 / hh - p.ddF(g[i + 1]);
      jd[i] = -r[i + 1];
    }
    detail::thomas_solve(ja, jb, jc, jd);
    double alpha = 1.0;
    while (true) {
      trial = g;
      for (int i = 0; i < m; ++i) trial[i + 1] += alpha * jd[i];
      const double rt = residual(trial, r);
      if (rt < rmax || alpha < 1e-6) {
        g = trial;
        rmax = rt;
        break;
      }
      alpha *= 0.5;
    }
    history.push_back(rmax);
    // residual() left r holding the accepted iterate's residual
  }

  for (int i = 1; i < n; ++i)
    if (g[i] < g[i - 1] - 1e-10)
      throw Error(ErrorKind::Qualitative, "converged 1D profile is not monotone");

  // normalize: interpolated zero to s = 0
  Profile1D prof;
  prof.half_length = L;
  prof.step = h;
  prof.s = s;
  prof.g = g;
  prof.dg = detail::centered_derivative(g, h);
  int iz = -1;
  for (int i = 0; i + 1 < n; ++i)
    if (g[i] <= 0.0 && g[i + 1] > 0.0) {
      iz = i;
      break;
    }
  if (iz < 0) throw Error(ErrorKind::Qualitative, "1D profile has no zero crossing");
  const double s0 = s[iz] + h * (-g[iz]) / (g[iz + 1] - g[iz]);
  if (std::abs(s0) > 1e-14) {
    std::vector<double> shifted(n);
    for (int i = 0; i < n; ++i) shifted[i] = prof(s[i] + s0);
    prof.g = std::move(shifted);
    prof.g.front() = g_left;
    prof.g.back() = g_right;
    prof.dg = detail::centered_derivative(prof.g, h);
  }
  return prof;
}

// Trapezoid value of int [ (1/2) g'^2 + F(g) ] over [-L, L].
inline double energy_1d(const Profile1D& prof, const Potential& p) {
  const int n = prof.size();
  double e = 0.0;
  for (int i = 0; i < n; ++i) {
    const double gi = prof.g[i];
    if (!std::isfinite(gi))
      throw Error(ErrorKind::InvalidInput, "profile has non-finite samples");
    const double density = 0.5 * prof.dg[i] * prof.dg[i] + p(gi);
    e += (i == 0 || i + 1 == n) ? 0.5 * density : density;
  }
  return e * prof.step;
}

// max_i | (1/2) g'^2 - F(g) |, the first-integral (equipartition) defect
inline double equipartition_residual(const Profile1D& prof, const Potential& p) {
  double m = 0.0;
  for (int i = 0; i < prof.size(); ++i)
    m = std::max(m, std::abs(0.5 * prof.dg[i] * prof.dg[i] - p(prof.g[i])));
  return m;
}

}  // namespace ac2
