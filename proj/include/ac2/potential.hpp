#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ac2/common.hpp"

namespace ac2 {

namespace detail {

// Cubic spline on a strictly increasing abscissa grid, clamped to zero
// slope at both ends (the double-well requires F'(-1)=F'(1)=0).
class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(std::vector<double> xs, std::vector<double> ys)
      : x_(std::move(xs)), y_(std::move(ys)) {
    const std::size_t n = x_.size();
    if (n < 4 || y_.size() != n)
      throw Error(ErrorKind::InvalidInput, "spline needs >= 4 samples");
    for (std::size_t i = 1; i < n; ++i)
      if (!(x_[i] > x_[i - 1]))
        throw Error(ErrorKind::InvalidInput, "spline abscissas not increasing");
    m_.assign(n, 0.0);
    std::vector<double> a(n, 0.0), b(n, 0.0), c(n, 0.0), d(n, 0.0);
    const double h0 = x_[1] - x_[0];
    const double hn = x_[n - 1] - x_[n - 2];
    b[0] = h0 / 3.0;
    c[0] = h0 / 6.0;
    d[0] = (y_[1] - y_[0]) / h0;
    a[n - 1] = hn / 6.0;
    b[n - 1] = hn / 3.0;
    d[n - 1] = -(y_[n - 1] - y_[n - 2]) / hn;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double hl = x_[i] - x_[i - 1];
      const double hr = x_[i + 1] - x_[i];
      a[i] = hl / 6.0;
      b[i] = (hl + hr) / 3.0;
      c[i] = hr / 6.0;
      d[i] = (y_[i + 1] - y_[i]) / hr - (y_[i] - y_[i - 1]) / hl;
    }
    // Thomas algorithm
    for (std::size_t i = 1; i < n; ++i) {
      const double w = a[i] / b[i - 1];
      b[i] -= w * c[i - 1];
      d[i] -= w * d[i - 1];
    }
    m_[n - 1] = d[n - 1] / b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) m_[i] = (d[i] - c[i] * m_[i + 1]) / b[i];
  }

  double eval(double x, int order = 0) const {
    const std::size_t n = x_.size();
    x = std::clamp(x, x_.front(), x_.back());
    std::size_t k = static_cast<std::size_t>(
        std::upper_bound(x_.begin(), x_.end(), x) - x_.begin());
    k = std::clamp<std::size_t>(k, 1, n - 1);
    const double h = x_[k] - x_[k - 1];
    const double t = (x_[k] - x) / h;
    const double s = (x - x_[k - 1]) / h;
    switch (order) {
      case 0:
        return t * y_[k - 1] + s * y_[k] +
               ((t * t * t - t) * m_[k - 1] + (s * s * s - s) * m_[k]) * h * h /
                   6.0;
      case 1:
        return (y_[k] - y_[k - 1]) / h +
               (-(3.0 * t * t - 1.0) * m_[k - 1] + (3.0 * s * s - 1.0) * m_[k]) *
                   h / 6.0;
      case 2:
        return t * m_[k - 1] + s * m_[k];
      default:
        throw Error(ErrorKind::InvalidInput, "spline order must be 0..2");
    }
  }

  bool empty() const { return x_.empty(); }

 private:
  std::vector<double> x_, y_, m_;
};

// Adaptive Simpson with absolute tolerance and a recursion cap.
struct SimpsonResult {
  double value = 0.0;
  double err_estimate = 0.0;
  bool converged = true;
};

inline void adaptive_simpson(const std::function<double(double)>& f, double a,
                             double b, double fa, double fm, double fb,
                             double whole, double tol, int depth, int max_depth,
                             SimpsonResult& out) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol || depth >= max_depth) {
    out.value += left + right + delta / 15.0;
    out.err_estimate += std::abs(delta) / 15.0;
    if (depth >= max_depth && std::abs(delta) > 15.0 * tol)
      out.converged = false;
    return;
  }
  adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth + 1, max_depth,
                   out);
  adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth + 1, max_depth,
                   out);
}

inline SimpsonResult integrate(const std::function<double(double)>& f, double a,
                               double b, double tol, int max_depth = 40) {
  SimpsonResult out;
  if (a == b) return out;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 0, max_depth, out);
  return out;
}

}  // namespace detail

enum class PotentialKind { Quartic, Table };

// Balanced double-well potential F on [-1, 1] with F(+-1)=0, two
// nondegenerate minima at +-1 and a single interior critical point t0.
class Potential {
 public:
  static Potential quartic(double scale = 1.0) {
    Potential p;
    p.kind_ = PotentialKind::Quartic;
    p.scale_ = scale;
    p.t0_ = 0.0;
    if (scale == 1.0)
      p.id_ = "quartic";
    else {
      std::ostringstream os;
      os << "quartic*" << scale;
      p.id_ = os.str();
    }
    return p;
  }

  // Tabulated well: samples of F on [-1,1], interpolated by a cubic
  // spline. The caller declares t0; structure is validated on a scan.
  static Potential table(std::vector<double> s, std::vector<double> F,
                         double t0, const std::string& label = "table") {
    Potential p;
    p.kind_ = PotentialKind::Table;
    p.t0_ = t0;
    p.id_ = label;
    if (s.empty() || s.front() != -1.0 || s.back() != 1.0)
      throw Error(ErrorKind::InvalidInput,
                  "table potential must span [-1, 1] exactly");
    p.spline_ = detail::CubicSpline(std::move(s), std::move(F));
    p.validate();
    return p;
  }

  PotentialKind kind() const { return kind_; }
  double zero_crossing() const { return t0_; }
  const std::string& id() const { return id_; }

  // F, F' or F'' at u; u outside [-1,1] is clamped (|u|-1 > 1e-12 is
  // treated as discretization noise, not an error).
  double eval(int order, double u) const {
    if (!std::isfinite(u))
      throw Error(ErrorKind::InvalidInput, "potential evaluated at non-finite u");
    if (order < 0 || order > 2)
      throw Error(ErrorKind::InvalidInput, "potential derivative order must be 0..2");
    u = std::clamp(u, -1.0, 1.0);
    if (kind_ == PotentialKind::Quartic) {
      switch (order) {
        case 0:
          return scale_ * 0.25 * (1.0 - u * u) * (1.0 - u * u);
        case 1:
          return scale_ * (u * u * u - u);
        default:
          return scale_ * (3.0 * u * u - 1.0);
      }
    }
    return spline_.eval(u, order);
  }

  double operator()(double u) const { return eval(0, u); }
  double dF(double u) const { return eval(1, u); }
  double ddF(double u) const { return eval(2, u); }

  // G(t) = int_{-1}^{t} sqrt(2 F) ds by adaptive quadrature.
  double antiderivative(double t, double tol = 1e-10) const {
    if (!std::isfinite(t))
      throw Error(ErrorKind::InvalidInput, "antiderivative at non-finite t");
    t = std::clamp(t, -1.0, 1.0);
    auto integrand = [this](double s) {
      return std::sqrt(std::max(0.0, 2.0 * eval(0, s)));
    };
    auto res = detail::integrate(integrand, -1.0, t, tol);
    if (!res.converged) {
      std::ostringstream os;
      os << "quadrature for G(" << t << ") did not reach tol " << tol
         << "; achieved ~" << res.err_estimate;
      throw Error(ErrorKind::Numerical, os.str());
    }
    return res.value;
  }

  // Interface energy beta = G(1) = int_{-1}^{1} sqrt(2 F).
  double beta() const {
    if (!(beta_cache_ > 0.0)) beta_cache_ = antiderivative(1.0);
    return beta_cache_;
  }

  // Linearized decay rate of 1-|u| away from the interface.
  double decay_rate() const { return std::sqrt(ddF(1.0)); }

  // Width scale of the transition layer; margins are measured in these.
  double interface_width() const { return 1.0 / decay_rate(); }

  double max_ddF() const {
    double m = 0.0;
    for (int i = 0; i <= 200; ++i)
      m = std::max(m, std::abs(ddF(-1.0 + i * 0.01)));
    return m;
  }

 private:
  Potential() = default;

  // 1e4-point structural scan of the double-well conditions.
  void validate() const {
    const int n = 10000;
    if (!(t0_ > -1.0 && t0_ < 1.0))
      throw Error(ErrorKind::InvalidInput, "t0 must lie in (-1, 1)");
    if (std::abs(eval(0, -1.0)) > 1e-9 || std::abs(eval(0, 1.0)) > 1e-9)
      throw Error(ErrorKind::InvalidInput, "F(-1) and F(1) must vanish");
    if (std::abs(eval(1, -1.0)) > 1e-6 || std::abs(eval(1, 1.0)) > 1e-6)
      throw Error(ErrorKind::InvalidInput, "F'(-1) and F'(1) must vanish");
    if (!(eval(2, -1.0) > 0.0) || !(eval(2, 1.0) > 0.0))
      throw Error(ErrorKind::InvalidInput, "wells at -1 and 1 must be nondegenerate");
    for (int i = 1; i < n; ++i) {
      const double u = -1.0 + 2.0 * i / n;
      if (std::abs(u - t0_) < 2.0 / n) continue;
      if (!(eval(0, u) > 0.0))
        throw Error(ErrorKind::InvalidInput, "F must be positive inside (-1, 1)");
      const double d = eval(1, u);
      if (u < t0_ && d <= 0.0)
        throw Error(ErrorKind::InvalidInput, "F' must be positive on (-1, t0)");
      if (u > t0_ && d >= 0.0)
        throw Error(ErrorKind::InvalidInput, "F' must be negative on (t0, 1)");
    }
  }

  PotentialKind kind_ = PotentialKind::Quartic;
  double scale_ = 1.0;
  double t0_ = 0.0;
  std::string id_ = "quartic";
  detail::CubicSpline spline_;
  mutable double beta_cache_ = -1.0;
};

}  // namespace ac2
