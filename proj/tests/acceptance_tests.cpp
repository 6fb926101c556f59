#include <catch2/catch_amalgamated.hpp>
#include <array>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "ac2/scenario.hpp"

using namespace ac2;

namespace {

constexpr double kBetaExact = 0.94280904158206336587;  // 2*sqrt(2)/3

const Potential& quartic() {
  static const Potential p = Potential::quartic();
  return p;
}

const Profile1D& profile() {
  static const Profile1D g = solve_profile(quartic(), 12.0, 0.01);
  return g;
}

// Four-end solve; off-right-angle configurations are index-1 saddles of
// the energy (the neck mode), so they get a topology-matching initial
// guess and skip the gradient-flow stage entirely.
Field2D solve_fourend(double theta_deg, double lx, double ly, double h,
                      std::array<double, 4> offsets = {0, 0, 0, 0}) {
  const FourEndSpec spec{deg2rad(theta_deg), offsets};
  Field2D f0 =
      initial_field(spec, Grid2D::centered(lx, ly, h, h), profile(), quartic());
  SolveConfig cfg;
  if (std::abs(theta_deg - 45.0) > 1e-9) {
    apply_junction_guess(f0, profile(), spec.theta,
                         junction_neck(spec.theta, quartic()));
    cfg.newton_switch = 1e300;
  }
  return relax(std::move(f0), quartic(), cfg);
}

// shared across criteria 4, 5, 6, 7, 9, 11 (grid 401 x 401, h = 0.05)
const Field2D& saddle10() {
  static const Field2D f = solve_fourend(45.0, 10.0, 10.0, 0.05);
  return f;
}

// shared across criteria 8 and 12
const Field2D& saddle21() {
  static const Field2D f = solve_fourend(45.0, 21.0, 21.0, 0.1);
  return f;
}

void verdict(int id, const std::string& name, bool pass,
             const std::string& detail) {
  std::cout << "criterion " << std::setw(2) << id << " [" << name << "] "
            << (pass ? "PASS" : "FAIL") << "  " << detail << std::endl;
  INFO(name << ": " << detail);
  CHECK(pass);
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(4) << v;
  return os.str();
}

double tail_mean(const EnergyCurve& c, int n) {
  double s = 0.0;
  for (int k = 0; k < n; ++k)
    s += c.energy_per_r[c.energy_per_r.size() - 1 - static_cast<std::size_t>(k)];
  return s / n;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) v[static_cast<std::size_t>(k)] = a + (b - a) * k / (n - 1);
  return v;
}

struct LineFit {
  double slope, intercept, rms;
  int n;
};

// least-squares y = a x + b over the polyline points with x >= x_min
LineFit fit_branch(const std::vector<Point>& poly, double x_min) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& q : poly)
    if (q.x >= x_min) {
      sx += q.x;
      sy += q.y;
      sxx += q.x * q.x;
      sxy += q.x * q.y;
      ++n;
    }
  if (n < 10) throw Error(ErrorKind::InsufficientData, "branch too short to fit");
  const double a = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double b = (sy - a * sx) / n;
  double ss = 0;
  for (const auto& q : poly)
    if (q.x >= x_min) {
      const double e = q.y - (a * q.x + b);
      ss += e * e;
    }
  return {a, b, std::sqrt(ss / n), n};
}

}  // namespace

TEST_CASE("criterion 1: potential energy constant beta") {
  const double err = std::abs(quartic().beta() - kBetaExact);
  verdict(1, "beta quadrature", err <= 1e-8, "|beta - 2sqrt(2)/3| = " + fmt(err));
}

TEST_CASE("criterion 2: 1d transition layer") {
  const auto& g = profile();
  double max_err = 0.0;
  for (std::size_t k = 0; k < g.s.size(); ++k)
    max_err = std::max(max_err, std::abs(g.g[k] - std::tanh(g.s[k] / std::sqrt(2.0))));
  const double e_err = std::abs(energy_1d(g, quartic()) - quartic().beta());
  const double eq = equipartition_residual(g, quartic());
  verdict(2, "1d profile",
          max_err <= 1e-4 && e_err <= 5e-4 && eq <= 5e-4,
          "max|g - tanh(s/sqrt2)| = " + fmt(max_err) + ", |E1d - beta| = " +
              fmt(e_err) + ", equipartition = " + fmt(eq));
}

TEST_CASE("criterion 3: planar flux law") {
  const double beta = quartic().beta();
  struct Row {
    double deg, lx, ly, h;
  };
  // phi = 0 carries an absolute 1e-3*beta bar, so it gets the finer grid
  const Row rows[] = {{0, 9, 6, 0.025},
                      {30, 5, 10, 0.05},
                      {45, 5, 8, 0.05},
                      {60, 5, 7, 0.05},
                      {90, 5, 6, 0.05}};
  bool pass = true;
  std::string detail;
  for (const auto& r : rows) {
    Field2D f0 = initial_field(PlanarSpec{deg2rad(r.deg), 0.0},
                               Grid2D::centered(r.lx, r.ly, r.h, r.h),
                               profile(), quartic());
    const Field2D f = relax(std::move(f0), quartic(), {});
    const double rho = hamiltonian_profile(f, quartic(), 0.0).reference;
    const double want = beta * std::sin(deg2rad(r.deg));
    const double tol = r.deg == 0.0 ? 1e-3 * beta : 0.01 * want;
    pass = pass && std::abs(rho - want) <= tol;
    detail += "phi=" + fmt(r.deg) + ": |rho - beta sin| = " +
              fmt(std::abs(rho - want)) + (&r == &rows[4] ? "" : ", ");
  }
  verdict(3, "planar flux", pass, detail);
}

TEST_CASE("criterion 4: hamiltonian constancy on the saddle") {
  const double tol = 5e-3 * quartic().beta();
  const auto h0 = hamiltonian_profile(saddle10(), quartic(), 0.0);
  const auto h1 = hamiltonian_profile(saddle10(), quartic(), kPi / 2.0);
  verdict(4, "hamiltonian constancy",
          h0.max_abs_deviation <= tol && h1.max_abs_deviation <= tol,
          "max dev theta=0: " + fmt(h0.max_abs_deviation) + ", theta=pi/2: " +
              fmt(h1.max_abs_deviation) + ", tol " + fmt(tol));
}

TEST_CASE("criterion 5: vanishing moment and canonical re-centering") {
  const double tol = 2e-3 * quartic().beta();
  const double m0 = moment_profile(saddle10(), quartic(), 41, {0.0, 0.0}).max_abs_value;

  // translate the whole configuration up by 1 via the end-line offsets,
  // then recover the center from the field alone
  const double o = std::cos(kPi / 4.0);
  const Field2D shifted = solve_fourend(45.0, 10.0, 10.0, 0.05, {o, -o, -o, o});
  const Point c = canonical_center(shifted, quartic());
  const double m1 = moment_profile(shifted, quartic(), 41, c).max_abs_value;

  verdict(5, "moment identity",
          m0 <= tol && m1 <= tol && std::abs(c.y - 1.0) <= 0.1 &&
              std::abs(c.x) <= 0.1,
          "centered max|E| = " + fmt(m0) + ", recovered center (" + fmt(c.x) +
              ", " + fmt(c.y) + "), re-centered max|E| = " + fmt(m1));
}

TEST_CASE("criterion 6: modica bound") {
  const double v_coarse = modica_check(saddle10(), quartic()).max_violation;
  const Field2D fine = solve_fourend(45.0, 10.0, 10.0, 0.025);
  const double v_fine = modica_check(fine, quartic()).max_violation;
  const double ratio = v_coarse / v_fine;
  verdict(6, "modica bound",
          v_coarse <= 5e-3 && ratio >= 3.0 && ratio <= 5.5,
          "violation h=0.05: " + fmt(v_coarse) + ", h=0.025: " + fmt(v_fine) +
              ", ratio " + fmt(ratio));
}

TEST_CASE("criterion 7: monotonicity of E_R / R") {
  const double slack = 1e-6 * quartic().beta();
  const auto curve =
      energy_curve(saddle10(), quartic(), linspace(2.0, 9.5, 20), {0.0, 0.0});
  double worst = 0.0;
  for (std::size_t k = 1; k < curve.energy_per_r.size(); ++k)
    worst = std::max(worst, curve.energy_per_r[k - 1] - curve.energy_per_r[k]);
  verdict(7, "energy monotonicity", worst <= slack,
          "worst decrease of E_R/R over 20 radii: " + fmt(worst));
}

TEST_CASE("criterion 8: energy quantization E_R / R -> 4 beta") {
  const double four_beta = 4.0 * quartic().beta();
  const Field2D small = solve_fourend(45.0, 17.5, 17.5, 0.1);
  const auto c_small =
      energy_curve(small, quartic(), linspace(3.0, 16.0, 20), {0.0, 0.0});
  const auto c_big =
      energy_curve(saddle21(), quartic(), linspace(3.0, 19.5, 20), {0.0, 0.0});
  const double m_small = tail_mean(c_small, 5);
  const double m_big = tail_mean(c_big, 5);
  verdict(8, "quantization",
          std::abs(m_big - four_beta) <= 0.1 * four_beta && m_big > m_small &&
              c_big.end_count_estimate == 4,
          "tail mean L=17.5: " + fmt(m_small) + ", L=21: " + fmt(m_big) +
              " (4 beta = " + fmt(four_beta) +
              "), end count " + std::to_string(c_big.end_count_estimate));
}

TEST_CASE("criterion 9: end fitting and balance") {
  const auto ends = fit_ends(extract_zero_set(saddle10()), 5.0, 9.0, Point{0, 0});
  bool angles_ok = ends.size() == 4;
  double worst = 0.0;
  if (angles_ok)
    for (int k = 0; k < 4; ++k) {
      const double want = deg2rad(45.0 + 90.0 * k);
      worst = std::max(worst, std::abs(wrap_signed(ends[static_cast<std::size_t>(k)].theta - want)));
      angles_ok = angles_ok && worst <= deg2rad(1.0);
    }
  const double bal = balance_defect(ends);
  const double rot = rotated_balance_defect(ends);
  verdict(9, "ends and balance", angles_ok && bal <= 0.05 && rot <= 0.05 * 4,
          "worst angle error " + fmt(rad2deg(worst)) + " deg, balance " +
              fmt(bal) + ", theta-grid defect " + fmt(rot));
}

TEST_CASE("criterion 10: contact-angle sweep") {
  // the boundary data pins the nodal rays with zero intercept while the
  // true intercept is O(1), tilting the fitted direction by ~A/L; long
  // domains in the end direction keep that bias inside the 2-degree bar
  struct Row {
    double deg, lx, ly, h, r_lo, r_hi;
  };
  const Row rows[] = {{15, 100, 34, 0.15, 65, 98},
                      {30, 54, 38, 0.15, 40, 60},
                      {45, 14, 14, 0.1, 7, 13},
                      {60, 38, 54, 0.15, 40, 60},
                      {75, 34, 100, 0.15, 65, 98}};
  bool pass = true;
  std::string detail;
  for (const auto& r : rows) {
    const Field2D f = solve_fourend(r.deg, r.lx, r.ly, r.h);
    const auto ends = fit_ends(extract_zero_set(f), r.r_lo, r.r_hi, Point{0, 0});
    if (ends.size() != 4) {
      pass = false;
      detail += "theta=" + fmt(r.deg) + ": " + std::to_string(ends.size()) +
                " ends; ";
      continue;
    }
    const auto rel = angle_relations(ends);
    const double err = std::abs(rad2deg(rel.contact_angle) - 2.0 * r.deg);
    pass = pass && err <= 2.0 && rel.defect_12 <= deg2rad(2.0) &&
           rel.defect_13 <= deg2rad(2.0);
    detail += "theta=" + fmt(r.deg) + ": Theta err " + fmt(err) + " deg" +
              (&r == &rows[4] ? "" : ", ");
  }
  verdict(10, "contact angles", pass, detail);
}

TEST_CASE("criterion 11: emergent symmetry from noisy data") {
  Field2D f0 = initial_field(FourEndSpec{}, Grid2D::centered(10, 10, 0.05, 0.05),
                             profile(), quartic());
  apply_noise(f0, 0.2, 11);
  const Field2D f = relax(std::move(f0), quartic(), {});
  const Point c = canonical_center(f, quartic());
  const auto sym = symmetry_report(f, quartic(), c);
  verdict(11, "emergent symmetry",
          sym.x_mirror_defect <= 1e-3 && sym.y_mirror_defect <= 1e-3,
          "mirror defects " + fmt(sym.x_mirror_defect) + " / " +
              fmt(sym.y_mirror_defect) + " about (" + fmt(c.x) + ", " +
              fmt(c.y) + ")");
}

TEST_CASE("criterion 12: far-field decay rate") {
  const double nu_exact = quartic().decay_rate();  // sqrt(2) for quartic
  Field2D f0 = initial_field(PlanarSpec{kPi / 2.0, 0.0},
                             Grid2D::centered(5, 9, 0.05, 0.05), profile(),
                             quartic());
  const Field2D planar = relax(std::move(f0), quartic(), {});
  const auto fit_p =
      decay_fit(planar, quartic(), extract_zero_set(planar).polylines, 2.0, 7.0);
  // on the saddle the two interfaces superpose at moderate distance, so
  // the fit window starts further out on the larger domain
  const auto fit_s = decay_fit(saddle21(), quartic(),
                               extract_zero_set(saddle21()).polylines, 3.0, 9.0);
  verdict(12, "decay rate",
          std::abs(fit_p.nu - nu_exact) <= 0.05 * nu_exact &&
              std::abs(fit_s.nu - fit_p.nu) <= 0.10 * fit_p.nu,
          "planar nu " + fmt(fit_p.nu) + " (exact " + fmt(nu_exact) +
              "), saddle nu " + fmt(fit_s.nu));
}

TEST_CASE("criterion 13: half-plane configuration") {
  const double h = 0.05;
  const double theta = deg2rad(30.0);
  Field2D f0 = initial_field(HalfPlaneSpec{theta, 0.0},
                             Grid2D::half(13.0, 10.0, h, h), profile(), quartic());
  apply_junction_guess(f0, profile(), theta, junction_neck(theta, quartic()));
  SolveConfig cfg;
  cfg.newton_switch = 1e300;
  const Field2D f = relax(std::move(f0), quartic(), cfg);

  const auto zero = extract_zero_set(f);
  std::vector<LineFit> fits;
  for (const auto& poly : zero.polylines) {
    try {
      fits.push_back(fit_branch(poly, 5.0));
    } catch (const Error&) {
    }
  }
  bool pass = fits.size() == 2;
  std::string detail;
  if (pass) {
    if (fits[0].slope < fits[1].slope) std::swap(fits[0], fits[1]);
    const double anti =
        rad2deg(std::abs(std::atan(fits[0].slope) + std::atan(fits[1].slope)));
    const int j0 = static_cast<int>(std::llround(-f.grid.y0 / f.grid.hy));
    const double far = 1.0 - f.at(f.grid.nx - 1, j0);
    pass = fits[0].rms <= 2.0 * h && fits[1].rms <= 2.0 * h && anti <= 2.0 &&
           std::abs(far) <= 1e-3;
    detail = "branch rms " + fmt(fits[0].rms) + " / " + fmt(fits[1].rms) +
             ", antisymmetry " + fmt(anti) + " deg, 1 - u(far, 0) = " + fmt(far);
  } else {
    detail = std::to_string(fits.size()) + " fitted branches (want 2)";
  }
  verdict(13, "half plane", pass, detail);
}
