#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "ac2/boundary.hpp"
#include "ac2/identities.hpp"
#include "ac2/levelset.hpp"
#include "ac2/potential.hpp"
#include "ac2/profile1d.hpp"
#include "ac2/solver2d.hpp"

using namespace ac2;

namespace {

const Potential& quartic() {
  static Potential p = Potential::quartic();
  return p;
}
const Profile1D& layer() {
  static Profile1D prof = solve_profile(quartic(), 12.0, 0.01);
  return prof;
}

// closed-form planar layer u = tanh((x cos(th) - y sin(th) - c)/sqrt(2))
Field2D make_planar(double theta, double offset, double lx, double ly, double h) {
  Field2D f;
  f.grid = Grid2D::centered(lx, ly, h, h);
  f.potential_id = "quartic";
  f.values.resize(static_cast<std::size_t>(f.grid.nx) * f.grid.ny);
  for (int j = 0; j < f.grid.ny; ++j)
    for (int i = 0; i < f.grid.nx; ++i) {
      const double d = f.grid.x(i) * std::cos(theta) - f.grid.y(j) * std::sin(theta) - offset;
      f.at(i, j) = std::tanh(d / std::sqrt(2.0));
    }
  return f;
}

// closed-form right-angle four-end ansatz (product of two diagonal layers)
Field2D make_saddle_ansatz(double lx, double h) {
  Field2D f;
  f.grid = Grid2D::centered(lx, lx, h, h);
  f.potential_id = "quartic";
  f.values.resize(static_cast<std::size_t>(f.grid.nx) * f.grid.ny);
  const double r2 = std::sqrt(2.0);
  for (int j = 0; j < f.grid.ny; ++j)
    for (int i = 0; i < f.grid.nx; ++i) {
      const double x = f.grid.x(i), y = f.grid.y(j);
      const double da = (y - x) / r2, db = -(y + x) / r2;
      f.at(i, j) = std::tanh(da / r2) * std::tanh(db / r2);
    }
  return f;
}

const Field2D& solved_saddle() {
  static Field2D f = relax(
      initial_field(FourEndSpec{kPi / 4.0, {0, 0, 0, 0}},
                    Grid2D::centered(10.0, 10.0, 0.1, 0.1), layer(), quartic()),
      quartic());
  return f;
}

// same saddle translated to (0.5, -0.3) via the end-ray offsets
const Field2D& shifted_saddle() {
  const double dx = 0.5, dy = -0.3, r2 = std::sqrt(2.0);
  const double ca = (-dx + dy) / r2;  // line at 45 degrees
  const double cb = (-dx - dy) / r2;  // line at 135 degrees
  static Field2D f = relax(
      initial_field(FourEndSpec{kPi / 4.0, {ca, cb, -ca, -cb}},
                    Grid2D::centered(10.0, 10.0, 0.1, 0.1), layer(), quartic()),
      quartic());
  return f;
}

}  // namespace

TEST_CASE("planar flux law rho = beta sin(phi)") {
  // tall narrow domain keeps every slice chord clear of the layer tails
  auto f = make_planar(kPi / 3.0, 0.0, 6.0, 12.0, 0.05);
  auto rep = hamiltonian_profile(f, quartic(), 0.0, 21);
  const double expect = quartic().beta() * std::sin(kPi / 3.0);
  CHECK(rep.reference == Catch::Approx(expect).margin(2e-3));
  CHECK(rep.max_abs_deviation <= 1e-3);
}

TEST_CASE("vertical front carries zero flux by equipartition") {
  // the front is parallel to every chord, so the pointwise h^2 gradient
  // error integrates along the whole chord: check it shrinks ~4x with h
  auto coarse = hamiltonian_profile(make_planar(0.0, 0.0, 6.0, 12.0, 0.05),
                                    quartic(), 0.0, 21);
  CHECK(std::abs(coarse.reference) <= 8e-3);
  CHECK(coarse.max_abs_deviation <= 8e-3);
  auto fine = hamiltonian_profile(make_planar(0.0, 0.0, 6.0, 12.0, 0.025),
                                  quartic(), 0.0, 21);
  CHECK(std::abs(fine.reference) <= 2.5e-3);
  CHECK(fine.max_abs_deviation <= std::max(1e-4, 0.4 * coarse.max_abs_deviation));
}

TEST_CASE("saddle Hamiltonian is constant and quantized") {
  const auto& f = solved_saddle();
  auto rep = hamiltonian_profile(f, quartic(), 0.0);
  // two 45-degree fronts: rho = 2 beta sin(pi/4) = 4/3
  CHECK(rep.reference == Catch::Approx(4.0 / 3.0).margin(1.5e-2));
  CHECK(rep.max_abs_deviation <= 1.2e-2);
  auto rep_oblique = hamiltonian_profile(f, quartic(), kPi / 4.0);
  // in the diagonal frame one line is slice-parallel: rho = beta;
  // off-grid bilinear interpolation carries a larger h^2 constant here
  CHECK(rep_oblique.reference == Catch::Approx(quartic().beta()).margin(2.5e-2));
  CHECK(rep_oblique.max_abs_deviation <= 2.5e-2);
}

TEST_CASE("moment identity vanishes for the centered saddle") {
  auto rep = moment_profile(solved_saddle(), quartic(), 41, Point{0.0, 0.0});
  CHECK(rep.max_abs_value <= 1e-5);
  auto swapped = moment_profile_swapped(solved_saddle(), quartic(), 41, Point{0.0, 0.0});
  CHECK(swapped.max_abs_value <= 1e-5);
}

TEST_CASE("canonical center recovers a known translation") {
  Point c = canonical_center(shifted_saddle(), quartic());
  CHECK(c.x == Catch::Approx(0.5).margin(0.02));
  CHECK(c.y == Catch::Approx(-0.3).margin(0.02));
  // about the wrong origin the moment is visibly nonzero ...
  auto off = moment_profile(shifted_saddle(), quartic(), 41, Point{0.0, 0.0});
  CHECK(off.max_abs_value > 0.2);
  // ... and about the canonical center it collapses
  auto on = moment_profile(shifted_saddle(), quartic(), 41, c);
  CHECK(on.max_abs_value <= 1e-2);
}

TEST_CASE("gradient bound holds on exact and relaxed fields") {
  auto planar = make_planar(kPi / 6.0, 0.0, 8.0, 8.0, 0.05);
  CHECK(modica_check(planar, quartic()).max_violation <= 5e-4);
  CHECK(modica_check(solved_saddle(), quartic()).max_violation <= 2e-3);
}

TEST_CASE("gradient bound flags a non-solution") {
  Field2D f;
  f.grid = Grid2D::centered(6.0, 6.0, 0.05, 0.05);
  f.values.resize(static_cast<std::size_t>(f.grid.nx) * f.grid.ny);
  for (int j = 0; j < f.grid.ny; ++j)
    for (int i = 0; i < f.grid.nx; ++i) f.at(i, j) = std::sin(f.grid.x(i));
  auto rep = modica_check(f, quartic());
  // |u'|^2 - 2F peaks at 1 - 1/2 on the zero crossings of sin
  CHECK(rep.max_violation == Catch::Approx(0.5).margin(1e-2));
  CHECK(std::abs(std::sin(rep.x)) < 0.1);
}

TEST_CASE("disk-rectangle area oracle") {
  using ac2::detail::circle_rect_area;
  CHECK(circle_rect_area(3.0, -1.0, -1.0, 1.0, 1.0) == Catch::Approx(4.0));
  CHECK(circle_rect_area(1.0, -2.0, -2.0, 2.0, 2.0) == Catch::Approx(kPi));
  CHECK(circle_rect_area(1.0, 0.0, 0.0, 2.0, 2.0) == Catch::Approx(kPi / 4.0));
  CHECK(circle_rect_area(1.0, -2.0, -2.0, -1.0, -1.0) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("energy over disks: planar front gives two ends") {
  auto f = make_planar(kPi / 6.0, 0.0, 10.0, 10.0, 0.05);
  std::vector<double> radii{5, 6, 7, 8, 9};
  auto curve = energy_curve(f, quartic(), radii, Point{0.0, 0.0});
  CHECK(curve.end_count_estimate == 2);
  const double target = 2.0 * quartic().beta();
  CHECK(curve.energy_per_r.back() == Catch::Approx(target).epsilon(0.02));
  for (std::size_t k = 1; k < radii.size(); ++k)
    CHECK(curve.energy_per_r[k] >= curve.energy_per_r[k - 1] - 1e-6 * quartic().beta());
}

TEST_CASE("energy over disks: right-angle junction gives four ends") {
  auto f = make_saddle_ansatz(19.5, 0.1);
  std::vector<double> radii{14, 15, 16, 17, 18};
  auto curve = energy_curve(f, quartic(), radii, Point{0.0, 0.0});
  CHECK(curve.end_count_estimate == 4);
  CHECK(curve.energy_per_r.back() == Catch::Approx(4.0 * quartic().beta()).epsilon(0.07));
}

TEST_CASE("energy curve rejects disks leaving the domain") {
  auto f = make_planar(0.0, 0.0, 6.0, 6.0, 0.1);
  CHECK_THROWS_AS(energy_curve(f, quartic(), {7.0}, Point{0.0, 0.0}), Error);
  CHECK_THROWS_AS(energy_curve(f, quartic(), {-1.0}, Point{0.0, 0.0}), Error);
}

TEST_CASE("tail decay fit recovers nu = sqrt(2)") {
  auto f = make_planar(kPi / 3.0, 0.0, 6.0, 12.0, 0.05);
  auto z = extract_zero_set(f);
  auto fit = decay_fit(f, quartic(), z.polylines);
  CHECK(fit.nu == Catch::Approx(std::sqrt(2.0)).margin(0.03));
  CHECK(fit.prefactor == Catch::Approx(2.0).epsilon(0.15));
  CHECK(fit.r2 > 0.999);
  CHECK(fit.samples >= 100);
}

TEST_CASE("decay fit demands data") {
  auto f = make_planar(kPi / 3.0, 0.0, 6.0, 12.0, 0.05);
  CHECK_THROWS_AS(decay_fit(f, quartic(), {}), Error);
  auto z = extract_zero_set(f);
  CHECK_THROWS_AS(decay_fit(f, quartic(), z.polylines, 20.0, 25.0), Error);
}

TEST_CASE("interior window needs room") {
  Field2D f;
  f.grid = Grid2D::centered(3.0, 3.0, 0.1, 0.1);
  f.values.assign(static_cast<std::size_t>(f.grid.nx) * f.grid.ny, 1.0);
  CHECK_THROWS_AS(interior_window(f, quartic()), Error);
}
