#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "ac2/boundary.hpp"
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

double planar_error(double theta, double h) {
  Grid2D g = Grid2D::centered(8.0, 8.0, h, h);
  auto f = relax(initial_field(PlanarSpec{theta, 0.0}, g, layer(), quartic()),
                 quartic());
  double worst = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double d = g.x(i) * std::cos(theta) - g.y(j) * std::sin(theta);
      worst = std::max(worst, std::abs(f.at(i, j) - std::tanh(d / std::sqrt(2.0))));
    }
  return worst;
}
}  // namespace

TEST_CASE("planar tilt reproduces the closed-form layer") {
  SolveStats st;
  Grid2D g = Grid2D::centered(8.0, 8.0, 0.1, 0.1);
  const double th = kPi / 6.0;
  auto f = relax(initial_field(PlanarSpec{th, 0.0}, g, layer(), quartic()),
                 quartic(), {}, &st);
  CHECK(f.residual_max <= 1e-10);
  CHECK(residual_max(f, quartic()) <= 1e-10);
  double worst = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double d = g.x(i) * std::cos(th) - g.y(j) * std::sin(th);
      worst = std::max(worst, std::abs(f.at(i, j) - std::tanh(d / std::sqrt(2.0))));
    }
  CHECK(worst < 5e-3);
}

TEST_CASE("second-order convergence of the planar solve") {
  const double e1 = planar_error(kPi / 6.0, 0.4);
  const double e2 = planar_error(kPi / 6.0, 0.2);
  CHECK(e1 / e2 > 2.8);
  CHECK(e1 / e2 < 5.5);
}

TEST_CASE("iterates respect the maximum principle") {
  Grid2D g = Grid2D::centered(8.0, 8.0, 0.1, 0.1);
  auto f0 = initial_field(FourEndSpec{kPi / 4.0, {0, 0, 0, 0}}, g, layer(), quartic());
  // perturb the interior hard; the solve must still land in [-1, 1]
  for (int j = 1; j < g.ny - 1; ++j)
    for (int i = 1; i < g.nx - 1; ++i)
      f0.at(i, j) = std::clamp(f0.at(i, j) + 0.3 * std::sin(7.0 * i + 3.0 * j), -1.0, 1.0);
  auto f = relax(std::move(f0), quartic());
  for (double v : f.values) {
    CHECK(v <= 1.0 + 1e-12);
    CHECK(v >= -1.0 - 1e-12);
  }
  CHECK(f.residual_max <= 1e-10);
}

TEST_CASE("saddle keeps the sign-reversing diagonal symmetry") {
  Grid2D g = Grid2D::centered(8.0, 8.0, 0.1, 0.1);
  auto f = relax(initial_field(FourEndSpec{kPi / 4.0, {0, 0, 0, 0}}, g, layer(), quartic()),
                 quartic());
  double worst = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      worst = std::max(worst, std::abs(f.at(i, j) + f.at(j, i)));
  CHECK(worst < 1e-5);
  // center sits on two interfaces
  CHECK(std::abs(f.at((g.nx - 1) / 2, (g.ny - 1) / 2)) < 1e-5);
}

TEST_CASE("mirror edge carries zero normal derivative") {
  Grid2D g = Grid2D::half(8.0, 8.0, 0.1, 0.1);
  auto f = relax(initial_field(HalfPlaneSpec{kPi / 4.0, 0.0}, g, layer(), quartic()),
                 quartic());
  CHECK(f.neumann_left);
  CHECK(f.residual_max <= 1e-10);
  double worst = 0.0;
  for (int j = 1; j < g.ny - 1; ++j) worst = std::max(worst, std::abs(f.grad_x(0, j)));
  CHECK(worst < 5e-3);  // one-sided difference of a symmetric extension
}

TEST_CASE("a fixed point returns untouched with zero work") {
  Grid2D g = Grid2D::centered(8.0, 8.0, 0.2, 0.2);
  Field2D f;
  f.grid = g;
  f.values.assign(static_cast<std::size_t>(g.nx) * g.ny, 1.0);  // F'(1) = 0
  SolveStats st;
  auto out = relax(f, quartic(), {}, &st);
  CHECK(st.pseudo_steps == 0);
  CHECK(st.newton_steps == 0);
  CHECK(out.residual_max == 0.0);
}

TEST_CASE("solver failure surfaces the best iterate") {
  Grid2D g = Grid2D::centered(8.0, 8.0, 0.2, 0.2);
  auto f0 = initial_field(PlanarSpec{0.0, 0.0}, g, layer(), quartic());
  SolveConfig cfg;
  cfg.max_pseudo = 0;
  cfg.max_newton = 0;
  try {
    relax(f0, quartic(), cfg);
    FAIL("expected a solver error");
  } catch (const SolverError& e) {
    CHECK(e.kind() == ErrorKind::Solver);
    REQUIRE(e.best_field != nullptr);
    CHECK(e.best_field->grid.nx == g.nx);
    CHECK(e.best_field->values.size() == f0.values.size());
  }
}
