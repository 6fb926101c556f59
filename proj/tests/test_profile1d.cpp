#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "ac2/potential.hpp"
#include "ac2/profile1d.hpp"

using namespace ac2;

TEST_CASE("quartic layer matches tanh(s/sqrt(2))") {
  auto p = Potential::quartic();
  auto prof = solve_profile(p, 12.0, 0.01);
  double worst = 0.0;
  for (int i = 0; i < prof.size(); ++i)
    worst = std::max(worst,
                     std::abs(prof.g[i] - std::tanh(prof.s[i] / std::sqrt(2.0))));
  CHECK(worst <= 1e-4);
  CHECK(prof(0.0) == Catch::Approx(0.0).margin(1e-8));
  CHECK(prof.derivative(0.0) == Catch::Approx(1.0 / std::sqrt(2.0)).margin(1e-4));
  CHECK(prof(1.0) == Catch::Approx(std::tanh(1.0 / std::sqrt(2.0))).margin(1e-4));
}

TEST_CASE("profile is monotone with exponentially matched tails") {
  auto p = Potential::quartic();
  auto prof = solve_profile(p, 12.0, 0.02);
  for (int i = 1; i < prof.size(); ++i) CHECK(prof.g[i] >= prof.g[i - 1] - 1e-12);
  CHECK(std::abs(prof.g.back() - 1.0) < std::exp(-0.5 * 12.0));
  CHECK(std::abs(prof.g.front() + 1.0) < std::exp(-0.5 * 12.0));
}

TEST_CASE("profile energy approaches beta") {
  auto p = Potential::quartic();
  auto prof = solve_profile(p, 12.0, 0.01);
  CHECK(energy_1d(prof, p) == Catch::Approx(p.beta()).margin(5e-4));
  CHECK(equipartition_residual(prof, p) <= 5e-4);
}

TEST_CASE("constant profile has zero energy") {
  auto p = Potential::quartic();
  Profile1D prof;
  prof.half_length = 10.0;
  prof.step = 0.1;
  for (int i = 0; i <= 200; ++i) {
    prof.s.push_back(-10.0 + 0.1 * i);
    prof.g.push_back(1.0);
    prof.dg.push_back(0.0);
  }
  CHECK(energy_1d(prof, p) == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("energy of the layer of a scaled well follows the beta law") {
  auto p4 = Potential::quartic(4.0);
  auto prof = solve_profile(p4, 12.0, 0.01);
  // beta(4F) = 2 beta(F)
  CHECK(energy_1d(prof, p4) ==
        Catch::Approx(2.0 * Potential::quartic().beta()).margin(2e-3));
}

TEST_CASE("second-order convergence against the closed form") {
  auto p = Potential::quartic();
  auto err = [&](double h) {
    auto prof = solve_profile(p, 12.0, h);
    double worst = 0.0;
    for (int i = 0; i < prof.size(); ++i)
      worst = std::max(
          worst, std::abs(prof.g[i] - std::tanh(prof.s[i] / std::sqrt(2.0))));
    return worst;
  };
  const double e1 = err(0.04), e2 = err(0.02);
  CHECK(e1 / e2 > 3.0);  // ~4x per halving
  CHECK(e1 / e2 < 5.0);
}

TEST_CASE("preconditions are enforced") {
  auto p = Potential::quartic();
  CHECK_THROWS_AS(solve_profile(p, 4.0, 0.01), Error);    // L too small
  CHECK_THROWS_AS(solve_profile(p, 12.0, 0.2), Error);    // h too coarse
  CHECK_THROWS_AS(solve_profile(p, 12.0, 0.01, 1e-14), Error);  // tol too tight
}
