#include "critheat/green.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace critheat;

TEST_SUITE("green") {
  TEST_CASE("series regular part at the center matches the closed form") {
    for (double g : {0.0, 1.0, 4.0, 8.0}) {
      BallGreenSeries s(g);
      if (g > 0) CHECK(s.robin({1e-12, 0, 0}) == doctest::Approx(ball_robin_center(g)).epsilon(1e-8));
      CHECK(s.H({0.4, 0, 0}, {0, 0, 0}) == doctest::Approx(ball_regular_part_center(g, 0.4)).epsilon(1e-8));
    }
  }

  TEST_CASE("gamma = 0 Robin function on the unit ball") {
    // R_0(x) = alpha_3 / (1 - |x|^2)
    BallGreenSeries s(0.0);
    CHECK(s.robin({0.5, 0, 0}) == doctest::Approx(kAlpha3 / 0.75).epsilon(1e-8));
  }

  TEST_CASE("regular part is symmetric") {
    BallGreenSeries s(2.0);
    Point x{0.2, 0.1, -0.3}, y{-0.4, 0.3, 0.1};
    CHECK(s.H(x, y) == doctest::Approx(s.H(y, x)).epsilon(1e-10));
  }

  TEST_CASE("gamma* at the center and admissibility") {
    auto d = radial(512);
    auto sp = eigenpairs(d, 2, 1e-10);
    auto a = admissible(d, sp, {0, 0, 0}, 1e-12);
    CHECK(a.gamma_star == doctest::Approx(kPi * kPi / 4).epsilon(1e-6));
    CHECK(a.admissible);
  }

  TEST_CASE("gamma* increases toward the boundary") {
    auto d = radial(512);
    auto sp = eigenpairs(d, 2, 1e-10);
    auto m = gamma_star_map(d, sp, {{0, 0, 0}, {0.3, 0, 0}, {0.6, 0, 0}}, 1e-10);
    REQUIRE(m.entries.size() == 3);
    CHECK(m.radially_increasing);
    CHECK(m.entries[2].gamma_star < sp.lambda1());
  }

  TEST_CASE("Robin gradient vanishes at the center") {
    auto d = radial(512);
    auto sp = eigenpairs(d, 2, 1e-10);
    auto g = grad_robin(d, sp, 2.0, {0, 0, 0});
    CHECK(norm(g) < 1e-6);
  }

  TEST_CASE("theta_gamma limit at r = 0") {
    CHECK(theta_gamma(4.0, 0.0) == doctest::Approx(0.0));
    CHECK(theta_gamma(4.0, 1e-4) == doctest::Approx(kAlpha3 * 2.0 * 1e-4).epsilon(1e-3));
  }
}
