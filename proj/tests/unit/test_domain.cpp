#include "doctest.h"
#include "helpers.hpp"

using namespace critheat;

TEST_SUITE("domain") {
  TEST_CASE("resolution below 8 is rejected") {
    DomainSpec s;
    s.resolution = 7;
    CHECK_THROWS_AS(s.validate(), ConfigError);
  }

  TEST_CASE("box unknowns form the interior grid") {
    DomainSpec s;
    s.kind = DomainKind::Box;
    s.resolution = 10;
    DiscreteDomain d(s);
    CHECK(d.size() == 8 * 8 * 8);
    CHECK(d.weights().sum() == doctest::Approx(1.0).epsilon(0.3));
  }

  TEST_CASE("radial weights integrate the ball volume") {
    auto d = radial(256);
    CHECK(d.weights().sum() == doctest::Approx(4.0 * kPi / 3.0).epsilon(0.02));
  }

  TEST_CASE("radial operator on r^2") {
    auto d = radial(128);
    Eigen::VectorXd u(d.size());
    for (int i = 0; i < d.size(); ++i) u[i] = norm(d.nodes()[i]) * norm(d.nodes()[i]) - 1.0;
    // A = -Lap, so A (r^2 - 1) = -6 up to the O(h^2) cell-volume error
    Eigen::VectorXd a = d.apply(u);
    // relative error behaves like (h / r)^2, so compare away from the origin
    for (int i = d.size() / 4; i < d.size() - 1; ++i) CHECK(a[i] == doctest::Approx(-6.0).epsilon(1e-3));
  }

  TEST_CASE("boundary distance on the unit ball") {
    DomainSpec s;
    s.resolution = 16;
    DiscreteDomain d(s);
    CHECK(d.boundary_distance({0.25, 0, 0}) == doctest::Approx(0.75).epsilon(1e-6));
  }

  TEST_CASE("domain hash separates resolutions") {
    CHECK(radial(64).hash() != radial(65).hash());
    CHECK(radial(64).hash() == radial(64).hash());
  }
}
