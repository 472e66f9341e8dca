#include "critheat/ansatz.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace critheat;

TEST_SUITE("ansatz") {
  TEST_CASE("bubble solves Delta U + U^5 = 0") {
    for (double r : {0.3, 1.0, 2.5}) {
      const double e = 1e-4;
      double upp = (bubble(r + e) - 2 * bubble(r) + bubble(r - e)) / (e * e);
      double lap = upp + 2.0 / r * bubble_dr(r);
      CHECK(lap + std::pow(bubble(r), 5) == doctest::Approx(0.0).epsilon(1e-5).scale(1.0));
    }
    CHECK(bubble(0.0) == doctest::Approx(kAlpha3));
  }

  TEST_CASE("Z_4 is the dilation generator") {
    Point y{0.3, -0.2, 0.5};
    const double r = norm(y);
    CHECK(kernel_z(4, y) == doctest::Approx(0.5 * bubble(r) + r * bubble_dr(r)));
    CHECK(kernel_z4(r) == doctest::Approx(kernel_z(4, y)));
  }

  TEST_CASE("bubble integrals") {
    auto bi = bubble_integrals();
    CHECK(bi.b == doctest::Approx(kPi * kPi * kAlpha3 * kAlpha3 / 4).epsilon(1e-3));
    CHECK(bi.a == doctest::Approx(-bi.u5).epsilon(1e-3));
  }

  TEST_CASE("invalid bubble parameters") {
    BubbleParams p{-1.0, {0, 0, 0}, 1.0};
    CHECK_THROWS_AS(p.validate(), ConfigError);
  }

  TEST_CASE("center error scales like mu^{-1/2} at gamma*") {
    const double g = kPi * kPi / 4;
    auto H = make_ball_regular_part(g, {0, 0, 0});
    double e2 = std::abs(error_u1(*H, {1e-2, {0, 0, 0}, g}, 0, {0, 0, 0}, {0, 0, 0}).total());
    double e4 = std::abs(error_u1(*H, {1e-4, {0, 0, 0}, g}, 0, {0, 0, 0}, {0, 0, 0}).total());
    CHECK(std::log(e4 / e2) / std::log(1e-2) == doctest::Approx(-0.5).epsilon(0.05));
  }

  TEST_CASE("energy of a small datum is positive") {
    auto d = radial(256);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(d.size());
    for (int i = 0; i < d.size(); ++i) u[i] = 1e-2 * (1.0 - std::pow(norm(d.nodes()[i]), 2));
    CHECK(energy(d, u) > 0.0);
  }

  TEST_CASE("translation coefficients make M orthogonal") {
    const Point gr{1.5, 0, 0};
    auto xc = xi0_coefficients(gr, 3.0);
    CHECK(xc.c_printed[0] <= 0.0);
    auto res = check_orthogonality_M(xc.c, 3.0, 0.1, gr);
    for (double r : res) CHECK(r < 1e-6);
    auto off = check_orthogonality_M(1.1 * xc.c, 3.0, 0.1, gr);
    CHECK(off[0] > 1e-3);
  }
}
