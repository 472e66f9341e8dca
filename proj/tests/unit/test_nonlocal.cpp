#include "critheat/nonlocal.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace critheat;

namespace {
struct Setup {
  DiscreteDomain d = radial(512);
  Spectrum sp = eigenpairs(d, 120, 1e-8);
  NonlocalKernel k{d, sp, kPi * kPi / 4, {0, 0, 0}};
};
}  // namespace

TEST_SUITE("nonlocal") {
  TEST_CASE("kernel is positive and continuous across the switch") {
    Setup s;
    for (double t : log_grid(1e-5, 1.0, 12)) CHECK(s.k.I(t) > 0.0);
    CHECK(s.k.switch_mismatch() < 0.01);
  }

  TEST_CASE("residue constant on the ball center at gamma*") {
    // I~(-gamma*) = alpha_3 / 2 in closed form
    Setup s;
    CHECK(s.k.c_inf() == doctest::Approx(2.0 / kAlpha3).epsilon(5e-3));
    CHECK(residue_c_inf(s.k) == doctest::Approx(s.k.c_inf()));
  }

  TEST_CASE("symbol is real on the real axis and throws at a pole") {
    Setup s;
    auto v = s.k.I_tilde({1.0, 0.0});
    CHECK(std::abs(v.imag()) < 1e-12);
    CHECK(v.real() > 0.0);
    CHECK_THROWS_AS(s.k.I_tilde({-s.k.lambda1(), 0.0}), ConfigError);
  }

  TEST_CASE("log grid") {
    auto g = log_grid(1e-3, 1.0, 4);
    REQUIRE(g.size() == 4);
    CHECK(g[1] == doctest::Approx(1e-2));
  }

  TEST_CASE("smooth step") {
    CHECK(smooth_step(-1) == 0.0);
    CHECK(smooth_step(0.5) == doctest::Approx(0.5));
    CHECK(smooth_step(2) == 1.0);
  }

  TEST_CASE("table provenance switches once") {
    Setup s;
    auto t = i_tau_table(s.k, log_grid(1e-5, 1.0, 30));
    int changes = 0;
    for (size_t i = 1; i < t.provenance.size(); ++i) changes += t.provenance[i] != t.provenance[i - 1];
    CHECK(changes == 1);
    CHECK(t.to_csv().rfind("tau,I,provenance\n", 0) == 0);
  }
}
