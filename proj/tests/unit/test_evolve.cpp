#include "critheat/evolve.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace critheat;

TEST_SUITE("evolve") {
  TEST_CASE("exact ODE flow") {
    Eigen::VectorXd u(2);
    u << 0.5, -1.0;
    CHECK(ode_flow(u, 0.1));
    CHECK(u[0] == doctest::Approx(0.5 * std::pow(1 - 4 * 0.1 * std::pow(0.5, 4), -0.25)));
    CHECK(u[1] == doctest::Approx(-std::pow(1 - 4 * 0.1, -0.25)));
    Eigen::VectorXd w(1);
    w << 2.0;
    CHECK_FALSE(ode_flow(w, 1.0));
  }

  TEST_CASE("scheme and status names") {
    CHECK(scheme_from_string(to_string(Scheme::ImexBdf2)) == Scheme::ImexBdf2);
    CHECK_THROWS_AS(scheme_from_string("rk4"), ConfigError);
    CHECK(to_string(Status::BlownUp) == "blown-up");
  }

  TEST_CASE("small first-mode datum decays at lambda_1 with both schemes") {
    auto d = radial(256);
    auto sp = eigenpairs(d, 1, 1e-10);
    Eigen::VectorXd phi = sp.fields.col(0);
    if (phi.sum() < 0) phi = -phi;
    for (auto sch : {Scheme::StrangSplit, Scheme::ImexBdf2}) {
      EvolveConfig cfg;
      cfg.scheme = sch;
      cfg.energy_guard = false;
      auto tr = evolve(d, 0.01 * phi, cfg);
      CHECK(tr.status == Status::Decayed);
      CHECK(tr.energy_violations == 0);
      CHECK(-log_sup_slope(tr, 0.5 * tr.t_end, tr.t_end).slope == doctest::Approx(sp.lambda1()).epsilon(0.02));
    }
  }

  TEST_CASE("large datum blows up without energy increase") {
    auto d = radial(256);
    auto sp = eigenpairs(d, 1, 1e-10);
    Eigen::VectorXd phi = sp.fields.col(0);
    if (phi.sum() < 0) phi = -phi;
    EvolveConfig cfg;
    cfg.energy_guard = false;
    auto tr = evolve(d, 5.0 * phi, cfg);
    CHECK(tr.status == Status::BlownUp);
    CHECK(tr.blowup_time > 0.0);
    CHECK(tr.energy_violations == 0);
  }

  TEST_CASE("blow-up threshold must exceed ten times the initial maximum") {
    auto d = radial(64);
    EvolveConfig cfg;
    cfg.m_max = 1.0;
    CHECK_THROWS_AS(evolve(d, Eigen::VectorXd::Ones(d.size()), cfg), ConfigError);
  }

  TEST_CASE("rate estimate rejects short windows") {
    Trajectory tr;
    tr.t = {0, 1};
    tr.mu_hat = {1, 0.1};
    CHECK_THROWS_AS(rate_estimate(tr, 0, 1), ConfigError);
  }

  TEST_CASE("linear solve converges to the steady state") {
    // v' = Lap v + f with f = phi_1 gives v -> phi_1 / lambda_1 when gamma = 0
    auto d = radial(256);
    auto sp = eigenpairs(d, 1, 1e-10);
    Eigen::VectorXd phi = sp.fields.col(0);
    LinearConfig lc;
    lc.t_end = 2.0;
    lc.dt = 1e-3;
    auto lt = linear_inhomogeneous(d, sp.lambda1(), 0.0, [&](double) { return phi; }, lc);
    CHECK((lt.v_final - phi / sp.lambda1()).lpNorm<Eigen::Infinity>() < 1e-6);
  }
}
