#include <cstdio>
#include <filesystem>

#include "critheat/spectral.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace critheat;

TEST_SUITE("spectral") {
  TEST_CASE("radial ball eigenvalues approach (k pi)^2") {
    auto d = radial(512);
    auto sp = eigenpairs(d, 4, 1e-10);
    for (int k = 0; k < 4; ++k) CHECK(sp.eigenvalues[k] == doctest::Approx((k + 1) * (k + 1) * kPi * kPi).epsilon(1e-3));
    for (double r : sp.residuals) CHECK(r < 1e-6);
  }

  TEST_CASE("box eigenvalue matches the discrete closed form") {
    DomainSpec s;
    s.kind = DomainKind::Box;
    s.resolution = 16;
    DiscreteDomain d(s);
    auto sp = eigenpairs(d, 1, 1e-10);
    const double h = 1.0 / 15.0;
    const double one = 4.0 / (h * h) * std::pow(std::sin(kPi * h / 2.0), 2);
    CHECK(sp.lambda1() == doctest::Approx(3.0 * one).epsilon(1e-8));
  }

  TEST_CASE("fields are weight-normalized") {
    auto d = radial(256);
    auto sp = eigenpairs(d, 2, 1e-10);
    CHECK(d.inner(sp.fields.col(0), sp.fields.col(0)) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(std::abs(d.inner(sp.fields.col(0), sp.fields.col(1))) < 1e-8);
  }

  TEST_CASE("spectrum cache round trip") {
    auto d = radial(128);
    auto sp = eigenpairs(d, 3, 1e-10);
    auto path = (std::filesystem::temp_directory_path() / "critheat-unit-spectrum.bin").string();
    save_spectrum(sp, path);
    auto back = load_spectrum(path);
    REQUIRE(back.has_value());
    CHECK(back->eigenvalues == sp.eigenvalues);
    CHECK(back->domain_hash == d.hash());
    CHECK((back->fields - sp.fields).norm() == 0.0);
    std::remove(path.c_str());
    CHECK_FALSE(load_spectrum(path).has_value());
  }

  TEST_CASE("tail bound decreases in time") {
    auto d = radial(256);
    auto sp = eigenpairs(d, 8, 1e-10);
    CHECK(kernel_tail_bound(d, sp, 0.01) > kernel_tail_bound(d, sp, 0.1));
  }
}
