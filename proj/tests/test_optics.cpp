#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fpinv/optics.hpp"

using namespace fpinv::optics;

TEST_CASE("snell angle") {
    CHECK(snell_angle(0.0, 1.5) == doctest::Approx(0.0));
    // sin(30deg)/2 = 0.25
    CHECK(snell_angle(30.0, 2.0) == doctest::Approx(0.25268025514207865).epsilon(1e-12));
    CHECK(snell_angle(-30.0, 2.0) == doctest::Approx(-0.25268025514207865).epsilon(1e-12));
    CHECK_THROWS_AS(snell_angle(90.0, 1.5), std::domain_error);
    CHECK_THROWS_AS(snell_angle(0.0, 0.5), std::domain_error);
}

TEST_CASE("te reflectance") {
    CHECK(reflectance_te(0.0, 1.5) == doctest::Approx(0.04).epsilon(1e-12));
    CHECK(reflectance_te(70.0, 3.5) == doctest::Approx(0.6655248869602879).epsilon(1e-12));
    // symmetric in incidence angle
    for (double th : {10.0, 45.0, 72.5}) {
        CHECK(reflectance_te(th, 2.2) == doctest::Approx(reflectance_te(-th, 2.2)).epsilon(1e-14));
    }
    // grazing incidence approaches total reflection
    CHECK(reflectance_te(89.9, 1.5) > 0.99);
}

TEST_CASE("finesse") {
    CHECK(finesse(0.04) == doctest::Approx(0.17361111111111113).epsilon(1e-12));
    CHECK(finesse(reflectance_te(70.0, 3.5)) ==
          doctest::Approx(23.795600733907985).epsilon(1e-12));
    CHECK(finesse(0.0) == 0.0);
}

TEST_CASE("delta0") {
    CHECK(delta0_wavelength({70.0, 1.05, 100.0}) ==
          doctest::Approx(588.7150547472398).epsilon(1e-12));
    CHECK(delta0_wavelength({0.0, 3.5, 1000.0}) ==
          doctest::Approx(43982.2971502571).epsilon(1e-12));
    // at normal incidence delta0 = 4 pi n l exactly
    CHECK(delta0_wavelength({0.0, 2.0, 250.0}) ==
          doctest::Approx(4.0 * kPi * 2.0 * 250.0).epsilon(1e-14));
}

TEST_CASE("closed-form transmission matches partial-wave sum") {
    for (double th : {0.0, 40.0, 70.0}) {
        for (double n : {1.05, 2.0, 3.5}) {
            for (double l : {100.0, 550.0, 1000.0}) {
                const double R = reflectance_te(th, n);
                const double F = finesse(R);
                const double d0 = delta0_wavelength({th, n, l});
                for (double lambda : {400.0, 512.0, 798.0}) {
                    const double delta = d0 / lambda;
                    const double closed = transmission(F, delta / 2.0);
                    const double brute = partial_wave_oracle(R, delta, 4000);
                    CHECK(closed == doctest::Approx(brute).epsilon(1e-8));
                }
            }
        }
    }
}

TEST_CASE("transmission bounds and resonance") {
    const double F = finesse(reflectance_te(0.0, 3.0));
    CHECK(transmission(F, 0.0) == doctest::Approx(1.0));
    CHECK(transmission(F, kPi) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(transmission(F, kPi / 2.0) == doctest::Approx(1.0 / (1.0 + F)).epsilon(1e-12));
    for (double hp = 0.0; hp < 6.0; hp += 0.37) {
        const double t = transmission(F, hp);
        CHECK(t > 0.0);
        CHECK(t <= 1.0 + 1e-15);
    }
}

TEST_CASE("lambda spectrum") {
    WavelengthGrid grid;
    CHECK(grid.value(0) == 400.0);
    CHECK(grid.value(199) == 798.0);

    const DesignParams p{70.0, 3.5, 500.0};
    const auto spec = spectrum_lambda(p);
    REQUIRE(spec.values.size() == 200);
    CHECK(spec.grid == GridKind::wavelength);
    const std::size_t i = (450 - 400) / 2;  // lambda = 450 nm
    const double F = finesse(reflectance_te(70.0, 3.5));
    const double hp = delta0_wavelength(p) / (2.0 * 450.0);
    CHECK(spec.values[i] == doctest::Approx(1.0 / (1.0 + F * std::sin(hp) * std::sin(hp)))
                                .epsilon(1e-12));
    CHECK(spec.values[i] == doctest::Approx(0.04035291875414708).epsilon(1e-10));

    // symmetric in incidence angle
    const auto neg = spectrum_lambda({-70.0, 3.5, 500.0});
    for (std::size_t k = 0; k < 200; ++k) {
        CHECK(spec.values[k] == doctest::Approx(neg.values[k]).epsilon(1e-14));
    }

    // the simplified parameterization reproduces the same curve
    const auto simp = spectrum_lambda_simplified(simplified_params(p));
    for (std::size_t k = 0; k < 200; ++k) {
        CHECK(spec.values[k] == doctest::Approx(simp.values[k]).epsilon(1e-14));
    }
}

TEST_CASE("theta spectrum") {
    AngleGrid grid;
    CHECK(grid.value(0) == -89.0);
    CHECK(grid.value(178) == 89.0);

    const auto spec = spectrum_theta(424.0, 2.5, 600.0);
    REQUIRE(spec.values.size() == 179);
    CHECK(spec.grid == GridKind::angle);
    // symmetric about normal incidence
    for (std::size_t k = 0; k < 179; ++k) {
        CHECK(spec.values[k] == doctest::Approx(spec.values[178 - k]).epsilon(1e-12));
    }
    // value at theta = 0 from scratch
    const double F0 = finesse(reflectance_te(0.0, 2.5));
    const double hp0 = 2.0 * kPi * 2.5 * 600.0 / 424.0;
    CHECK(spec.values[89] ==
          doctest::Approx(1.0 / (1.0 + F0 * std::sin(hp0) * std::sin(hp0))).epsilon(1e-12));
}
