#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pmc/errors.hpp"
#include "pmc/photon.hpp"

using namespace pmc;

namespace {

PhotonMode lumped_mode(double f_ghz, double beta) {
    PhotonMode m;
    m.label = "L";
    m.f_n = f_ghz;
    m.beta_in = beta;
    const double wn = rad_from_ghz(f_ghz);
    const double L = 1e-9;
    m.lumped = LumpedElements{L, 1.0 / (wn * wn * L), beta * L * wn};
    return m;
}

} // namespace

TEST_CASE("isrr impedance") {
    SUBCASE("lossless resonance gives zero impedance") {
        PhotonMode m = lumped_mode(5.0, 0.0);
        const Complex z = isrr_impedance(m.omega_n(), m);
        CHECK(std::abs(z) < 1e-12 * m.lumped->L * m.omega_n());
    }

    SUBCASE("lossy resonance is purely real 2 beta L omega_p") {
        PhotonMode m = lumped_mode(5.0, 2e-3);
        const Complex z = isrr_impedance(m.omega_n(), m);
        CHECK(z.real() == doctest::Approx(2.0 * 2e-3 * m.lumped->L * m.omega_n()).epsilon(1e-12));
        CHECK(std::abs(z.imag()) < 1e-12 * std::abs(z.real()));
    }

    SUBCASE("capacitive divergence toward zero frequency") {
        PhotonMode m = lumped_mode(5.0, 2e-3);
        CHECK(std::abs(isrr_impedance(1.0, m)) > 1e6 * std::abs(isrr_impedance(m.omega_n(), m)));
    }

    SUBCASE("missing lumped parameters") {
        PhotonMode m{"P1", 4.44, 2.3e-3, std::nullopt};
        CHECK_THROWS_AS(isrr_impedance(rad_from_ghz(4.44), m), ConfigError);
    }
}

TEST_CASE("photon complex frequency") {
    PhotonMode m{"P0", 5.0, 0.0, std::nullopt};
    CHECK(photon_complex_frequency(m).imag() == 0.0);

    m = PhotonMode{"P1", 4.44, 2.3e-3, std::nullopt};
    CHECK(photon_complex_frequency(m).imag() ==
          doctest::Approx(-2.3e-3 * two_pi * 4.44e9).epsilon(1e-12));

    m = PhotonMode{"P3", 7.02, 2.1e-3, std::nullopt};
    CHECK(photon_complex_frequency(m).imag() ==
          doctest::Approx(-2.1e-3 * two_pi * 7.02e9).epsilon(1e-12));
}

TEST_CASE("lumped element consistency is enforced") {
    PhotonMode good = lumped_mode(5.56, 1.8e-3);
    CHECK_NOTHROW(good.validate());

    PhotonMode bad = good;
    bad.f_n = 5.6;  // no longer 1/(2 pi sqrt(LC))
    CHECK_THROWS_AS(bad.validate(), std::domain_error);

    bad = good;
    bad.lumped->R *= 1.5;
    CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("beta"), std::domain_error);

    bad = good;
    bad.beta_in = -1e-3;
    CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("beta_in"), std::domain_error);
}

TEST_CASE("phase profile wrapping and differences") {
    CHECK(wrap_psi_deg(70.0) == 70.0);
    CHECK(wrap_psi_deg(-320.0) == -320.0);
    CHECK(wrap_psi_deg(430.0) == doctest::Approx(70.0));
    CHECK(wrap_psi_deg(-430.0) == doctest::Approx(-70.0));

    const PhotonPhaseProfile p1{0.0224, 70.0};
    const PhotonPhaseProfile p2{0.0912, 170.0};
    CHECK(phase_difference_deg(p1, p2) == doctest::Approx(100.0));
    // mod-360 equivalence of psi
    const PhotonPhaseProfile p2b{0.0912, 170.0 - 360.0};
    CHECK(phase_difference_deg(p1, p2b) == doctest::Approx(100.0));

    PhotonPhaseProfile bad{-0.1, 0.0};
    CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("sigma"), std::domain_error);
    bad = PhotonPhaseProfile{1.0, 400.0};
    CHECK_THROWS_AS(bad.validate(), std::domain_error);
}
