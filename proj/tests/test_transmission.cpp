#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "pmc/transmission.hpp"

using namespace pmc;

namespace {

double bare_response(double omega, const PhotonMode& mode, double gamma) {
    return std::abs(gamma * omega * omega / (omega - photon_complex_frequency(mode)));
}

} // namespace

TEST_CASE("sweep grid") {
    CHECK_THROWS_AS(SweepGrid::linspace(0.0, 0.0, 5), std::invalid_argument);
    CHECK_THROWS_AS(SweepGrid::linspace(0.0, 1.0, 1), std::invalid_argument);
    const auto axis = SweepGrid::linspace(0.0, 1.0, 11);
    CHECK(axis.front() == 0.0);
    CHECK(axis.back() == 1.0);
    SweepGrid bad{{0.1, 0.1}, {4.0, 5.0}};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("decoupled transmission: the magnon factor cancels") {
    const HybridSystem sys = default_three_mode_system();
    const MagnonParams mg = sys.magnon;
    const PhotonMode& mode = sys.modes[1];
    const CouplingConstant K0;

    for (double f : {5.2, 5.56, 5.9}) {
        const double omega = rad_from_ghz(f);
        const Complex a = s21_single(omega, FieldPoint{0.08}, mg, mode, K0, 2 * mode.beta_in);
        const Complex b = s21_single(omega, FieldPoint{0.22}, mg, mode, K0, 2 * mode.beta_in);
        const Complex bare =
            2 * mode.beta_in * omega * omega / (omega - photon_complex_frequency(mode));
        CHECK(std::abs(a - b) <= 1e-12 * std::abs(a));
        CHECK(std::abs(a - bare) <= 1e-12 * std::abs(bare));

        // same cancellation through the per-mode form
        HybridSystem zero = sys;
        for (auto& c : zero.couplings) c.decomp = CouplingDecomposition{};
        const Complex pa = s21_per_mode(omega, FieldPoint{0.08}, zero, 1);
        const Complex pb = s21_per_mode(omega, FieldPoint{0.22}, zero, 1);
        CHECK(std::abs(pa - pb) <= 1e-12 * std::abs(pa));
        CHECK(std::abs(pa - bare) <= 1e-12 * std::abs(bare));
    }

    SUBCASE("bare peak sits within half a grid step of the mode frequency") {
        const double step = 1e-3;  // 1 MHz scan
        double best_f = 0.0, best_v = -1.0;
        for (int i = 0; i <= 200; ++i) {
            const double f = 5.46 + i * step;
            const double v = std::abs(
                s21_single(rad_from_ghz(f), FieldPoint{0.2}, mg, mode, K0, 2 * mode.beta_in));
            if (v > best_v) {
                best_v = v;
                best_f = f;
            }
        }
        CHECK(std::abs(best_f - mode.f_n) <= 0.5 * step);
    }
}

TEST_CASE("half-power width of a bare mode matches beta * f") {
    const HybridSystem sys = default_three_mode_system();
    for (std::size_t n = 0; n < 3; ++n) {
        const PhotonMode& mode = sys.modes[n];
        const CouplingConstant K0;
        auto cut = [&](double f) {
            return std::abs(s21_single(rad_from_ghz(f), FieldPoint{0.28}, sys.magnon, mode, K0,
                                       sys.gamma_n(n)));
        };
        const double peak = cut(mode.f_n);
        const double half_power = peak / std::sqrt(2.0);
        double flo = mode.f_n, fhi = mode.f_n;
        while (cut(flo) > half_power) flo -= 1e-5;
        while (cut(fhi) > half_power) fhi += 1e-5;
        const double hwhm = 0.5 * (fhi - flo);
        CHECK(hwhm == doctest::Approx(mode.beta_in * mode.f_n).epsilon(0.1));
    }
}

// Coupled-center response relative to the bare mode at the same point. The
// response function peaks at resonances, so transparency centers sit well
// below the bare level while the absorption center does not.
TEST_CASE("center response contrast separates CIA from the transparency centers") {
    const HybridSystem sys = default_three_mode_system();
    const MagnonParams mg = sys.magnon;
    double ratio[3];
    for (std::size_t n = 0; n < 3; ++n) {
        const PhotonMode& mode = sys.modes[n];
        const FieldPoint hc = kittel_field(mode.f_n, mg);
        const double omega = mode.omega_n();
        ratio[n] = std::abs(s21_per_mode(omega, hc, sys, n)) /
                   bare_response(omega, mode, sys.gamma_n(n));
    }
    CHECK(ratio[0] < 1.0);  // opposite anti-crossing: transparency
    CHECK(ratio[1] > 1.0);  // absorption persists at the CIA center
    CHECK(ratio[2] < 1.0);  // normal anti-crossing: transparency
    CHECK(ratio[1] > 10.0 * ratio[0]);
    CHECK(ratio[1] > 10.0 * ratio[2]);
}

TEST_CASE("CIA center is a sharp response ridge along the frequency cut") {
    const HybridSystem sys = default_three_mode_system();
    const FieldPoint hc = kittel_field(5.56, sys.magnon);
    auto cut = [&](double f) {
        return std::abs(s21_per_mode(rad_from_ghz(f), hc, sys, 1));
    };
    const double vc = cut(5.56);
    CHECK(vc > cut(5.56 - 2e-4));
    CHECK(vc > cut(5.56 + 2e-4));
    CHECK(vc > cut(5.56 - 2e-3));
    CHECK(vc > cut(5.56 + 2e-3));
}

TEST_CASE("per-mode spectrum of the coherent center splits by the pairwise gap") {
    const HybridSystem sys = default_three_mode_system();
    const FieldPoint hc = kittel_field(7.02, sys.magnon);
    auto cut = [&](double f) {
        return std::abs(s21_per_mode(rad_from_ghz(f), hc, sys, 2));
    };
    const auto peaks = oracles::dense_peaks(cut, 6.9, 7.14);
    REQUIRE(peaks.size() == 2);
    const auto [ep, em] = pairwise_branches(sys, 2, hc);
    const double eigen_gap = ghz_from_rad(ep.real() - em.real());
    // peak positions shift slightly off the eigenvalue real parts through the
    // magnon zero in the numerator; a few MHz of slack covers it
    CHECK(std::abs((peaks[1] - peaks[0]) - eigen_gap) < 3e-3);
}

// Inside the attraction interval the branch real parts coincide; the response
// cut there is a transparency dip at the magnon line flanked by two lobes
// whose midline tracks the merged branch frequency.
TEST_CASE("attraction center: the response structure collapses onto the merged branch") {
    const HybridSystem sys = default_three_mode_system();
    const double hc = kittel_field(4.44, sys.magnon).mu0_H;

    SUBCASE("at the crossing field the lobes straddle a transparency dip") {
        const FieldPoint h{hc};
        const auto [ep, em] = pairwise_branches(sys, 0, h);
        REQUIRE(ghz_from_rad(ep.real() - em.real()) < 1e-4);
        const double f_merged = ghz_from_rad(0.5 * (ep.real() + em.real()));
        auto cut = [&](double f) {
            return std::abs(s21_per_mode(rad_from_ghz(f), h, sys, 0));
        };
        const auto peaks = oracles::dense_peaks(cut, 4.38, 4.5, 12000);
        REQUIRE(peaks.size() == 2);
        CHECK(0.5 * (peaks[0] + peaks[1]) == doctest::Approx(f_merged).epsilon(5e-4));
        CHECK(cut(f_merged) < 0.2 * cut(peaks[0]));
        CHECK(cut(f_merged) < 0.2 * cut(peaks[1]));
    }

    SUBCASE("across the attraction interval the lobes bracket the merged line") {
        for (int i = 0; i <= 10; ++i) {
            const FieldPoint h{hc - 5e-4 + 1e-3 * i / 10.0};
            const auto [ep, em] = pairwise_branches(sys, 0, h);
            REQUIRE(ghz_from_rad(ep.real() - em.real()) < 5e-3);  // merged real parts
            const double f_merged = ghz_from_rad(0.5 * (ep.real() + em.real()));
            auto cut = [&](double f) {
                return std::abs(s21_per_mode(rad_from_ghz(f), h, sys, 0));
            };
            const auto peaks = oracles::dense_peaks(cut, 4.38, 4.5, 12000);
            REQUIRE(peaks.size() == 2);
            CHECK(peaks[0] < f_merged);
            CHECK(peaks[1] > f_merged);
        }
    }
}

TEST_CASE("multimode spectrum") {
    const HybridSystem sys = default_three_mode_system();

    SUBCASE("decoupled poles sit at the bare photon frequencies, no magnon feature") {
        HybridSystem zero = sys;
        for (auto& c : zero.couplings) c.decomp = CouplingDecomposition{};
        const double v1 = std::abs(s21_multimode(rad_from_ghz(5.0), FieldPoint{0.08}, zero));
        const double v2 = std::abs(s21_multimode(rad_from_ghz(5.0), FieldPoint{0.2}, zero));
        CHECK(v1 == doctest::Approx(v2).epsilon(1e-12));
        Complex expected = multimode_scale(zero) * rad_from_ghz(5.0) * rad_from_ghz(5.0);
        for (const auto& m : zero.modes) expected /= rad_from_ghz(5.0) - photon_complex_frequency(m);
        CHECK(std::abs(v1 - std::abs(expected)) <= 1e-12 * v1);
    }

    SUBCASE("far from all crossings the three ridges sit at the mode frequencies") {
        const FieldPoint far = kittel_field(1.0, sys.magnon);
        const double step = 5e-3;
        SweepGrid grid{{far.mu0_H - 1e-4, far.mu0_H + 1e-4},
                       SweepGrid::linspace(4.0, 7.5, 701)};
        const SpectrumMap map = sweep_spectrum(sys, grid, SpectrumVariant::multimode);
        std::vector<double> peaks;
        for (std::size_t j = 1; j + 1 < grid.freq_GHz.size(); ++j) {
            const double v0 = map.values(0, static_cast<Eigen::Index>(j - 1));
            const double v1 = map.values(0, static_cast<Eigen::Index>(j));
            const double v2 = map.values(0, static_cast<Eigen::Index>(j + 1));
            if (v1 > v0 && v1 >= v2 && v1 > 0.05) peaks.push_back(grid.freq_GHz[j]);
        }
        REQUIRE(peaks.size() == 3);
        CHECK(std::abs(peaks[0] - 4.44) <= step);
        CHECK(std::abs(peaks[1] - 5.56) <= step);
        CHECK(std::abs(peaks[2] - 7.02) <= step);
    }
}

// Column-wise maxima of the absorption-center map trace the crossing ridge:
// away from the crossing they sit on the photon line, and the map's global
// maximum is the enhanced response at the crossing itself.
TEST_CASE("absorption-center map: column maxima trace the crossing ridge") {
    const HybridSystem sys = default_three_mode_system();
    const double hc = kittel_field(5.56, sys.magnon).mu0_H;
    SweepGrid grid{SweepGrid::linspace(hc - 0.02, hc + 0.02, 400),
                   SweepGrid::linspace(5.41, 5.71, 400)};
    SweepOptions o;
    o.workers = 2;
    o.mode_index = 1;
    const SpectrumMap map = sweep_spectrum(sys, grid, SpectrumVariant::per_mode, o);

    const double step = grid.freq_GHz[1] - grid.freq_GHz[0];
    Eigen::Index imax = 0, jmax = 0;
    map.values.maxCoeff(&imax, &jmax);
    CHECK(std::abs(grid.field_T[static_cast<std::size_t>(imax)] - hc) <=
          grid.field_T[1] - grid.field_T[0]);
    CHECK(std::abs(grid.freq_GHz[static_cast<std::size_t>(jmax)] - 5.56) <= step);

    for (Eigen::Index i = 0; i < map.values.rows(); i += 20) {
        Eigen::Index j = 0;
        map.values.row(i).maxCoeff(&j);
        const double f_peak = grid.freq_GHz[static_cast<std::size_t>(j)];
        const double dh = std::abs(grid.field_T[static_cast<std::size_t>(i)] - hc);
        if (dh > 0.01) {
            CHECK(std::abs(f_peak - 5.56) <= 2 * step);  // photon line far out
        } else {
            CHECK(std::abs(f_peak - 5.56) <= 0.03);  // ridge stays near the crossing
        }
    }
}

TEST_CASE("sweep determinism and normalization") {
    const HybridSystem sys = default_three_mode_system();
    SweepGrid grid{SweepGrid::linspace(0.08, 0.2, 60), SweepGrid::linspace(4.0, 7.5, 80)};

    SweepOptions one;
    one.workers = 1;
    SweepOptions eight;
    eight.workers = 8;
    const SpectrumMap a = sweep_spectrum(sys, grid, SpectrumVariant::multimode, one);
    const SpectrumMap b = sweep_spectrum(sys, grid, SpectrumVariant::multimode, eight);
    CHECK((a.values == b.values).all());
    CHECK(a.norm_scale == b.norm_scale);

    CHECK(a.values.maxCoeff() == doctest::Approx(1.0));
    CHECK(a.values.minCoeff() >= 0.0);
    CHECK(a.values.isFinite().all());

    SweepOptions raw;
    raw.normalize = false;
    const SpectrumMap c = sweep_spectrum(sys, grid, SpectrumVariant::multimode, raw);
    CHECK(c.norm_scale == 1.0);
    CHECK(c.values.maxCoeff() == doctest::Approx(a.norm_scale));
}

TEST_CASE("lossless exact pole is clamped and flagged") {
    HybridSystem sys = default_three_mode_system();
    sys.magnon.alpha_in = 0.0;
    for (auto& m : sys.modes) m.beta_in = 0.0;
    for (auto& c : sys.couplings) {
        c.decomp = CouplingDecomposition{};
        c.gamma = 1.0;  // 2*beta would vanish
    }
    // place a grid line exactly on the bare P2 resonance
    SweepGrid grid{SweepGrid::linspace(0.08, 0.09, 2), {5.0, 5.56, 6.0}};
    const SpectrumMap map = sweep_spectrum(sys, grid, SpectrumVariant::multimode);
    CHECK(map.saturated.size() == 2);
    CHECK(map.values.isFinite().all());
}

TEST_CASE("2x2 decoupled sweep equals the closed form everywhere") {
    const HybridSystem sys = default_three_mode_system();
    HybridSystem zero = sys;
    for (auto& c : zero.couplings) c.decomp = CouplingDecomposition{};
    SweepGrid grid{{0.1, 0.2}, {5.0, 6.0}};
    SweepOptions raw;
    raw.normalize = false;
    raw.mode_index = 1;
    const SpectrumMap map = sweep_spectrum(zero, grid, SpectrumVariant::single, raw);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            const double omega = rad_from_ghz(grid.freq_GHz[static_cast<std::size_t>(j)]);
            const double bare = bare_response(omega, zero.modes[1], zero.gamma_n(1));
            CHECK(map.values(i, j) == doctest::Approx(bare).epsilon(1e-12));
        }
}
