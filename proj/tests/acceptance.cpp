// acceptance — integration suite for the toolkit's acceptance criteria.
// Prints one [PASS]/[FAIL] line per criterion (plus [SKIP] for checks whose
// hardware preconditions are not met) and exits nonzero if any criterion
// fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "pmc/io.hpp"
#include "pmc/parallel.hpp"

using namespace pmc;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(bool pass, int id, const std::string& title, const std::string& detail) {
    std::printf("[%s] %d. %s: %s\n", pass ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
    if (!pass) ++failures;
}

void report_skip(const std::string& id, const std::string& title, const std::string& detail) {
    std::printf("[SKIP] %s. %s: %s\n", id.c_str(), title.c_str(), detail.c_str());
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof buf, format, args);
    va_end(args);
    return buf;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------------

void criterion_1_kittel() {
    const auto t0 = std::chrono::steady_clock::now();
    const MagnonParams p;  // 0.172 T, 28 GHz/T
    bool pass = true;

    const double f = kittel_frequency(FieldPoint{0.13039}, p);
    const double df_mhz = std::abs(f - 5.56) * 1e3;
    pass = pass && df_mhz <= 1.0;

    double worst = 0.0;
    for (int i = 0; i <= 400; ++i) {
        const double h = std::pow(10.0, -4.0 + 4.0 * i / 400.0);
        const double back = kittel_field(kittel_frequency(FieldPoint{h}, p), p).mu0_H;
        worst = std::max(worst, std::abs(back - h) / h);
    }
    pass = pass && worst <= 1e-12;

    const double dt = seconds_since(t0);
    pass = pass && dt < 1.0;
    report(pass, 1, "Kittel reproduction",
           fmt("f(0.13039 T) = %.6f GHz (|df| = %.3f MHz <= 1), round-trip worst %.2e <= 1e-12, "
               "%.2f s < 1 s",
               f, df_mhz, worst, dt));
}

void criterion_2_decoupled() {
    const auto t0 = std::chrono::steady_clock::now();
    HybridSystem zero = default_three_mode_system();
    for (auto& c : zero.couplings) c.decomp = CouplingDecomposition{};

    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const FieldPoint h{0.05 + 0.25 * i / 49.0};
        const auto roots = multimode_eigenvalues_at(zero, h);
        const std::vector<Complex> bare{magnon_complex_frequency(h, zero.magnon),
                                        photon_complex_frequency(zero.modes[0]),
                                        photon_complex_frequency(zero.modes[1]),
                                        photon_complex_frequency(zero.modes[2])};
        for (const Complex& r : roots) {
            double best = 1e300;
            for (const Complex& b : bare) best = std::min(best, std::abs(r - b) / std::abs(b));
            worst = std::max(worst, best);
        }
    }
    const double dt = seconds_since(t0);
    report(worst <= 1e-12 && dt < 1.0, 2, "Decoupled-limit exactness",
           fmt("worst relative root error %.2e <= 1e-12 at 50 fields, %.2f s < 1 s", worst, dt));
}

void criterion_3_pairwise_equivalence() {
    const auto t0 = std::chrono::steady_clock::now();
    const HybridSystem base = default_three_mode_system();
    double worst = 0.0;
    for (std::size_t n = 0; n < 3; ++n) {
        const HybridSystem one = oracles::single_mode_system(base, n);
        const double hc = kittel_field(one.modes[0].f_n, one.magnon).mu0_H;
        for (int i = 0; i < 200; ++i) {
            const FieldPoint h{hc - 0.02 + 0.04 * i / 199.0};
            const auto roots = multimode_eigenvalues_at(one, h);
            const auto [ep, em] = pairwise_branches(one, 0, h);
            for (const Complex& r : roots)
                worst = std::max(worst,
                                 std::min(std::abs(r - ep), std::abs(r - em)) / std::abs(r));
        }
    }
    const double dt = seconds_since(t0);
    report(worst <= 1e-10 && dt < 5.0, 3, "Pairwise/multimode oracle equivalence",
           fmt("worst relative deviation %.2e <= 1e-10 over 3 x 200 fields, %.2f s < 5 s", worst,
               dt));
}

void criterion_4_gap() {
    const HybridSystem sys = default_three_mode_system();
    const MagnonParams mg = sys.magnon;
    const double wm = mg.omega_m();
    const double wn = sys.modes[2].omega_n();

    // zero-damping closed form at the crossing
    const auto [ep, em] =
        pairwise_branches(Complex{wn, 0.0}, Complex{wn, 0.0}, wm, wn, Complex{1e-4, 0.0});
    const double gap_mhz = ghz_from_rad(ep.real() - em.real()) * 1e3;
    const bool formula_ok = std::abs(gap_mhz - 82.2) <= 0.822;

    // per-mode |S21| cut on a 2 MHz grid: peak separation within one step
    const double step_mhz = 2.0;
    const FieldPoint hc = kittel_field(7.02, mg);
    SweepGrid grid{{hc.mu0_H - 1e-4, hc.mu0_H, hc.mu0_H + 1e-4},
                   SweepGrid::linspace(6.86, 7.18, 161)};
    SweepOptions opt;
    opt.mode_index = 2;
    const SpectrumMap map = sweep_spectrum(sys, grid, SpectrumVariant::per_mode, opt);
    const RidgeData ridges = extract_ridges(map, 6.87, 7.17);
    double sep_mhz = -1.0;
    for (const auto& p : ridges.points)
        if (p.mu0_H == hc.mu0_H && p.f_upper && p.f_lower)
            sep_mhz = (*p.f_upper - *p.f_lower) * 1e3;
    const bool peaks_ok = sep_mhz > 0.0 && std::abs(sep_mhz - gap_mhz) <= step_mhz;

    report(formula_ok && peaks_ok, 4, "Gap closed form",
           fmt("sqrt(2 wm w3) K / 2pi = %.3f MHz (82.2 +- 1%%), |S21| peak separation "
               "%.3f MHz within one 2 MHz grid step",
               gap_mhz, sep_mhz));
}

void criterion_5_regimes() {
    const auto t0 = std::chrono::steady_clock::now();
    const HybridSystem sys = default_three_mode_system();
    const MagnonParams mg = sys.magnon;
    bool pass = true;
    std::string detail;

    const Regime expected[3] = {Regime::CIT_OPPOSITE, Regime::CIA, Regime::CIT_NORMAL};
    for (std::size_t n = 0; n < 3; ++n) {
        const CenterClassification c = classify_center(sys, n);
        pass = pass && c.regime == expected[n];
        detail += std::string(sys.modes[n].label) + "=" + to_string(c.regime) + " ";
    }

    // dispersion trajectory characters from the per-center branches
    for (std::size_t n = 0; n < 3; ++n) {
        const double hc = kittel_field(sys.modes[n].f_n, mg).mu0_H;
        const auto fields = SweepGrid::linspace(hc - 0.015, hc + 0.015, 601);
        double min_regap = 1e300, regap_c = 0.0, lwgap_c = 0.0, lwgap_edge = 0.0;
        for (std::size_t i = 0; i < fields.size(); ++i) {
            const auto [ep, em] = pairwise_branches(sys, n, FieldPoint{fields[i]});
            const double regap = ghz_from_rad(ep.real() - em.real());
            const double lwgap = std::abs(ghz_from_rad(ep.imag() - em.imag()));
            min_regap = std::min(min_regap, regap);
            if (i == 0) lwgap_edge = lwgap;
            if (i == fields.size() / 2) {
                regap_c = regap;
                lwgap_c = lwgap;
            }
        }
        const CouplingConstant K = effective_coupling(sys.couplings[n].decomp);
        const double g0 = ghz_from_rad(std::sqrt(2.0 * mg.omega_m() * sys.modes[n].omega_n()) *
                                       std::abs(K.value));
        switch (n) {
            case 0:  // real parts attract/merge, linewidths repel
                pass = pass && regap_c < 0.02 * g0 && lwgap_c > 3.0 * lwgap_edge;
                break;
            case 1:  // real parts cross, linewidths repel near the center
                pass = pass && regap_c < 0.02 * g0 && lwgap_c > lwgap_edge;
                break;
            case 2:  // real parts repel, linewidths cross
                pass = pass && min_regap > 0.5 * g0 && lwgap_c < 0.2 * lwgap_edge;
                break;
        }
    }

    // Fig.-4-style 400x400 per-center maps within the time budget
    SweepOptions opt;
    opt.workers = default_workers();
    for (std::size_t n = 0; n < 3; ++n) {
        const double hc = kittel_field(sys.modes[n].f_n, mg).mu0_H;
        opt.mode_index = n;
        SweepGrid grid{SweepGrid::linspace(hc - 0.02, hc + 0.02, 400),
                       SweepGrid::linspace(sys.modes[n].f_n - 0.15, sys.modes[n].f_n + 0.15, 400)};
        const SpectrumMap map = sweep_spectrum(sys, grid, SpectrumVariant::per_mode, opt);
        pass = pass && map.values.isFinite().all();
    }
    const double dt = seconds_since(t0);
    pass = pass && dt < 10.0;
    report(pass, 5, "Regime reproduction", detail + fmt("with matching trajectories, %.2f s < 10 s", dt));
}

void criterion_6_kpp() {
    FitResult normal;
    normal.K_abs = 0.01;
    normal.kind = CouplingKind::REAL;
    const DecompositionResult d3 = decompose_coupling(normal, Complex{0.0, 0.008}, 0.013);
    const bool normal_ok =
        std::abs(d3.decomp.k_PP - 0.0128) <= 0.0005 && !d3.quoted_mismatch && !d3.complex_k_PP;

    FitResult cia;
    cia.K_abs = 0.004;
    cia.kind = CouplingKind::IMAGINARY;
    const DecompositionResult d2 = decompose_coupling(cia, Complex{0.0, 0.008}, 0.005);
    const bool cia_ok = std::abs(d2.decomp.k_PP - 0.0069) <= 0.0005 && d2.quoted_mismatch;

    report(normal_ok && cia_ok, 6, "k_PP arithmetic",
           fmt("normal center k_PP = %.4f (0.0128 +- 0.0005, matches quoted 0.013), "
               "absorption center k_PP = %.4f with documented-inconsistency flag vs quoted 0.005",
               d3.decomp.k_PP, d2.decomp.k_PP));
}

void criterion_7_phase_diagram() {
    bool pass = true;

    const double psi0 = cia_boundary(2.0, 0.02, 0.0).value_or(-1.0);
    pass = pass && std::abs(psi0 - 60.0) <= 0.1;

    // existence limit by bisection on the boundary
    double lo = 0.0, hi = 0.06;
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        (cia_boundary(2.0, 0.02, mid) ? lo : hi) = mid;
    }
    const double d_max = 0.5 * (lo + hi);
    pass = pass && std::abs(d_max - 0.0283) <= 1e-4;

    // monotone boundary shifts with sigma (any d) and with k (d > 0; at d = 0
    // the boundary acos(1/sigma) is k-independent)
    for (double d : {0.0, 0.005, 0.01}) {
        double prev = -1.0;
        for (double sigma : {1.5, 2.0, 3.0, 4.0}) {
            const auto psi = cia_boundary(sigma, 0.02, d);
            pass = pass && psi.has_value() && *psi > prev;
            prev = psi.value_or(prev);
        }
    }
    for (double d : {0.005, 0.01}) {
        double prev = -1.0;
        for (double k : {0.01, 0.02, 0.04}) {
            const auto psi = cia_boundary(2.0, k, d);
            if (!psi) {
                prev = -1.0;
                pass = pass && d > k * std::sqrt(2.0);
                continue;
            }
            pass = pass && *psi > prev;
            prev = *psi;
        }
    }
    report(pass, 7, "Phase diagram",
           fmt("psi*(d=0) = %.4f deg (60 +- 0.1), existence limit d_max = %.6f (0.0283 +- 1e-4), "
               "monotone shifts over sigma in {1.5,2,3,4} and k in {0.01,0.02,0.04}",
               psi0, d_max));
}

void criterion_8_fit_round_trips() {
    const auto t0 = std::chrono::steady_clock::now();
    const HybridSystem sys = default_three_mode_system();
    const MagnonParams mg = sys.magnon;
    bool pass = true;

    auto ridges_for = [&](std::size_t n, oracles::Gaussian* noise, double sd) {
        const double hc = kittel_field(sys.modes[n].f_n, mg).mu0_H;
        RidgeData out;
        for (int i = 0; i < 81; ++i) {
            const double h = hc - 0.012 + 0.024 * i / 80.0;
            const auto [ep, em] = pairwise_branches(sys, n, FieldPoint{h});
            RidgePoint p;
            p.mu0_H = h;
            p.f_upper = ghz_from_rad(ep.real()) + (noise ? sd * (*noise)() : 0.0);
            p.f_lower = ghz_from_rad(em.real()) + (noise ? sd * (*noise)() : 0.0);
            out.points.push_back(p);
        }
        return out;
    };

    FitOptions fo;
    fo.workers = default_workers();

    // noiseless: all three parameter sets to 2% with the right kind
    const double k_true[3] = {0.008, 0.004, 0.01};
    const CouplingKind kind_true[3] = {CouplingKind::IMAGINARY, CouplingKind::IMAGINARY,
                                       CouplingKind::REAL};
    std::string detail;
    for (std::size_t n = 0; n < 3; ++n) {
        const FitResult fit = fit_dispersion(ridges_for(n, nullptr, 0.0), mg, sys.modes[n], fo);
        const double err = std::abs(fit.K_abs - k_true[n]) / k_true[n];
        pass = pass && fit.kind == kind_true[n] && err <= 0.02;
        detail += fmt("%s |K|err %.2f%% ", sys.modes[n].label.c_str(), err * 100);
    }

    // noisy CIA set: 100 seeds, medians
    const double noise_sd = 0.01 * sys.modes[1].beta_in * sys.modes[1].f_n;
    std::vector<double> k_err(100), a_err(100);
    for (int seed = 0; seed < 100; ++seed) {
        oracles::Gaussian noise(static_cast<std::uint64_t>(seed) + 1);
        const FitResult fit =
            fit_dispersion(ridges_for(1, &noise, noise_sd), mg, sys.modes[1], fo);
        k_err[static_cast<std::size_t>(seed)] = std::abs(fit.K_abs - 0.004) / 0.004;
        a_err[static_cast<std::size_t>(seed)] = std::abs(fit.alpha_cp - 0.01) / 0.01;
    }
    std::sort(k_err.begin(), k_err.end());
    std::sort(a_err.begin(), a_err.end());
    const double k_med = 0.5 * (k_err[49] + k_err[50]);
    const double a_med = 0.5 * (a_err[49] + a_err[50]);
    pass = pass && k_med <= 0.10 && a_med <= 0.20;

    const double dt = seconds_since(t0);
    pass = pass && dt < 30.0;
    report(pass, 8, "Fit round trips",
           detail + fmt("; noisy CIA medians |K| %.2f%% <= 10%%, alpha_cp %.2f%% <= 20%% "
                        "(100 seeds), %.1f s < 30 s",
                        k_med * 100, a_med * 100, dt));
}

void criterion_9_determinism() {
    const HybridSystem sys = default_three_mode_system();
    const fs::path base = fs::temp_directory_path() / "pmc_acceptance_det";
    fs::remove_all(base);

    bool pass = true;
    std::vector<std::string> sweep_payloads, phase_payloads;
    for (unsigned workers : {1u, 4u, 8u}) {
        const fs::path dir = base / ("w" + std::to_string(workers));
        OutputWriter writer(dir.string(), "{}");

        SweepOptions opt;
        opt.workers = workers;
        SweepGrid grid{SweepGrid::linspace(0.08, 0.2, 80), SweepGrid::linspace(4.0, 7.5, 100)};
        const SpectrumMap map = sweep_spectrum(sys, grid, SpectrumVariant::multimode, opt);
        writer.write_spectrum("map.csv", map);
        sweep_payloads.push_back(slurp(dir / "map.csv"));

        const PhaseDiagram pd =
            phase_diagram(SweepGrid::linspace(0.0, 90.0, 121), SweepGrid::linspace(0.0, 0.06, 81),
                          2.0, 0.02, 5.56, default_gap_tol, workers);
        writer.write_phase_diagram("pd.csv", pd);
        phase_payloads.push_back(slurp(dir / "pd.csv"));
    }
    for (std::size_t i = 1; i < sweep_payloads.size(); ++i) {
        pass = pass && sweep_payloads[i] == sweep_payloads[0];
        pass = pass && phase_payloads[i] == phase_payloads[0];
    }
    report(pass, 9, "Determinism",
           "sweep and phase-diagram payloads byte-identical across workers {1, 4, 8}");
}

void criterion_10_performance() {
    const HybridSystem sys = default_three_mode_system();
    SweepGrid grid{SweepGrid::linspace(0.05, 0.3, 400), SweepGrid::linspace(4.0, 7.5, 400)};

    SweepOptions opt;
    opt.workers = 1;
    auto t0 = std::chrono::steady_clock::now();
    const SpectrumMap single = sweep_spectrum(sys, grid, SpectrumVariant::multimode, opt);
    const double t_single = seconds_since(t0);
    const bool floor_ok = t_single < 5.0;
    report(floor_ok, 10, "Performance floor",
           fmt("400x400 multimode sweep single-threaded in %.3f s < 5 s", t_single));

    const unsigned hw = std::thread::hardware_concurrency();
    if (hw < 4) {
        report_skip("10b", "Parallel speedup",
                    fmt("requires >= 4 hardware threads, this host has %u; "
                        "determinism at 4 workers is still enforced by criterion 9",
                        hw));
        return;
    }
    // a heavier grid keeps the measurement away from threading overhead
    SweepGrid big{SweepGrid::linspace(0.05, 0.3, 1200), SweepGrid::linspace(4.0, 7.5, 1200)};
    opt.workers = 1;
    t0 = std::chrono::steady_clock::now();
    sweep_spectrum(sys, big, SpectrumVariant::multimode, opt);
    const double t1 = seconds_since(t0);
    opt.workers = 4;
    t0 = std::chrono::steady_clock::now();
    sweep_spectrum(sys, big, SpectrumVariant::multimode, opt);
    const double t4 = seconds_since(t0);
    report(t1 / t4 >= 3.0, 10, "Parallel speedup",
           fmt("4-worker speedup %.2fx >= 3x (1 worker %.3f s, 4 workers %.3f s)", t1 / t4, t1,
               t4));
}

} // namespace

int main() {
    std::printf("acceptance suite\n");
    criterion_1_kittel();
    criterion_2_decoupled();
    criterion_3_pairwise_equivalence();
    criterion_4_gap();
    criterion_5_regimes();
    criterion_6_kpp();
    criterion_7_phase_diagram();
    criterion_8_fit_round_trips();
    criterion_9_determinism();
    criterion_10_performance();
    if (failures > 0) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
