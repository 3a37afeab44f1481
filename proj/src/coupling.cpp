#include "pmc/coupling.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <stdexcept>
#include <string>

#include "pmc/errors.hpp"

namespace pmc {

namespace {

// Internal frequency scale: polynomial work runs in units of 2pi GHz so the
// companion matrix stays well conditioned (roots O(1..10)).
constexpr double freq_scale = two_pi * 1e9;

constexpr double inv_sqrt2 = 0.70710678118654752440;

} // namespace

// ----------------------------- coupling constants ---------------------------

CouplingConstant::CouplingConstant(Complex k, bool allow_large) : value(k) {
    if (!allow_large && std::abs(k) >= 1.0)
        throw std::domain_error("coupling constant |K| = " + std::to_string(std::abs(k)) +
                                " >= 1; values are O(1e-2) in this parameter regime "
                                "(set allow_large to override)");
}

void CouplingDecomposition::validate() const {
    if (k_PP < 0.0)
        throw std::domain_error("coupling.k_PP must be >= 0, got " + std::to_string(k_PP));
    const Complex k2 = K_squared();
    auto check = [&](double micro_k2, const char* form) {
        const double tol = 0.05 * std::max({std::abs(k2), std::abs(micro_k2), 1e-12});
        if (std::abs(k2 - micro_k2) > tol)
            throw std::domain_error(std::string("coupling micro-parameters disagree with ") +
                                    "k_MP^2 + k_PP^2 via " + form);
    };
    if (micro) check(micro->k_F * (micro->k_A - micro->k_L), "k_F (k_A - k_L)");
    if (rates) check(rates->k_c * rates->k_c - rates->k_d * rates->k_d, "k_c^2 - k_d^2");
}

CouplingConstant effective_coupling(const CouplingDecomposition& d, bool allow_large) {
    Complex k = std::sqrt(d.K_squared());
    // Principal sqrt already has Re >= 0; fix the Re == 0 sign so the
    // imaginary part is nonnegative.
    if (k.real() == 0.0 && k.imag() < 0.0) k = -k;
    if (k.real() < 0.0) k = -k;
    return CouplingConstant(k, allow_large);
}

double kpp_from_pairs(double k12, double k13, double k23) {
    if (k12 < 0.0 || k13 < 0.0 || k23 < 0.0)
        throw std::domain_error("kpp_from_pairs: pairwise constants must be >= 0");
    return std::sqrt(k12 * k12 + k13 * k13 + k23 * k23);
}

double PhaseCoupling::kpp() const noexcept {
    return kpp_squared > 0.0 ? std::sqrt(kpp_squared) : 0.0;
}

PhaseCoupling kpp_from_phase(double k, const PhotonPhaseProfile& profile) {
    if (k < 0.0) throw std::domain_error("kpp_from_phase: k must be >= 0");
    profile.validate();
    return PhaseCoupling{profile.sigma * k * k * std::cos(rad_from_deg(profile.psi_deg))};
}

// ------------------------------- hybrid system ------------------------------

double HybridSystem::gamma_n(std::size_t n) const {
    const auto& c = couplings.at(n);
    return c.gamma ? *c.gamma : 2.0 * modes.at(n).beta_in;
}

MagnonParams HybridSystem::magnon_for_mode(std::size_t n) const {
    return magnon.with_alpha_cp(couplings.at(n).alpha_cp);
}

void HybridSystem::validate() const {
    magnon.validate();
    if (modes.empty()) throw std::invalid_argument("system requires at least one photon mode");
    if (couplings.size() != modes.size())
        throw std::invalid_argument("system has " + std::to_string(modes.size()) +
                                    " modes but " + std::to_string(couplings.size()) +
                                    " coupling entries");
    for (std::size_t n = 0; n < modes.size(); ++n) {
        modes[n].validate();
        if (n > 0 && !(modes[n].f_n > modes[n - 1].f_n))
            throw std::invalid_argument("modes must be sorted by strictly ascending f_GHz");
        couplings[n].decomp.validate();
        if (couplings[n].alpha_cp < 0.0)
            throw std::domain_error("coupling.alpha_cp must be >= 0 for mode " + modes[n].label);
        if (couplings[n].gamma && !(*couplings[n].gamma > 0.0))
            throw std::domain_error("coupling.gamma must be > 0 for mode " + modes[n].label);
        effective_coupling(couplings[n].decomp, couplings[n].allow_large);  // |K| bound
    }
}

HybridSystem default_three_mode_system() {
    HybridSystem sys;
    sys.magnon = MagnonParams{};  // 28 GHz/T, 0.172 T, 3.2e-4
    sys.modes = {
        PhotonMode{"P1", 4.44, 2.3e-3, std::nullopt},
        PhotonMode{"P2", 5.56, 1.8e-3, std::nullopt},
        PhotonMode{"P3", 7.02, 2.1e-3, std::nullopt},
    };
    // All direct constants fitted to 0.008i; k_PP chosen so the net constants
    // come out at the fitted values K1 = 0.008i, K2 = 0.004i, K3 = 0.01.
    // quoted_k_PP keeps the published companion numbers for cross-checks
    // (the K2 entry is knowingly inconsistent with them; see README).
    const Complex k_mp{0.0, 0.008};
    sys.couplings = {
        ModeCoupling{.decomp = {.k_MP = k_mp, .k_PP = 0.0}, .alpha_cp = 0.0},
        ModeCoupling{.decomp = {.k_MP = k_mp, .k_PP = std::sqrt(4.8e-5)},
                     .alpha_cp = 0.01,
                     .quoted_k_PP = 0.005},
        ModeCoupling{.decomp = {.k_MP = k_mp, .k_PP = std::sqrt(1.64e-4)},
                     .alpha_cp = 2e-4,
                     .quoted_k_PP = 0.013},
    };
    sys.validate();
    return sys;
}

// ------------------------------ pairwise solver -----------------------------

namespace {

std::pair<Complex, Complex> label_branches(Complex a, Complex b) {
    const double scale = std::max(std::abs(a.real()), std::abs(b.real()));
    const bool re_coincide = std::abs(a.real() - b.real()) <= 1e-12 * scale;
    bool a_is_plus;
    if (!re_coincide)
        a_is_plus = a.real() > b.real();
    else if (std::abs(a.imag()) != std::abs(b.imag()))
        a_is_plus = std::abs(a.imag()) < std::abs(b.imag());
    else
        a_is_plus = a.imag() < b.imag();
    return a_is_plus ? std::make_pair(a, b) : std::make_pair(b, a);
}

} // namespace

std::pair<Complex, Complex> pairwise_branches(Complex omega_r_tilde, Complex omega_n_tilde,
                                              double omega_m, double omega_n, Complex K2) {
    if (!(omega_m > 0.0) || !(omega_n > 0.0))
        throw std::domain_error("pairwise_branches: omega_m and omega_n must be > 0");
    const Complex mean = 0.5 * (omega_r_tilde + omega_n_tilde);
    const Complex diff = omega_r_tilde - omega_n_tilde;
    const Complex root = std::sqrt(diff * diff + 2.0 * omega_m * omega_n * K2);
    return label_branches(mean + 0.5 * root, mean - 0.5 * root);
}

std::pair<Complex, Complex> pairwise_branches(const HybridSystem& sys, std::size_t n,
                                              FieldPoint h) {
    const Complex wr = magnon_complex_frequency(h, sys.magnon_for_mode(n));
    const Complex wn = photon_complex_frequency(sys.modes.at(n));
    return pairwise_branches(wr, wn, sys.magnon.omega_m(), sys.modes[n].omega_n(),
                             sys.couplings[n].decomp.K_squared());
}

// ----------------------------- multimode solver -----------------------------

Eigen::MatrixXcd build_coupling_matrix(const HybridSystem& sys, Complex omega, FieldPoint h) {
    const auto N = static_cast<Eigen::Index>(sys.size());
    if (N < 1) throw std::invalid_argument("build_coupling_matrix: N >= 1 required");
    const Complex wr = magnon_complex_frequency(h, sys.magnon);
    const double wm = sys.magnon.omega_m();

    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(N + 1, N + 1);
    m(0, 0) = omega - wr;
    for (Eigen::Index n = 0; n < N; ++n) {
        const auto idx = static_cast<std::size_t>(n);
        m(0, n + 1) = wm * sys.couplings[idx].decomp.K_squared() * inv_sqrt2;
        m(n + 1, 0) = sys.modes[idx].omega_n() * inv_sqrt2;
        m(n + 1, n + 1) = omega - photon_complex_frequency(sys.modes[idx]);
    }
    return m;
}

Complex coupling_matrix_determinant(const HybridSystem& sys, Complex omega, FieldPoint h) {
    const std::size_t N = sys.size();
    const Complex wr = magnon_complex_frequency(h, sys.magnon);
    const double wm = sys.magnon.omega_m();

    Complex det = omega - wr;
    for (std::size_t n = 0; n < N; ++n)
        det *= omega - photon_complex_frequency(sys.modes[n]);
    for (std::size_t n = 0; n < N; ++n) {
        Complex term = 0.5 * wm * sys.modes[n].omega_n() * sys.couplings[n].decomp.K_squared();
        for (std::size_t m = 0; m < N; ++m)
            if (m != n) term *= omega - photon_complex_frequency(sys.modes[m]);
        det -= term;
    }
    return det;
}

namespace {

// Multiplies the monic polynomial given by coeffs (ascending powers) by (x - r).
void multiply_linear_factor(std::vector<Complex>& coeffs, Complex r) {
    coeffs.push_back(Complex{0.0, 0.0});
    for (std::size_t i = coeffs.size(); i-- > 1;)
        coeffs[i] = coeffs[i - 1] - r * coeffs[i];
    coeffs[0] *= -r;
}

// The arrowhead determinant in scaled units: complex bare frequencies plus
// the coupling weights c_n = (1/2) w_m w_n K_n^2.
struct ScaledSystem {
    Complex magnon;
    std::vector<Complex> photon;
    std::vector<Complex> weight;
};

ScaledSystem scaled_system(const HybridSystem& sys, FieldPoint h) {
    ScaledSystem s;
    s.magnon = magnon_complex_frequency(h, sys.magnon) / freq_scale;
    const double wm = sys.magnon.omega_m() / freq_scale;
    for (std::size_t n = 0; n < sys.size(); ++n) {
        s.photon.push_back(photon_complex_frequency(sys.modes[n]) / freq_scale);
        s.weight.push_back(0.5 * wm * (sys.modes[n].omega_n() / freq_scale) *
                           sys.couplings[n].decomp.K_squared());
    }
    return s;
}

// det(x) = (x - wr) prod_n (x - wn) - sum_n c_n prod_{m != n} (x - wm),
// evaluated in product form (exact at decoupled roots) with its derivative.
Complex scaled_determinant(const ScaledSystem& s, Complex x, Complex* derivative = nullptr) {
    const std::size_t N = s.photon.size();
    Complex p{1.0, 0.0};
    for (std::size_t n = 0; n < N; ++n) p *= x - s.photon[n];

    Complex det = (x - s.magnon) * p;
    Complex ddet = p;
    for (std::size_t j = 0; j < N; ++j) {
        Complex q{1.0, 0.0};
        for (std::size_t m = 0; m < N; ++m)
            if (m != j) q *= x - s.photon[m];
        ddet += (x - s.magnon) * q;
    }
    for (std::size_t n = 0; n < N; ++n) {
        Complex q{1.0, 0.0};
        for (std::size_t m = 0; m < N; ++m)
            if (m != n) q *= x - s.photon[m];
        det -= s.weight[n] * q;
        if (derivative) {
            for (std::size_t j = 0; j < N; ++j) {
                if (j == n) continue;
                Complex qq{1.0, 0.0};
                for (std::size_t m = 0; m < N; ++m)
                    if (m != n && m != j) qq *= x - s.photon[m];
                ddet -= s.weight[n] * qq;
            }
        }
    }
    if (derivative) *derivative = ddet;
    return det;
}

// Expansion of the arrowhead determinant as a monic degree-(N+1) polynomial
// (ascending coefficients, scaled units).
std::vector<Complex> scaled_determinant_poly(const ScaledSystem& s) {
    const std::size_t N = s.photon.size();
    std::vector<Complex> poly{Complex{1.0, 0.0}};
    multiply_linear_factor(poly, s.magnon);
    for (std::size_t n = 0; n < N; ++n) multiply_linear_factor(poly, s.photon[n]);

    for (std::size_t n = 0; n < N; ++n) {
        std::vector<Complex> q{Complex{1.0, 0.0}};
        for (std::size_t m = 0; m < N; ++m)
            if (m != n) multiply_linear_factor(q, s.photon[m]);
        for (std::size_t i = 0; i < q.size(); ++i) poly[i] -= s.weight[n] * q[i];
    }
    return poly;
}

// Scale of the determinant evaluation at x: sum of |a_k| |x|^k. Dividing
// |det(x)| by it gives the standard backward-error residual, which stays
// meaningful even where individual matrix rows become null (decoupled limit).
double poly_magnitude(const std::vector<Complex>& coeffs, Complex x) {
    const double ax = std::abs(x);
    double scale = 0.0;
    double power = 1.0;
    for (const Complex& c : coeffs) {
        scale += std::abs(c) * power;
        power *= ax;
    }
    return scale;
}

} // namespace

std::vector<Complex> multimode_eigenvalues_at(const HybridSystem& sys, FieldPoint h) {
    sys.validate();
    const std::size_t N = sys.size();
    if (N > 3)
        std::cerr << "note: N = " << N << " photon modes; the validated regime is N <= 3\n";

    const ScaledSystem scaled = scaled_system(sys, h);
    const auto poly = scaled_determinant_poly(scaled);
    const auto deg = static_cast<Eigen::Index>(poly.size() - 1);

    // Companion matrix of the monic polynomial.
    Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(deg, deg);
    for (Eigen::Index i = 0; i + 1 < deg; ++i) companion(i + 1, i) = Complex{1.0, 0.0};
    for (Eigen::Index i = 0; i < deg; ++i) companion(i, deg - 1) = -poly[static_cast<std::size_t>(i)];

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
        throw NumericalError("multimode_eigenvalues: companion eigendecomposition failed");

    std::vector<Complex> roots(static_cast<std::size_t>(deg));
    for (Eigen::Index i = 0; i < deg; ++i) {
        Complex x = solver.eigenvalues()(i);
        // Newton steps against the product-form determinant, which is exact
        // at the decoupled roots the expanded coefficients slightly blur.
        // Keep a step only while it reduces |det|.
        for (int it = 0; it < 4; ++it) {
            Complex ddet;
            const Complex det = scaled_determinant(scaled, x, &ddet);
            if (det == Complex{0.0, 0.0} || ddet == Complex{0.0, 0.0}) break;
            const Complex x_next = x - det / ddet;
            if (std::abs(scaled_determinant(scaled, x_next)) < std::abs(det))
                x = x_next;
            else
                break;
        }
        roots[static_cast<std::size_t>(i)] = x;
    }

    std::vector<double> residuals(roots.size());
    bool ok = true;
    for (std::size_t i = 0; i < roots.size(); ++i) {
        residuals[i] =
            std::abs(scaled_determinant(scaled, roots[i])) / poly_magnitude(poly, roots[i]);
        if (!(residuals[i] < 1e-9)) ok = false;
    }
    if (!ok)
        throw NumericalError("multimode_eigenvalues: root residual exceeds 1e-9", residuals);

    for (auto& r : roots) r *= freq_scale;
    std::sort(roots.begin(), roots.end(), [](Complex a, Complex b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return roots;
}

namespace {

// Branch assignment between consecutive field points: the permutation of the
// new roots closest (summed |dE|) to the previous ones. Branch counts here
// are <= 4, so exhaustive search is cheap; fall back to greedy matching for
// oversized systems.
std::vector<Complex> match_branches(const std::vector<Complex>& prev,
                                    std::vector<Complex> next) {
    const std::size_t n = prev.size();
    std::vector<std::size_t> index(n);
    std::iota(index.begin(), index.end(), 0);

    if (n <= 5) {
        std::vector<std::size_t> best = index;
        double best_cost = -1.0;
        do {
            double cost = 0.0;
            for (std::size_t b = 0; b < n; ++b) cost += std::abs(next[index[b]] - prev[b]);
            if (best_cost < 0.0 || cost < best_cost) {
                best_cost = cost;
                best = index;
            }
        } while (std::next_permutation(index.begin(), index.end()));
        std::vector<Complex> out(n);
        for (std::size_t b = 0; b < n; ++b) out[b] = next[best[b]];
        return out;
    }

    std::vector<bool> used(n, false);
    std::vector<Complex> out(n);
    for (std::size_t b = 0; b < n; ++b) {
        std::size_t pick = 0;
        double best = -1.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (used[j]) continue;
            const double d = std::abs(next[j] - prev[b]);
            if (best < 0.0 || d < best) {
                best = d;
                pick = j;
            }
        }
        used[pick] = true;
        out[b] = next[pick];
    }
    return out;
}

} // namespace

EigenBranches multimode_eigenvalues(const HybridSystem& sys, std::span<const double> field_T) {
    EigenBranches out;
    out.field_T.assign(field_T.begin(), field_T.end());
    out.eigenvalues.reserve(field_T.size());
    for (std::size_t i = 0; i < field_T.size(); ++i) {
        auto roots = multimode_eigenvalues_at(sys, FieldPoint{field_T[i]});
        if (i > 0) roots = match_branches(out.eigenvalues.back(), std::move(roots));
        out.eigenvalues.push_back(std::move(roots));
    }
    return out;
}

} // namespace pmc
