// coupling.hpp — coupling-constant algebra and the hybrid eigenproblem.
//
// Two solvers share one determinant convention: the pairwise closed form
//   E+- = (wr~ + wn~)/2 +- (1/2) sqrt((wr~ - wn~)^2 + 2 w_m w_n K^2)
// and the (N+1)x(N+1) coupled-mode matrix whose off-diagonal blocks are
// scaled by 1/sqrt(2) so that its 2x2 determinant reproduces exactly
//   (w - wr~)(w - wn~) - (1/2) w_m w_n K^2.
// Real K: coherent coupling (level repulsion). Imaginary K: dissipative
// coupling (level attraction with linewidth splitting).

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "pmc/magnon.hpp"
#include "pmc/photon.hpp"

namespace pmc {

// ----------------------------- coupling constants ---------------------------

// Dimensionless complex K. Values are O(1e-2); |K| >= 1 almost always means a
// unit mistake, so construction enforces the bound unless explicitly waived.
struct CouplingConstant {
    Complex value{0.0, 0.0};

    CouplingConstant() = default;
    explicit CouplingConstant(Complex k, bool allow_large = false);
};

// Faraday / Ampere / Lenz microscopic rates; K^2 ~= k_F (k_A - k_L).
struct MicroRates {
    double k_F = 0.0;
    double k_A = 0.0;
    double k_L = 0.0;
};

// Coherent/dissipative split; K^2 = k_c^2 - k_d^2.
struct CoherentDissipativeRates {
    double k_c = 0.0;
    double k_d = 0.0;
};

struct CouplingDecomposition {
    Complex k_MP{0.0, 0.0};  // direct photon-magnon constant
    double k_PP = 0.0;       // magnon-mediated indirect photon-photon constant
    std::optional<MicroRates> micro;
    std::optional<CoherentDissipativeRates> rates;

    Complex K_squared() const noexcept { return k_MP * k_MP + k_PP * k_PP; }

    // Checks k_PP >= 0 and, when micro parameters are present, that both
    // micro forms of K^2 agree with k_MP^2 + k_PP^2 to 5% relative.
    void validate() const;
};

// K = sqrt(k_MP^2 + k_PP^2); root with nonnegative real part, else
// nonnegative imaginary part.
CouplingConstant effective_coupling(const CouplingDecomposition& d, bool allow_large = false);

// k_PP from the three pairwise constants: Euclidean norm.
double kpp_from_pairs(double k12, double k13, double k23);

// k_PP^2 ~= sigma k^2 cos(psi). Negative values are meaningful (destructive
// indirect path), so the signed square is the primary result.
struct PhaseCoupling {
    double kpp_squared = 0.0;
    // sqrt(kpp_squared) when nonnegative; 0 otherwise (query kpp_squared for sign).
    double kpp() const noexcept;
};
PhaseCoupling kpp_from_phase(double k, const PhotonPhaseProfile& profile);

// ------------------------------- hybrid system ------------------------------

// Per-mode coupling entry: the decomposition plus the coupling-induced magnon
// damping and an optional Gamma_n override (default 2 beta_n).
struct ModeCoupling {
    CouplingDecomposition decomp;
    double alpha_cp = 0.0;
    std::optional<double> gamma;
    std::optional<double> quoted_k_PP;  // published companion value, for cross-checks
    bool allow_large = false;
};

struct HybridSystem {
    MagnonParams magnon;
    std::vector<PhotonMode> modes;        // sorted by ascending f_n
    std::vector<ModeCoupling> couplings;  // one entry per mode

    std::size_t size() const noexcept { return modes.size(); }

    // Gamma_n ~= 2 beta_n unless overridden.
    double gamma_n(std::size_t n) const;

    // Magnon parameters with this mode's coupling-induced damping applied.
    MagnonParams magnon_for_mode(std::size_t n) const;

    void validate() const;  // throws std::domain_error / std::invalid_argument
};

// The measured three-ISRR/YIG system: modes at 4.44/5.56/7.02 GHz with the
// fitted per-center couplings.
HybridSystem default_three_mode_system();

// ------------------------------ pairwise solver -----------------------------

// Complex eigenvalues of one magnon-photon pair. Inputs in rad/s; K2 = K^2.
// Labeling: E_plus has the larger real part; when the real parts coincide
// (level attraction) E_plus is the longer-lived branch (smaller |Im|), ties
// by ascending imaginary part.
std::pair<Complex, Complex> pairwise_branches(Complex omega_r_tilde, Complex omega_n_tilde,
                                              double omega_m, double omega_n, Complex K2);

// Pairwise branches of mode n of a system at field h (per-mode alpha_cp applied).
std::pair<Complex, Complex> pairwise_branches(const HybridSystem& sys, std::size_t n,
                                              FieldPoint h);

// ----------------------------- multimode solver -----------------------------

// Coupled-mode matrix M(omega) acting on (m+, J_1+, ..., J_N+):
//   row 0:  [omega - wr~,  w_m K_1^2 / sqrt2, ..., w_m K_N^2 / sqrt2]
//   row n:  [w_n / sqrt2,  0, ..., omega - wn~, ..., 0]
// The sqrt2 split keeps det equal to the pairwise convention above.
Eigen::MatrixXcd build_coupling_matrix(const HybridSystem& sys, Complex omega, FieldPoint h);

// det M(omega) evaluated directly from the arrowhead structure (no expansion).
Complex coupling_matrix_determinant(const HybridSystem& sys, Complex omega, FieldPoint h);

// All N+1 roots of det M(omega) = 0 at one field point, via companion-matrix
// eigendecomposition of the expanded polynomial plus Newton polishing.
// Roots are sorted by ascending real part. Every root is verified against
// the determinant (backward-error residual < 1e-9) or NumericalError is
// thrown carrying the residuals.
std::vector<Complex> multimode_eigenvalues_at(const HybridSystem& sys, FieldPoint h);

// Eigenvalue trajectories over a field sweep, branch-ordered by continuity
// (nearest-neighbor matching between consecutive field points).
struct EigenBranches {
    std::vector<double> field_T;
    // eigenvalues[i][b]: branch b at field i, rad/s, E = omega - i*delta_omega
    std::vector<std::vector<Complex>> eigenvalues;

    std::size_t branches() const noexcept {
        return eigenvalues.empty() ? 0 : eigenvalues.front().size();
    }
    double frequency_ghz(std::size_t i, std::size_t b) const {
        return ghz_from_rad(eigenvalues[i][b].real());
    }
    // Half-linewidth -Im(E)/2pi in GHz; negative for anti-damped branches.
    double linewidth_ghz(std::size_t i, std::size_t b) const {
        return ghz_from_rad(-eigenvalues[i][b].imag());
    }
};

EigenBranches multimode_eigenvalues(const HybridSystem& sys, std::span<const double> field_T);

} // namespace pmc
