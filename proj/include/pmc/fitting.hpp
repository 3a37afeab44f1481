// fitting.hpp — dispersion-ridge extraction and coupling-constant fitting.
//
// The fitter minimizes weighted squared residuals between extracted ridge
// frequencies and the real parts of the pairwise branches, over
// (|K|, alpha_cp, crossing-field offset), for both coupling hypotheses
// (K real / K imaginary); the lower-residual hypothesis wins. Derivative-free
// simplex descent with deterministic restarts: the residual surface has a
// ridge along the sign of K^2 that defeats naive gradient steps.

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "pmc/coupling.hpp"
#include "pmc/errors.hpp"
#include "pmc/transmission.hpp"

namespace pmc {

struct RidgePoint {
    double mu0_H = 0.0;  // T
    std::optional<double> f_upper;  // GHz
    std::optional<double> f_lower;  // GHz
    double weight = 1.0;
};

struct RidgeData {
    std::vector<RidgePoint> points;

    // >= 4 points, strictly increasing fields, positive weights, and at least
    // one branch per point.
    void validate() const;
};

// Up to two |S21| maxima per field column inside [f_min, f_max], located by
// quadratic sub-sample interpolation around the discrete peaks. Columns with
// a single detectable peak record it as f_upper. Weights are peak prominences.
RidgeData extract_ridges(const SpectrumMap& map, double f_min_ghz, double f_max_ghz);

enum class CouplingKind { REAL, IMAGINARY };
const char* to_string(CouplingKind k) noexcept;

struct FitTraceEntry {
    CouplingKind kind;
    int restart = 0;
    int iteration = 0;
    double best_rms = 0.0;
};

struct FitResult {
    double K_abs = 0.0;
    CouplingKind kind = CouplingKind::REAL;
    double alpha_cp = 0.0;
    double crossing_field = 0.0;  // T, refined
    double residual_rms = 0.0;    // GHz, winning hypothesis
    double residual_rms_real = 0.0;
    double residual_rms_imag = 0.0;
    // 1-sigma proxies from the residual curvature at the optimum:
    // [|K|, alpha_cp, field offset].
    std::array<double, 3> sensitivity{0.0, 0.0, 0.0};
    bool converged = false;
    int iterations = 0;
    std::vector<FitTraceEntry> trace;

    Complex K() const noexcept {
        return kind == CouplingKind::REAL ? Complex{K_abs, 0.0} : Complex{0.0, K_abs};
    }
};

struct FitOptions {
    int max_iterations = 400;       // per restart
    int restarts = 5;               // deterministic seeds across the initial box
    double field_offset_bound = 5e-3;  // T, crossing-field nuisance range
    bool require_convergence = true;
    unsigned workers = 1;           // restarts run concurrently
};

// Thrown when no restart converges; carries the best parameters found.
struct FitNonConvergence : NumericalError {
    FitResult best;
    FitNonConvergence(const std::string& what, FitResult b)
        : NumericalError(what), best(std::move(b)) {}
};

FitResult fit_dispersion(const RidgeData& ridges, const MagnonParams& magnon,
                         const PhotonMode& mode, const FitOptions& options = {});

// Weighted RMS (GHz) of the pairwise-branch model against the ridges; the
// fitter's objective, exposed for diagnostics and tests.
double dispersion_rms(const RidgeData& ridges, const MagnonParams& magnon,
                      const PhotonMode& mode, CouplingKind kind, double K_abs, double alpha_cp,
                      double field_offset);

// k_PP = sqrt(K^2 - k_MP^2). A complex root is reported with a warning flag;
// a quoted companion value that disagrees by more than 5% raises the
// mismatch flag (no silent reconciliation).
struct DecompositionResult {
    CouplingDecomposition decomp;  // k_MP plus the real part of the computed k_PP
    Complex k_PP_root{0.0, 0.0};
    bool complex_k_PP = false;
    bool quoted_mismatch = false;
    std::optional<double> quoted_k_PP;
};

DecompositionResult decompose_coupling(const FitResult& fit, Complex k_MP,
                                       std::optional<double> quoted_k_PP = std::nullopt);

} // namespace pmc
