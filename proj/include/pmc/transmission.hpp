// transmission.hpp — |S21|(H, f) map synthesis.
//
// Three model variants share the numerator Gamma omega^2 (omega - wr~):
//   single:    one magnon-photon pair, denominator from the pairwise form
//   per-mode:  same with K^2 -> (k_MP^2 + k_PP^2)_n and mode-n alpha_cp
//   multimode: denominator = det of the full coupled-mode matrix
// Raw values are not dimensionless, so maps are normalized to their maximum
// over the sweep window by default; the scale factor is kept so raw values
// remain recoverable.

#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "pmc/coupling.hpp"

namespace pmc {

struct SweepGrid {
    std::vector<double> field_T;   // strictly increasing, size >= 2
    std::vector<double> freq_GHz;  // strictly increasing, size >= 2

    static std::vector<double> linspace(double lo, double hi, std::size_t count);
    void validate() const;
};

struct SpectrumMap {
    SweepGrid grid;
    Eigen::ArrayXXd values;  // [field][freq], |S21| linear, normalized unless noted
    double norm_scale = 1.0;  // raw = values * norm_scale
    bool normalized = true;
    std::string variant;
    std::string params_json;  // parameter snapshot, set by callers that have one
    std::vector<std::pair<Eigen::Index, Eigen::Index>> saturated;  // clamped exact poles
};

// Single-pair transmission. omega in rad/s; Gamma is the impedance-mismatch
// scale. Exact lossless poles return an infinite magnitude which sweeps clamp
// and flag.
Complex s21_single(double omega, FieldPoint h, const MagnonParams& magnon,
                   const PhotonMode& mode, const CouplingConstant& K, double Gamma);

// Mode n of a hybrid system with its own coupling decomposition, alpha_cp and
// Gamma_n (default 2 beta_n).
Complex s21_per_mode(double omega, FieldPoint h, const HybridSystem& sys, std::size_t n);

// Full multimode response omega^2 (omega - wr~) / det M(omega), scaled so the
// decoupled limit matches the average per-mode bare peak height.
Complex s21_multimode(double omega, FieldPoint h, const HybridSystem& sys);

// Normalization constant used by s21_multimode (documented, not physical).
double multimode_scale(const HybridSystem& sys);

enum class SpectrumVariant { single, per_mode, multimode };

const char* to_string(SpectrumVariant v) noexcept;

struct SweepOptions {
    unsigned workers = 1;
    bool normalize = true;
    std::size_t mode_index = 0;  // for single / per_mode variants
};

// Deterministic grid evaluation: output is identical for any worker count.
SpectrumMap sweep_spectrum(const HybridSystem& sys, const SweepGrid& grid, SpectrumVariant variant,
                           const SweepOptions& options = {});

} // namespace pmc
