// photon.hpp — pure ISRR photon modes.
//
// A mode is (f_n, beta_in) plus an optional equivalent LCR circuit and an
// amplitude/phase profile used by the indirect-coupling model. Photon modes
// are field-independent by construction.

#pragma once

#include <optional>
#include <string>

#include "pmc/units.hpp"

namespace pmc {

struct LumpedElements {
    double L = 0.0;  // H
    double C = 0.0;  // F
    double R = 0.0;  // ohm
};

struct PhotonMode {
    std::string label;
    double f_n = 0.0;      // GHz
    double beta_in = 0.0;  // dimensionless damping
    std::optional<LumpedElements> lumped;

    double omega_n() const noexcept { return rad_from_ghz(f_n); }

    // Throws std::domain_error on a bad value. When lumped elements are
    // present they must agree with f_n = 1/(2 pi sqrt(LC)) to 1e-9 relative
    // and beta_in = R/(L omega_n).
    void validate() const;
};

// Relative amplitude sigma (linear ratio) and phase psi of a mode as seen on
// the feed line. psi is stored in (-360, 360] degrees and compared mod 360.
struct PhotonPhaseProfile {
    double sigma = 0.0;    // linear amplitude ratio, >= 0
    double psi_deg = 0.0;  // degrees

    void validate() const;
};

// Wraps any angle into (-360, 360] without changing its mod-360 class.
double wrap_psi_deg(double psi_deg) noexcept;

// Phase difference psi_b - psi_a normalized to [0, 360).
double phase_difference_deg(const PhotonPhaseProfile& a, const PhotonPhaseProfile& b) noexcept;

// Equivalent-circuit impedance Z_p = -(iL/omega)(omega^2 - omega_p^2
// + 2 i beta omega omega_p). Requires lumped elements; omega in rad/s.
Complex isrr_impedance(double omega, const PhotonMode& mode);

// omega_n - i beta_in omega_n in rad/s.
Complex photon_complex_frequency(const PhotonMode& mode);

} // namespace pmc
