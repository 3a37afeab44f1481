// magnon.hpp — ferromagnetic resonance of the YIG film.
//
// The uniform (Kittel) mode only: resonance frequency versus in-plane static
// field and the complex magnon frequency with effective Gilbert damping
// alpha_eff = alpha_in + alpha_cp.

#pragma once

#include <complex>

#include "pmc/units.hpp"

namespace pmc {

// Defaults are the measured YIG film values used throughout the toolkit.
struct MagnonParams {
    double gamma_over_2pi = 28.0;  // GHz/T
    double mu0_Ms = 0.172;         // T
    double alpha_in = 3.2e-4;      // intrinsic Gilbert damping
    double alpha_cp = 0.0;         // coupling-induced damping

    double alpha_eff() const noexcept { return alpha_in + alpha_cp; }

    // omega_m = gamma * mu0_Ms in rad/s
    double omega_m() const noexcept { return rad_from_ghz(gamma_over_2pi * mu0_Ms); }

    MagnonParams with_alpha_cp(double cp) const noexcept {
        MagnonParams p = *this;
        p.alpha_cp = cp;
        return p;
    }

    void validate() const;  // throws std::domain_error naming the bad field
};

struct FieldPoint {
    double mu0_H = 0.0;  // T, >= 0
};

// Kittel law f = (gamma/2pi) sqrt(mu0_H (mu0_H + mu0_Ms)), in GHz.
// Strictly increasing and concave in mu0_H.
double kittel_frequency(FieldPoint h, const MagnonParams& p);

// Analytic inverse of the Kittel law; round-trips with kittel_frequency to
// 1e-12 relative. Written in a cancellation-free form so small frequencies
// stay accurate.
FieldPoint kittel_field(double f_ghz, const MagnonParams& p);

// omega_r - i*alpha_eff*omega_r in rad/s. Im <= 0 (decaying mode convention).
Complex magnon_complex_frequency(FieldPoint h, const MagnonParams& p);

} // namespace pmc
