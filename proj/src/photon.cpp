#include "pmc/photon.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "pmc/errors.hpp"

namespace pmc {

namespace {
std::string mode_prefix(const PhotonMode& m) {
    return m.label.empty() ? std::string("mode") : "mode " + m.label;
}
} // namespace

void PhotonMode::validate() const {
    if (!(f_n > 0.0))
        throw std::domain_error(mode_prefix(*this) + ".f_GHz must be > 0, got " +
                                std::to_string(f_n));
    if (beta_in < 0.0)
        throw std::domain_error(mode_prefix(*this) + ".beta_in must be >= 0, got " +
                                std::to_string(beta_in));
    if (lumped) {
        if (!(lumped->L > 0.0) || !(lumped->C > 0.0) || lumped->R < 0.0)
            throw std::domain_error(mode_prefix(*this) +
                                    ".lumped requires L > 0, C > 0, R >= 0");
        const double f_lc = 1.0 / (two_pi * std::sqrt(lumped->L * lumped->C)) / 1e9;
        if (std::abs(f_lc - f_n) > 1e-9 * f_n)
            throw std::domain_error(mode_prefix(*this) + ".lumped gives f = " +
                                    std::to_string(f_lc) + " GHz, inconsistent with f_GHz = " +
                                    std::to_string(f_n));
        const double beta_rl = lumped->R / (lumped->L * omega_n());
        if (std::abs(beta_rl - beta_in) > 1e-9 * std::max(beta_in, 1e-12))
            throw std::domain_error(mode_prefix(*this) + ".lumped gives beta = " +
                                    std::to_string(beta_rl) + ", inconsistent with beta_in = " +
                                    std::to_string(beta_in));
    }
}

void PhotonPhaseProfile::validate() const {
    if (sigma < 0.0)
        throw std::domain_error("profile.sigma must be >= 0, got " + std::to_string(sigma));
    if (!(psi_deg > -360.0 && psi_deg <= 360.0))
        throw std::domain_error("profile.psi_deg must lie in (-360, 360], got " +
                                std::to_string(psi_deg));
}

double wrap_psi_deg(double psi_deg) noexcept {
    double w = std::fmod(psi_deg, 360.0);
    if (w <= -360.0) w += 360.0;
    if (w > 360.0) w -= 360.0;
    return w;
}

double phase_difference_deg(const PhotonPhaseProfile& a, const PhotonPhaseProfile& b) noexcept {
    double d = std::fmod(b.psi_deg - a.psi_deg, 360.0);
    if (d < 0.0) d += 360.0;
    return d;
}

Complex isrr_impedance(double omega, const PhotonMode& mode) {
    if (!mode.lumped)
        throw ConfigError("isrr_impedance: " + mode_prefix(mode) +
                          " has no lumped L/C/R parameters");
    if (!(omega > 0.0))
        throw std::domain_error("isrr_impedance: omega must be > 0");
    const double wp = mode.omega_n();
    const double L = mode.lumped->L;
    const Complex bracket(omega * omega - wp * wp, 2.0 * mode.beta_in * omega * wp);
    return Complex(0.0, -L / omega) * bracket;
}

Complex photon_complex_frequency(const PhotonMode& mode) {
    const double wn = mode.omega_n();
    return Complex(wn, -mode.beta_in * wn);
}

} // namespace pmc
