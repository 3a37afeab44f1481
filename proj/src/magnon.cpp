#include "pmc/magnon.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pmc {

void MagnonParams::validate() const {
    if (!(gamma_over_2pi > 0.0))
        throw std::domain_error("magnon.gamma_over_2pi must be > 0, got " +
                                std::to_string(gamma_over_2pi));
    if (!(mu0_Ms > 0.0))
        throw std::domain_error("magnon.mu0_Ms must be > 0, got " + std::to_string(mu0_Ms));
    if (alpha_in < 0.0)
        throw std::domain_error("magnon.alpha_in must be >= 0, got " + std::to_string(alpha_in));
    if (alpha_cp < 0.0)
        throw std::domain_error("magnon.alpha_cp must be >= 0, got " + std::to_string(alpha_cp));
}

double kittel_frequency(FieldPoint h, const MagnonParams& p) {
    if (h.mu0_H < 0.0)
        throw std::domain_error("kittel_frequency: mu0_H must be >= 0, got " +
                                std::to_string(h.mu0_H));
    return p.gamma_over_2pi * std::sqrt(h.mu0_H * (h.mu0_H + p.mu0_Ms));
}

FieldPoint kittel_field(double f_ghz, const MagnonParams& p) {
    if (f_ghz < 0.0)
        throw std::domain_error("kittel_field: frequency must be >= 0, got " +
                                std::to_string(f_ghz));
    // mu0_H solves H(H + Ms) = (f/g)^2. The quadratic root
    //   (-Ms + sqrt(Ms^2 + 4 q)) / 2,  q = (f/g)^2
    // cancels badly for f -> 0; the equivalent 2q / (Ms + sqrt(Ms^2 + 4q))
    // does not.
    const double q = (f_ghz / p.gamma_over_2pi) * (f_ghz / p.gamma_over_2pi);
    const double h = 2.0 * q / (p.mu0_Ms + std::sqrt(p.mu0_Ms * p.mu0_Ms + 4.0 * q));
    return FieldPoint{h};
}

Complex magnon_complex_frequency(FieldPoint h, const MagnonParams& p) {
    const double omega_r = rad_from_ghz(kittel_frequency(h, p));
    return Complex(omega_r, -p.alpha_eff() * omega_r);
}

} // namespace pmc
