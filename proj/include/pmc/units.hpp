// units.hpp — unit conventions shared by all modules.
//
// User-facing quantities: frequencies in GHz, static fields as mu0*H in tesla,
// phases in degrees. Internal spectral math runs on angular frequencies in
// rad/s; these helpers are the only conversion points.

#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

namespace pmc {

using Complex = std::complex<double>;

inline constexpr double two_pi = 6.283185307179586476925286766559;
inline constexpr double pi = two_pi / 2.0;

// GHz <-> rad/s
inline double rad_from_ghz(double f_ghz) noexcept { return two_pi * f_ghz * 1e9; }
inline double ghz_from_rad(double omega) noexcept { return omega / (two_pi * 1e9); }
inline Complex ghz_from_rad(Complex omega) noexcept { return omega / (two_pi * 1e9); }

inline double rad_from_deg(double deg) noexcept { return deg * (pi / 180.0); }
inline double deg_from_rad(double rad) noexcept { return rad * (180.0 / pi); }

// Power convention for |S21|: dB = 20*log10(linear).
inline double db_from_linear(double linear) {
    if (!(linear > 0.0)) throw std::domain_error("db_from_linear: value must be > 0");
    return 20.0 * std::log10(linear);
}
inline double linear_from_db(double db) noexcept { return std::pow(10.0, db / 20.0); }

} // namespace pmc
