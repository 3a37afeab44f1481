#include "pmc/transmission.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "pmc/errors.hpp"
#include "pmc/parallel.hpp"

namespace pmc {

std::vector<double> SweepGrid::linspace(double lo, double hi, std::size_t count) {
    if (count < 2) throw std::invalid_argument("linspace: count >= 2 required");
    if (!(hi > lo)) throw std::invalid_argument("linspace: max must exceed min");
    std::vector<double> axis(count);
    const double step = (hi - lo) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) axis[i] = lo + step * static_cast<double>(i);
    axis.back() = hi;
    return axis;
}

void SweepGrid::validate() const {
    auto check = [](const std::vector<double>& axis, const char* name) {
        if (axis.size() < 2)
            throw std::invalid_argument(std::string(name) + " axis needs >= 2 points");
        for (std::size_t i = 1; i < axis.size(); ++i)
            if (!(axis[i] > axis[i - 1]))
                throw std::invalid_argument(std::string(name) +
                                            " axis must be strictly increasing");
    };
    check(field_T, "field");
    check(freq_GHz, "frequency");
}

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

Complex s21_from_parts(Complex num, Complex den) {
    if (den == Complex{0.0, 0.0}) return Complex{inf, 0.0};
    return num / den;
}

} // namespace

Complex s21_single(double omega, FieldPoint h, const MagnonParams& magnon,
                   const PhotonMode& mode, const CouplingConstant& K, double Gamma) {
    if (!(omega > 0.0)) throw std::domain_error("s21_single: omega must be > 0");
    const Complex wr = magnon_complex_frequency(h, magnon);
    const Complex wp = photon_complex_frequency(mode);
    const Complex K2 = K.value * K.value;
    const Complex num = Gamma * omega * omega * (omega - wr);
    const Complex den =
        (omega - wr) * (omega - wp) - 0.5 * magnon.omega_m() * mode.omega_n() * K2;
    return s21_from_parts(num, den);
}

Complex s21_per_mode(double omega, FieldPoint h, const HybridSystem& sys, std::size_t n) {
    if (!(omega > 0.0)) throw std::domain_error("s21_per_mode: omega must be > 0");
    const MagnonParams magnon = sys.magnon_for_mode(n);
    const Complex wr = magnon_complex_frequency(h, magnon);
    const Complex wp = photon_complex_frequency(sys.modes.at(n));
    const Complex K2 = sys.couplings[n].decomp.K_squared();
    const Complex num = sys.gamma_n(n) * omega * omega * (omega - wr);
    const Complex den =
        (omega - wr) * (omega - wp) - 0.5 * magnon.omega_m() * sys.modes[n].omega_n() * K2;
    return s21_from_parts(num, den);
}

double multimode_scale(const HybridSystem& sys) {
    // Average over modes of the constant that would reproduce each bare peak
    // height in the decoupled limit: C_j = Gamma_j prod_{n != j} |w_j - wn~|.
    double sum = 0.0;
    for (std::size_t j = 0; j < sys.size(); ++j) {
        double c = sys.gamma_n(j);
        for (std::size_t n = 0; n < sys.size(); ++n)
            if (n != j)
                c *= std::abs(sys.modes[j].omega_n() - photon_complex_frequency(sys.modes[n]));
        sum += c;
    }
    return sum / static_cast<double>(sys.size());
}

Complex s21_multimode(double omega, FieldPoint h, const HybridSystem& sys) {
    if (!(omega > 0.0)) throw std::domain_error("s21_multimode: omega must be > 0");
    const Complex wr = magnon_complex_frequency(h, sys.magnon);
    const Complex num = multimode_scale(sys) * omega * omega * (omega - wr);
    const Complex den = coupling_matrix_determinant(sys, Complex{omega, 0.0}, h);
    return s21_from_parts(num, den);
}

const char* to_string(SpectrumVariant v) noexcept {
    switch (v) {
        case SpectrumVariant::single: return "single";
        case SpectrumVariant::per_mode: return "per-mode";
        case SpectrumVariant::multimode: return "multimode";
    }
    return "?";
}

SpectrumMap sweep_spectrum(const HybridSystem& sys, const SweepGrid& grid, SpectrumVariant variant,
                           const SweepOptions& options) {
    grid.validate();
    sys.validate();
    if (variant != SpectrumVariant::multimode && options.mode_index >= sys.size())
        throw std::invalid_argument("sweep_spectrum: mode_index out of range");

    const auto rows = static_cast<Eigen::Index>(grid.field_T.size());
    const auto cols = static_cast<Eigen::Index>(grid.freq_GHz.size());

    SpectrumMap map;
    map.grid = grid;
    map.variant = to_string(variant);
    map.values.resize(rows, cols);

    // Per-row evaluation; every cell owned by exactly one worker.
    const std::size_t n = options.mode_index;
    const CouplingConstant K_eff =
        variant == SpectrumVariant::single
            ? effective_coupling(sys.couplings[n].decomp, sys.couplings[n].allow_large)
            : CouplingConstant{};
    parallel_for(static_cast<std::size_t>(rows), options.workers, [&](std::size_t i) {
        const FieldPoint h{grid.field_T[i]};
        for (Eigen::Index j = 0; j < cols; ++j) {
            const double omega = rad_from_ghz(grid.freq_GHz[static_cast<std::size_t>(j)]);
            Complex s;
            switch (variant) {
                case SpectrumVariant::single:
                    s = s21_single(omega, h, sys.magnon_for_mode(n), sys.modes[n], K_eff,
                                   sys.gamma_n(n));
                    break;
                case SpectrumVariant::per_mode:
                    s = s21_per_mode(omega, h, sys, n);
                    break;
                case SpectrumVariant::multimode:
                    s = s21_multimode(omega, h, sys);
                    break;
            }
            map.values(static_cast<Eigen::Index>(i), j) = std::abs(s);
        }
    });

    // Clamp exact poles to the largest finite neighbor so maps stay plottable.
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            if (std::isfinite(map.values(i, j))) continue;
            double repl = 0.0;
            const Eigen::Index di[] = {-1, 1, 0, 0};
            const Eigen::Index dj[] = {0, 0, -1, 1};
            for (int k = 0; k < 4; ++k) {
                const Eigen::Index ii = i + di[k];
                const Eigen::Index jj = j + dj[k];
                if (ii < 0 || ii >= rows || jj < 0 || jj >= cols) continue;
                const double v = map.values(ii, jj);
                if (std::isfinite(v)) repl = std::max(repl, v);
            }
            map.values(i, j) = repl;
            map.saturated.emplace_back(i, j);
        }
    }

    if (options.normalize) {
        const double peak = map.values.maxCoeff();
        if (peak > 0.0) {
            map.values /= peak;
            map.norm_scale = peak;
        }
        map.normalized = true;
    } else {
        map.normalized = false;
    }
    return map;
}

} // namespace pmc
