#include "pmc/phasemap.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "pmc/parallel.hpp"
#include "pmc/transmission.hpp"

namespace pmc {

void GapInputs::validate() const {
    if (k < 0.0) throw std::domain_error("gap.k must be >= 0, got " + std::to_string(k));
    if (sigma < 0.0)
        throw std::domain_error("gap.sigma must be >= 0, got " + std::to_string(sigma));
    if (beta < 0.0) throw std::domain_error("gap.beta must be >= 0, got " + std::to_string(beta));
    if (alpha_eff < 0.0)
        throw std::domain_error("gap.alpha_eff must be >= 0, got " + std::to_string(alpha_eff));
    if (!(f_p > 0.0)) throw std::domain_error("gap.f_p must be > 0, got " + std::to_string(f_p));
}

const char* to_string(GapKind k) noexcept {
    switch (k) {
        case GapKind::REAL_GAP: return "REAL_GAP";
        case GapKind::IMAG_GAP: return "IMAG_GAP";
        case GapKind::ZERO: return "ZERO";
    }
    return "?";
}

const char* to_string(Regime r) noexcept {
    switch (r) {
        case Regime::CIT_NORMAL: return "CIT_NORMAL";
        case Regime::CIT_OPPOSITE: return "CIT_OPPOSITE";
        case Regime::CIA: return "CIA";
    }
    return "?";
}

SignedGap frequency_gap(const GapInputs& in, double tol) {
    in.validate();
    if (!(tol > 0.0)) throw std::domain_error("frequency_gap: tol must be > 0");
    const double d = in.beta - in.alpha_eff;
    const double a =
        -2.0 * in.k * in.k * (1.0 - in.sigma * std::cos(rad_from_deg(in.psi_deg))) - d * d;
    SignedGap out;
    out.a = a;
    if (std::abs(a) < tol * tol) {
        out.kind = GapKind::ZERO;
        out.gap_GHz = 0.0;
    } else {
        out.kind = a > 0.0 ? GapKind::REAL_GAP : GapKind::IMAG_GAP;
        out.gap_GHz = in.f_p * std::sqrt(std::abs(a));
    }
    return out;
}

std::optional<double> cia_boundary(double sigma, double k, double d) {
    if (!(sigma > 0.0)) throw std::domain_error("cia_boundary: sigma must be > 0");
    if (!(k > 0.0)) throw std::domain_error("cia_boundary: k must be > 0");
    if (d < 0.0) throw std::domain_error("cia_boundary: d must be >= 0");
    const double arg = (1.0 + d * d / (2.0 * k * k)) / sigma;
    if (arg > 1.0) return std::nullopt;
    return deg_from_rad(std::acos(arg));
}

RegimeCell classify(const GapInputs& in, double tol) {
    const SignedGap g = frequency_gap(in, tol);
    RegimeCell cell;
    cell.delta = g;
    switch (g.kind) {
        case GapKind::REAL_GAP: cell.regime = Regime::CIT_NORMAL; break;
        case GapKind::IMAG_GAP: cell.regime = Regime::CIT_OPPOSITE; break;
        case GapKind::ZERO: cell.regime = Regime::CIA; break;
    }
    return cell;
}

RegimeCell PhaseDiagram::cell(std::size_t i_psi, std::size_t j_damping) const {
    RegimeCell c;
    c.delta.gap_GHz = gap_GHz(static_cast<Eigen::Index>(i_psi), static_cast<Eigen::Index>(j_damping));
    c.delta.kind = static_cast<GapKind>(kind(static_cast<Eigen::Index>(i_psi),
                                             static_cast<Eigen::Index>(j_damping)));
    switch (c.delta.kind) {
        case GapKind::REAL_GAP: c.regime = Regime::CIT_NORMAL; break;
        case GapKind::IMAG_GAP: c.regime = Regime::CIT_OPPOSITE; break;
        case GapKind::ZERO: c.regime = Regime::CIA; break;
    }
    return c;
}

PhaseDiagram phase_diagram(const std::vector<double>& psi_deg_axis,
                           const std::vector<double>& damping_axis, double sigma, double k,
                           double f_p, double tol, unsigned workers) {
    auto check_axis = [](const std::vector<double>& axis, const char* name) {
        if (axis.empty()) throw std::invalid_argument(std::string(name) + " axis is empty");
        for (std::size_t i = 1; i < axis.size(); ++i)
            if (!(axis[i] > axis[i - 1]))
                throw std::invalid_argument(std::string(name) +
                                            " axis must be strictly increasing");
    };
    check_axis(psi_deg_axis, "psi");
    check_axis(damping_axis, "damping");

    PhaseDiagram pd;
    pd.psi_deg_axis = psi_deg_axis;
    pd.damping_axis = damping_axis;
    const auto rows = static_cast<Eigen::Index>(psi_deg_axis.size());
    const auto cols = static_cast<Eigen::Index>(damping_axis.size());
    pd.gap_GHz.resize(rows, cols);
    pd.kind.resize(rows, cols);

    parallel_for(static_cast<std::size_t>(rows), workers, [&](std::size_t i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            GapInputs in;
            in.k = k;
            in.sigma = sigma;
            in.psi_deg = psi_deg_axis[i];
            // The plane is parameterized by d = |beta - alpha_eff|.
            in.beta = damping_axis[static_cast<std::size_t>(j)];
            in.alpha_eff = 0.0;
            in.f_p = f_p;
            const SignedGap g = frequency_gap(in, tol);
            pd.gap_GHz(static_cast<Eigen::Index>(i), j) = g.gap_GHz;
            pd.kind(static_cast<Eigen::Index>(i), j) = static_cast<int>(g.kind);
        }
    });

    for (double d : damping_axis)
        if (auto psi = cia_boundary(sigma, k, d)) pd.boundary.emplace_back(d, *psi);
    return pd;
}

CenterClassification classify_center(const HybridSystem& sys, std::size_t n) {
    sys.validate();
    const CouplingConstant K =
        effective_coupling(sys.couplings.at(n).decomp, sys.couplings[n].allow_large);
    if (std::abs(K.value) == 0.0)
        throw std::domain_error("classify_center: mode " + sys.modes.at(n).label +
                                " has zero coupling");

    const PhotonMode& mode = sys.modes.at(n);
    const FieldPoint hc = kittel_field(mode.f_n, sys.magnon);
    const auto [e_plus, e_minus] = pairwise_branches(sys, n, hc);

    CenterClassification out;
    out.center_gap_GHz = ghz_from_rad(e_plus.real() - e_minus.real());
    out.gap_scale_GHz =
        ghz_from_rad(std::sqrt(2.0 * sys.magnon.omega_m() * mode.omega_n()) * std::abs(K.value));

    const double omega = mode.omega_n();
    const double coupled = std::abs(s21_per_mode(omega, hc, sys, n));
    const Complex bare = sys.gamma_n(n) * omega * omega /
                         (omega - photon_complex_frequency(mode));
    out.absorption_ratio = coupled / std::abs(bare);

    if (out.center_gap_GHz >= 0.5 * out.gap_scale_GHz) {
        out.regime = Regime::CIT_NORMAL;
    } else if (out.absorption_ratio >= 1.0) {
        out.regime = Regime::CIA;
    } else {
        out.regime = Regime::CIT_OPPOSITE;
    }
    return out;
}

} // namespace pmc
