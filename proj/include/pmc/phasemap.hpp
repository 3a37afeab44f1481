// phasemap.hpp — frequency-gap formula, CIT/CIA classification and the
// phase diagram on the (psi, |beta - alpha_eff|) plane.
//
// Everything keys off the sign of
//   A = -2 k^2 (1 - sigma cos psi) - (beta - alpha_eff)^2
// A > 0: real frequency gap (normal anti-crossing, CIT) ;
// A < 0: linewidth-splitting magnitude (opposite anti-crossing, CIT);
// A ~ 0: the absorption boundary (CIA). Gap = f_p sqrt(|A|) in GHz.

#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <vector>

#include "pmc/coupling.hpp"

namespace pmc {

struct GapInputs {
    double k = 0.0;          // dissipative direct-coupling magnitude (k_MP = ik)
    double sigma = 0.0;      // relative amplitude, linear
    double psi_deg = 0.0;    // phase difference
    double beta = 0.0;       // photon damping
    double alpha_eff = 0.0;  // magnon effective damping
    double f_p = 0.0;        // photon frequency, GHz

    void validate() const;
};

enum class GapKind { REAL_GAP, IMAG_GAP, ZERO };
enum class Regime { CIT_NORMAL, CIT_OPPOSITE, CIA };

const char* to_string(GapKind k) noexcept;
const char* to_string(Regime r) noexcept;

struct SignedGap {
    double gap_GHz = 0.0;  // f_p sqrt(|A|), >= 0
    GapKind kind = GapKind::ZERO;
    double a = 0.0;  // the classified argument A
};

// tol is on the gap scale; |A| < tol^2 counts as zero (default tol^2 = 1e-8).
inline constexpr double default_gap_tol = 1e-4;

SignedGap frequency_gap(const GapInputs& in, double tol = default_gap_tol);

// Boundary phase psi* = acos[(1/sigma)(1 + d^2 / 2k^2)] in degrees, where
// d = |beta - alpha_eff|. Absent when d > k sqrt(2 (sigma - 1)).
std::optional<double> cia_boundary(double sigma, double k, double d);

struct RegimeCell {
    SignedGap delta;
    Regime regime = Regime::CIA;
};

RegimeCell classify(const GapInputs& in, double tol = default_gap_tol);

struct PhaseDiagram {
    std::vector<double> psi_deg_axis;  // strictly increasing
    std::vector<double> damping_axis;  // |beta - alpha_eff|, strictly increasing
    Eigen::ArrayXXd gap_GHz;           // [psi][damping]
    Eigen::ArrayXXi kind;              // GapKind as int, same layout
    std::vector<std::pair<double, double>> boundary;  // (damping, psi*)

    RegimeCell cell(std::size_t i_psi, std::size_t j_damping) const;
};

PhaseDiagram phase_diagram(const std::vector<double>& psi_deg_axis,
                           const std::vector<double>& damping_axis, double sigma, double k,
                           double f_p, double tol = default_gap_tol, unsigned workers = 1);

// ------------------------- coupling-center regimes --------------------------

// Classification of one coupling center of a hybrid system from its own
// computable signatures: a persistent real-part splitting at the crossing is
// a normal anti-crossing; converging branches split between opposite
// anti-crossing and absorption by whether the coupled response at the center
// stays suppressed relative to the bare mode (transparency) or not (CIA).
struct CenterClassification {
    Regime regime = Regime::CIA;
    double center_gap_GHz = 0.0;      // Re(E+ - E-)/2pi at the crossing field
    double gap_scale_GHz = 0.0;       // sqrt(2 w_m w_n) |K| / 2pi
    double absorption_ratio = 0.0;    // |S21|(center) / bare |S21| at the same point
};

CenterClassification classify_center(const HybridSystem& sys, std::size_t n);

} // namespace pmc
