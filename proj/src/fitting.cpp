#include "pmc/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>

#include "pmc/parallel.hpp"

namespace pmc {

// ------------------------------ ridge extraction -----------------------------

void RidgeData::validate() const {
    if (points.size() < 4)
        throw std::invalid_argument("ridge data needs >= 4 points, got " +
                                    std::to_string(points.size()));
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        if (i > 0 && !(p.mu0_H > points[i - 1].mu0_H))
            throw std::invalid_argument("ridge fields must be strictly increasing");
        if (!(p.weight > 0.0))
            throw std::invalid_argument("ridge weights must be > 0");
        if (!p.f_upper && !p.f_lower)
            throw std::invalid_argument("ridge point with no branch at mu0_H = " +
                                        std::to_string(p.mu0_H));
    }
}

namespace {

// Vertex of the parabola through three samples; clamped to the outer
// abscissas so a degenerate column cannot throw a peak outside its bracket.
double parabola_vertex(double x0, double y0, double x1, double y1, double x2, double y2) {
    const double d0 = x0 - x1, d2 = x2 - x1;
    const double a = (y0 - y1) * d2 - (y2 - y1) * d0;
    const double b = (y0 - y1) * d2 * d2 - (y2 - y1) * d0 * d0;
    if (a == 0.0) return x1;
    double v = x1 + 0.5 * b / a;
    return std::clamp(v, std::min(x0, x2), std::max(x0, x2));
}

struct Peak {
    std::size_t index;
    double freq;
    double prominence;
};

// Standard 1-D prominence: height above the higher of the two valley minima
// separating the peak from the nearest higher ground (or the window edge).
double peak_prominence(const std::vector<double>& v, std::size_t j) {
    double left_min = v[j];
    for (std::size_t i = j; i-- > 0;) {
        if (v[i] > v[j]) break;
        left_min = std::min(left_min, v[i]);
    }
    double right_min = v[j];
    for (std::size_t i = j + 1; i < v.size(); ++i) {
        if (v[i] > v[j]) break;
        right_min = std::min(right_min, v[i]);
    }
    return v[j] - std::max(left_min, right_min);
}

} // namespace

RidgeData extract_ridges(const SpectrumMap& map, double f_min_ghz, double f_max_ghz) {
    map.grid.validate();
    if (!(f_max_ghz > f_min_ghz))
        throw std::invalid_argument("extract_ridges: empty frequency window");

    const auto& freq = map.grid.freq_GHz;
    std::size_t lo = 0, hi = freq.size();
    while (lo < freq.size() && freq[lo] < f_min_ghz) ++lo;
    while (hi > lo && freq[hi - 1] > f_max_ghz) --hi;
    if (hi - lo < 8)
        throw std::invalid_argument("extract_ridges: window covers " + std::to_string(hi - lo) +
                                    " frequency samples, >= 8 required");

    RidgeData out;
    for (std::size_t i = 0; i < map.grid.field_T.size(); ++i) {
        std::vector<double> col(hi - lo);
        for (std::size_t j = lo; j < hi; ++j)
            col[j - lo] = map.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));

        std::vector<Peak> peaks;
        for (std::size_t j = 1; j + 1 < col.size(); ++j) {
            if (!(col[j] > col[j - 1] && col[j] >= col[j + 1])) continue;
            const double p = peak_prominence(col, j);
            if (!(p > 0.0)) continue;
            const double f = parabola_vertex(freq[lo + j - 1], col[j - 1], freq[lo + j], col[j],
                                             freq[lo + j + 1], col[j + 1]);
            peaks.push_back(Peak{j, f, p});
        }
        if (peaks.empty()) continue;

        std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) {
            if (a.prominence != b.prominence) return a.prominence > b.prominence;
            return a.index < b.index;
        });
        if (peaks.size() > 2) peaks.resize(2);

        RidgePoint point;
        point.mu0_H = map.grid.field_T[i];
        if (peaks.size() == 1) {
            point.f_upper = peaks[0].freq;
            point.weight = peaks[0].prominence;
        } else {
            const auto& a = peaks[0].freq < peaks[1].freq ? peaks[0] : peaks[1];
            const auto& b = peaks[0].freq < peaks[1].freq ? peaks[1] : peaks[0];
            point.f_lower = a.freq;
            point.f_upper = b.freq;
            point.weight = std::min(peaks[0].prominence, peaks[1].prominence);
        }
        out.points.push_back(point);
    }

    if (out.points.empty())
        throw NumericalError("extract_ridges: no peaks found in any field column");
    return out;
}

// --------------------------------- the fitter --------------------------------

const char* to_string(CouplingKind k) noexcept {
    return k == CouplingKind::REAL ? "REAL" : "IMAGINARY";
}

double dispersion_rms(const RidgeData& ridges, const MagnonParams& magnon,
                      const PhotonMode& mode, CouplingKind kind, double K_abs, double alpha_cp,
                      double field_offset) {
    const Complex K2 = kind == CouplingKind::REAL ? Complex{K_abs * K_abs, 0.0}
                                                  : Complex{-K_abs * K_abs, 0.0};
    const MagnonParams mp = magnon.with_alpha_cp(alpha_cp);
    const double wm = magnon.omega_m();
    const double wn = mode.omega_n();
    const Complex wn_tilde = photon_complex_frequency(mode);

    double sum = 0.0;
    double norm = 0.0;
    for (const auto& p : ridges.points) {
        const double h = std::max(p.mu0_H + field_offset, 0.0);
        const Complex wr_tilde = magnon_complex_frequency(FieldPoint{h}, mp);
        const auto [e_plus, e_minus] = pairwise_branches(wr_tilde, wn_tilde, wm, wn, K2);
        const double fu = ghz_from_rad(e_plus.real());
        const double fl = ghz_from_rad(e_minus.real());
        if (p.f_upper && p.f_lower) {
            const double du = *p.f_upper - fu;
            const double dl = *p.f_lower - fl;
            sum += p.weight * (du * du + dl * dl);
            norm += 2.0 * p.weight;
        } else {
            // A lone ridge is matched against the nearer branch; inside the
            // attraction interval the two real parts coincide anyway.
            const double f = p.f_upper ? *p.f_upper : *p.f_lower;
            const double d = std::min(std::abs(f - fu), std::abs(f - fl));
            sum += p.weight * d * d;
            norm += p.weight;
        }
    }
    return std::sqrt(sum / norm);
}

namespace {

struct Box {
    double lo[3];
    double hi[3];
};

// theta = (log10 |K|, alpha_cp, field offset in T)
double objective(const RidgeData& ridges, const MagnonParams& magnon, const PhotonMode& mode,
                 CouplingKind kind, const Box& box, const double* theta) {
    double t[3];
    double penalty = 0.0;
    for (int i = 0; i < 3; ++i) {
        t[i] = std::clamp(theta[i], box.lo[i], box.hi[i]);
        const double excess = (theta[i] - t[i]) / (box.hi[i] - box.lo[i]);
        penalty += 1e6 * excess * excess;
    }
    const double rms =
        dispersion_rms(ridges, magnon, mode, kind, std::pow(10.0, t[0]), t[1], t[2]);
    return rms + penalty;
}

struct SimplexOutcome {
    double theta[3];
    double value = std::numeric_limits<double>::infinity();
    bool converged = false;
    int iterations = 0;
    std::vector<double> best_per_iteration;
};

// Nelder-Mead with standard coefficients; deterministic for a fixed start.
template <typename F>
SimplexOutcome nelder_mead(F&& f, const double start[3], const double step[3], int max_iter) {
    constexpr int dim = 3;
    double pts[dim + 1][dim];
    double val[dim + 1];
    for (int v = 0; v <= dim; ++v) {
        for (int i = 0; i < dim; ++i) pts[v][i] = start[i] + (v == i + 1 ? step[i] : 0.0);
        val[v] = f(pts[v]);
    }

    SimplexOutcome out;
    int order[dim + 1];
    for (int it = 0; it < max_iter; ++it) {
        for (int i = 0; i <= dim; ++i) order[i] = i;
        std::sort(order, order + dim + 1, [&](int a, int b) { return val[a] < val[b]; });
        const int best = order[0], worst = order[dim], second = order[dim - 1];
        out.best_per_iteration.push_back(val[best]);
        out.iterations = it + 1;

        if (std::abs(val[worst] - val[best]) <= 1e-14 + 1e-10 * std::abs(val[best])) {
            out.converged = true;
            break;
        }

        double centroid[dim] = {0, 0, 0};
        for (int v = 0; v <= dim; ++v) {
            if (v == worst) continue;
            for (int i = 0; i < dim; ++i) centroid[i] += pts[v][i] / dim;
        }

        auto blend = [&](double coeff, double* dst) {
            for (int i = 0; i < dim; ++i)
                dst[i] = centroid[i] + coeff * (pts[worst][i] - centroid[i]);
        };

        double refl[dim];
        blend(-1.0, refl);
        const double f_refl = f(refl);
        if (f_refl < val[best]) {
            double expa[dim];
            blend(-2.0, expa);
            const double f_expa = f(expa);
            if (f_expa < f_refl) {
                std::copy(expa, expa + dim, pts[worst]);
                val[worst] = f_expa;
            } else {
                std::copy(refl, refl + dim, pts[worst]);
                val[worst] = f_refl;
            }
        } else if (f_refl < val[second]) {
            std::copy(refl, refl + dim, pts[worst]);
            val[worst] = f_refl;
        } else {
            double contr[dim];
            blend(f_refl < val[worst] ? -0.5 : 0.5, contr);
            const double f_contr = f(contr);
            if (f_contr < std::min(f_refl, val[worst])) {
                std::copy(contr, contr + dim, pts[worst]);
                val[worst] = f_contr;
            } else {
                for (int v = 0; v <= dim; ++v) {
                    if (v == best) continue;
                    for (int i = 0; i < dim; ++i)
                        pts[v][i] = pts[best][i] + 0.5 * (pts[v][i] - pts[best][i]);
                    val[v] = f(pts[v]);
                }
            }
        }
    }

    int best = 0;
    for (int v = 1; v <= dim; ++v)
        if (val[v] < val[best]) best = v;
    std::copy(pts[best], pts[best] + dim, out.theta);
    out.value = val[best];
    return out;
}

struct HypothesisFit {
    double K_abs = 0.0;
    double alpha_cp = 0.0;
    double field_offset = 0.0;
    double rms = std::numeric_limits<double>::infinity();
    bool converged = false;
    int iterations = 0;
    std::vector<FitTraceEntry> trace;
};

HypothesisFit fit_hypothesis(const RidgeData& ridges, const MagnonParams& magnon,
                             const PhotonMode& mode, CouplingKind kind,
                             const FitOptions& options) {
    const Box box{{std::log10(2e-4), 0.0, -options.field_offset_bound},
                  {std::log10(0.2), 0.05, options.field_offset_bound}};
    // Deterministic seeds spread across the expected parameter box.
    const double seed_k[5] = {0.002, 0.004, 0.008, 0.014, 0.02};
    const double seed_a[5] = {0.0, 0.002, 0.005, 0.01, 0.02};
    const int restarts = std::clamp(options.restarts, 1, 5);

    std::vector<SimplexOutcome> outcomes(static_cast<std::size_t>(restarts));
    parallel_for(static_cast<std::size_t>(restarts), options.workers, [&](std::size_t r) {
        const double start[3] = {std::log10(seed_k[r]), seed_a[r], 0.0};
        const double step[3] = {0.2, 0.003, 1e-3};
        auto f = [&](const double* theta) {
            return objective(ridges, magnon, mode, kind, box, theta);
        };
        SimplexOutcome first = nelder_mead(f, start, step, options.max_iterations);
        // refinement pass: a fresh simplex around the found minimum recovers
        // precision a collapsed simplex leaves on the table
        const double fine_step[3] = {0.02, 3e-4, 1e-4};
        SimplexOutcome second = nelder_mead(f, first.theta, fine_step, options.max_iterations);
        second.best_per_iteration.insert(second.best_per_iteration.begin(),
                                         first.best_per_iteration.begin(),
                                         first.best_per_iteration.end());
        second.iterations += first.iterations;
        if (first.value < second.value) {
            std::copy(first.theta, first.theta + 3, second.theta);
            second.value = first.value;
        }
        outcomes[r] = second;
    });

    // Lowest residual wins; ties by seed index.
    std::size_t pick = 0;
    for (std::size_t r = 1; r < outcomes.size(); ++r)
        if (outcomes[r].value < outcomes[pick].value) pick = r;

    // The center trajectories depend on (alpha_eff - beta)^2, so the surface
    // has a mirror basin at alpha_eff -> 2 beta - alpha_eff that only the
    // weaker off-center terms break. Refine the reflected candidate and keep
    // whichever side is lower.
    {
        const double alpha_best = std::clamp(outcomes[pick].theta[1], box.lo[1], box.hi[1]);
        const double alpha_mirror = 2.0 * (mode.beta_in - magnon.alpha_in) - alpha_best;
        if (alpha_mirror >= box.lo[1] && alpha_mirror <= box.hi[1] &&
            std::abs(alpha_mirror - alpha_best) > 1e-6) {
            const double start[3] = {outcomes[pick].theta[0], alpha_mirror,
                                     outcomes[pick].theta[2]};
            const double step[3] = {0.02, 3e-4, 1e-4};
            auto f = [&](const double* theta) {
                return objective(ridges, magnon, mode, kind, box, theta);
            };
            SimplexOutcome mirror = nelder_mead(f, start, step, options.max_iterations);
            if (mirror.value < outcomes[pick].value) {
                mirror.best_per_iteration.insert(mirror.best_per_iteration.begin(),
                                                 outcomes[pick].best_per_iteration.begin(),
                                                 outcomes[pick].best_per_iteration.end());
                mirror.iterations += outcomes[pick].iterations;
                outcomes[pick] = mirror;
            }
        }
    }

    HypothesisFit fit;
    fit.K_abs = std::pow(10.0, std::clamp(outcomes[pick].theta[0], box.lo[0], box.hi[0]));
    fit.alpha_cp = std::clamp(outcomes[pick].theta[1], box.lo[1], box.hi[1]);
    fit.field_offset = std::clamp(outcomes[pick].theta[2], box.lo[2], box.hi[2]);
    fit.rms = outcomes[pick].value;
    fit.converged = outcomes[pick].converged;
    for (std::size_t r = 0; r < outcomes.size(); ++r) {
        fit.iterations += outcomes[r].iterations;
        for (int it = 0; it < static_cast<int>(outcomes[r].best_per_iteration.size()); ++it)
            fit.trace.push_back(
                FitTraceEntry{kind, static_cast<int>(r), it, outcomes[r].best_per_iteration[it]});
    }
    return fit;
}

} // namespace

FitResult fit_dispersion(const RidgeData& ridges, const MagnonParams& magnon,
                         const PhotonMode& mode, const FitOptions& options) {
    ridges.validate();
    magnon.validate();
    mode.validate();

    const double hc_guess = kittel_field(mode.f_n, magnon).mu0_H;
    bool below = false, above = false;
    for (const auto& p : ridges.points) {
        below = below || p.mu0_H < hc_guess;
        above = above || p.mu0_H > hc_guess;
    }
    if (!below || !above)
        throw std::invalid_argument(
            "fit_dispersion: ridge fields must span both sides of the crossing field (" +
            std::to_string(hc_guess) + " T)");

    const HypothesisFit real_fit =
        fit_hypothesis(ridges, magnon, mode, CouplingKind::REAL, options);
    const HypothesisFit imag_fit =
        fit_hypothesis(ridges, magnon, mode, CouplingKind::IMAGINARY, options);
    const bool imag_wins = imag_fit.rms < real_fit.rms;
    const HypothesisFit& win = imag_wins ? imag_fit : real_fit;

    FitResult result;
    result.kind = imag_wins ? CouplingKind::IMAGINARY : CouplingKind::REAL;
    result.K_abs = win.K_abs;
    result.alpha_cp = win.alpha_cp;
    result.crossing_field = hc_guess - win.field_offset;
    result.residual_rms = win.rms;
    result.residual_rms_real = real_fit.rms;
    result.residual_rms_imag = imag_fit.rms;
    result.converged = win.converged;
    result.iterations = real_fit.iterations + imag_fit.iterations;
    result.trace = real_fit.trace;
    result.trace.insert(result.trace.end(), imag_fit.trace.begin(), imag_fit.trace.end());

    // Curvature-based 1-sigma proxies at the optimum.
    const double mse = win.rms * win.rms;
    const double p0[3] = {win.K_abs, win.alpha_cp, win.field_offset};
    const double h0[3] = {std::max(1e-3 * win.K_abs, 1e-7), 1e-4, 1e-5};
    for (int i = 0; i < 3; ++i) {
        double plus[3], minus[3];
        std::copy(p0, p0 + 3, plus);
        std::copy(p0, p0 + 3, minus);
        plus[i] += h0[i];
        minus[i] -= h0[i];
        if (i == 0) minus[0] = std::max(minus[0], 1e-9);
        auto mse_at = [&](const double* t) {
            const double r =
                dispersion_rms(ridges, magnon, mode, result.kind, t[0], std::max(t[1], 0.0), t[2]);
            return r * r;
        };
        const double curHess = (mse_at(plus) - 2.0 * mse + mse_at(minus)) / (h0[i] * h0[i]);
        result.sensitivity[static_cast<std::size_t>(i)] =
            curHess > 0.0 ? std::sqrt(2.0 * mse / curHess)
                          : std::numeric_limits<double>::infinity();
    }

    if (!result.converged && options.require_convergence)
        throw FitNonConvergence("fit_dispersion: simplex did not converge within " +
                                    std::to_string(options.max_iterations) + " iterations",
                                result);
    return result;
}

DecompositionResult decompose_coupling(const FitResult& fit, Complex k_MP,
                                       std::optional<double> quoted_k_PP) {
    const Complex K2 = fit.K() * fit.K();
    Complex root = std::sqrt(K2 - k_MP * k_MP);
    if (root.real() == 0.0 && root.imag() < 0.0) root = -root;
    if (root.real() < 0.0) root = -root;

    DecompositionResult out;
    out.k_PP_root = root;
    out.complex_k_PP = std::abs(root.imag()) > 1e-12 * std::max(std::abs(root), 1.0);
    out.decomp.k_MP = k_MP;
    out.decomp.k_PP = root.real();
    out.quoted_k_PP = quoted_k_PP;
    if (quoted_k_PP) {
        const double ref = std::max(std::abs(*quoted_k_PP), std::abs(root.real()));
        out.quoted_mismatch = std::abs(root.real() - *quoted_k_PP) > 0.05 * ref;
    }
    return out;
}

} // namespace pmc
