// pmc — command-line front end for the photon-magnon coupling toolkit.
//
// Subcommands mirror the standard outputs one-to-one:
//   kittel         FMR frequency vs field table
//   sweep          |S21|(H, f) maps (single / per-mode / multimode)
//   dispersion     per-center hybrid branch trajectories + regime summary
//   phase-diagram  CIT/CIA cells and the CIA boundary polyline
//   fit            coupling-constant fit from ridge or spectrum data
//
// Exit codes: 0 success, 2 configuration error, 3 numerical error, 4 I/O error.

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>
#include <string>
#include <vector>

#include "pmc/io.hpp"
#include "pmc/parallel.hpp"

namespace {

using namespace pmc;

struct GlobalOptions {
    std::string config_path;
    std::string out_dir = "out";
    std::vector<std::string> overrides;
    unsigned workers = default_workers();
    std::string grid;     // HxW
    std::string variant;  // sweep only
    bool verbose = false;
};

std::pair<std::size_t, std::size_t> parse_grid(const std::string& grid) {
    const auto x = grid.find('x');
    if (x == std::string::npos || x == 0 || x + 1 == grid.size())
        throw ConfigError("--grid expects HxW, e.g. 400x400, got '" + grid + "'");
    try {
        return {std::stoul(grid.substr(0, x)), std::stoul(grid.substr(x + 1))};
    } catch (...) {
        throw ConfigError("--grid expects HxW, e.g. 400x400, got '" + grid + "'");
    }
}

Config load(const GlobalOptions& g, const std::string& subcommand) {
    std::vector<std::string> overrides = g.overrides;
    if (!g.grid.empty()) {
        const auto [rows, cols] = parse_grid(g.grid);
        if (subcommand == "phase-diagram") {
            overrides.push_back("phase_diagram.psi_deg.count=" + std::to_string(rows));
            overrides.push_back("phase_diagram.damping.count=" + std::to_string(cols));
        } else if (subcommand == "kittel") {
            overrides.push_back("kittel.field_T.count=" + std::to_string(rows));
        } else {
            overrides.push_back("sweep.field_T.count=" + std::to_string(rows));
            overrides.push_back("sweep.freq_GHz.count=" + std::to_string(cols));
        }
    }
    if (!g.variant.empty()) overrides.push_back("sweep.variant=" + g.variant);
    if (g.config_path.empty())
        return config_with_overrides(nlohmann::json(nullptr), overrides);
    return load_config(g.config_path, overrides);
}

void log(const GlobalOptions& g, const std::string& msg) {
    if (g.verbose) std::cerr << "pmc: " << msg << "\n";
}

int run_kittel(const GlobalOptions& g) {
    const Config cfg = load(g, "kittel");
    OutputWriter writer(g.out_dir, cfg.snapshot_string());

    std::vector<double> fields;
    if (cfg.kittel.count == 1) {
        fields.push_back(cfg.kittel.min);
    } else {
        fields = SweepGrid::linspace(cfg.kittel.min, cfg.kittel.max, cfg.kittel.count);
    }
    std::vector<double> freqs(fields.size());
    for (std::size_t i = 0; i < fields.size(); ++i)
        freqs[i] = kittel_frequency(FieldPoint{fields[i]}, cfg.system.magnon);
    const auto rec = writer.write_kittel("kittel.csv", fields, freqs);
    log(g, "wrote " + rec.payload_path);
    return 0;
}

int run_sweep(const GlobalOptions& g) {
    const Config cfg = load(g, "sweep");
    OutputWriter writer(g.out_dir, cfg.snapshot_string());
    const SweepGrid grid = cfg.sweep.grid();
    const SpectrumVariant variant = cfg.sweep.variant_enum();

    SweepOptions opts;
    opts.workers = g.workers;

    auto emit = [&](SpectrumVariant v, std::size_t mode_index, const std::string& name) {
        opts.mode_index = mode_index;
        SpectrumMap map = sweep_spectrum(cfg.system, grid, v, opts);
        map.params_json = cfg.snapshot_string();
        const auto rec = writer.write_spectrum(name, map);
        log(g, "wrote " + rec.payload_path);
    };

    switch (variant) {
        case SpectrumVariant::multimode:
            emit(variant, 0, "spectrum_multimode.csv");
            break;
        case SpectrumVariant::single: {
            std::size_t n = 0;
            if (!cfg.sweep.single_mode.empty()) {
                n = cfg.system.modes.size();
                for (std::size_t m = 0; m < cfg.system.modes.size(); ++m)
                    if (cfg.system.modes[m].label == cfg.sweep.single_mode) n = m;
                if (n == cfg.system.modes.size())
                    throw ConfigError("sweep.single_mode: no mode labeled '" +
                                      cfg.sweep.single_mode + "'");
            }
            emit(variant, n, "spectrum_single_" + cfg.system.modes[n].label + ".csv");
            break;
        }
        case SpectrumVariant::per_mode:
            for (std::size_t n = 0; n < cfg.system.modes.size(); ++n)
                emit(variant, n, "spectrum_per-mode_" + cfg.system.modes[n].label + ".csv");
            break;
    }
    return 0;
}

int run_dispersion(const GlobalOptions& g) {
    const Config cfg = load(g, "dispersion");
    OutputWriter writer(g.out_dir, cfg.snapshot_string());

    std::vector<std::pair<std::string, CenterClassification>> regimes;
    for (std::size_t n = 0; n < cfg.system.modes.size(); ++n) {
        const auto& mode = cfg.system.modes[n];
        const double hc = kittel_field(mode.f_n, cfg.system.magnon).mu0_H;
        const double lo = std::max(hc - cfg.dispersion.half_window_T, 0.0);
        const double hi = hc + cfg.dispersion.half_window_T;
        const auto fields = SweepGrid::linspace(lo, hi, cfg.dispersion.count);

        std::vector<std::vector<Complex>> rows(fields.size());
        for (std::size_t i = 0; i < fields.size(); ++i) {
            const auto [ep, em] = pairwise_branches(cfg.system, n, FieldPoint{fields[i]});
            rows[i] = {ep, em};
        }
        const auto rec = writer.write_branches("dispersion_" + mode.label + ".csv", fields,
                                               {"plus", "minus"}, rows);
        log(g, "wrote " + rec.payload_path);
        regimes.emplace_back(mode.label, classify_center(cfg.system, n));
    }
    const auto rec = writer.write_regimes("regimes.csv", regimes);
    log(g, "wrote " + rec.payload_path);
    return 0;
}

int run_phase_diagram(const GlobalOptions& g) {
    const Config cfg = load(g, "phase-diagram");
    OutputWriter writer(g.out_dir, cfg.snapshot_string());
    const auto& pd_cfg = cfg.phase_diagram;
    const PhaseDiagram pd =
        phase_diagram(pd_cfg.psi_deg.linspace(), pd_cfg.damping.linspace(), pd_cfg.sigma,
                      pd_cfg.k, pd_cfg.f_p_GHz, pd_cfg.tol, g.workers);
    auto rec = writer.write_phase_diagram("phase_diagram_cells.csv", pd);
    log(g, "wrote " + rec.payload_path);
    rec = writer.write_boundary("phase_diagram_boundary.csv", pd);
    log(g, "wrote " + rec.payload_path);
    return 0;
}

struct FitFlags {
    std::string ridges_path;
    std::string spectrum_path;
    std::string window;  // MIN:MAX GHz
    std::string mode_label;
};

int run_fit(const GlobalOptions& g, const FitFlags& flags) {
    const Config cfg = load(g, "fit");
    OutputWriter writer(g.out_dir, cfg.snapshot_string());

    RidgeData ridges;
    if (!flags.ridges_path.empty()) {
        ridges = read_ridge_csv(flags.ridges_path);
    } else if (!flags.spectrum_path.empty()) {
        if (flags.window.empty())
            throw ConfigError("fit: --spectrum requires --window MIN:MAX (GHz)");
        const auto colon = flags.window.find(':');
        if (colon == std::string::npos)
            throw ConfigError("fit: --window expects MIN:MAX, got '" + flags.window + "'");
        double wlo = 0.0, whi = 0.0;
        try {
            wlo = std::stod(flags.window.substr(0, colon));
            whi = std::stod(flags.window.substr(colon + 1));
        } catch (...) {
            throw ConfigError("fit: --window expects MIN:MAX, got '" + flags.window + "'");
        }
        const SpectrumMap map = read_spectrum_csv(flags.spectrum_path);
        ridges = extract_ridges(map, wlo, whi);
    } else {
        throw ConfigError("fit: provide --ridges FILE or --spectrum FILE with --window");
    }

    // Mode selection: explicit label, else the mode nearest the median ridge
    // frequency.
    std::size_t n = cfg.system.modes.size();
    if (!flags.mode_label.empty()) {
        for (std::size_t m = 0; m < cfg.system.modes.size(); ++m)
            if (cfg.system.modes[m].label == flags.mode_label) n = m;
        if (n == cfg.system.modes.size())
            throw ConfigError("fit: no mode labeled '" + flags.mode_label + "'");
    } else {
        std::vector<double> freqs;
        for (const auto& p : ridges.points) {
            if (p.f_upper) freqs.push_back(*p.f_upper);
            if (p.f_lower) freqs.push_back(*p.f_lower);
        }
        std::sort(freqs.begin(), freqs.end());
        const double median = freqs[freqs.size() / 2];
        double best = -1.0;
        for (std::size_t m = 0; m < cfg.system.modes.size(); ++m) {
            const double d = std::abs(cfg.system.modes[m].f_n - median);
            if (best < 0.0 || d < best) {
                best = d;
                n = m;
            }
        }
    }
    const auto& mode = cfg.system.modes[n];
    log(g, "fitting center " + mode.label + " from " + std::to_string(ridges.points.size()) +
               " ridge points");

    FitResult fit;
    try {
        fit = fit_dispersion(ridges, cfg.system.magnon, mode, cfg.fit.options(g.workers));
    } catch (const FitNonConvergence& e) {
        // leave the best parameters and the iteration trace on disk before
        // reporting the failure
        writer.write_fit("fit_" + mode.label + "_best_so_far.txt", e.best);
        writer.write_fit_trace("fit_" + mode.label + "_trace.csv", e.best);
        throw;
    }
    const DecompositionResult decomp = decompose_coupling(
        fit, cfg.system.couplings[n].decomp.k_MP, cfg.system.couplings[n].quoted_k_PP);

    auto rec = writer.write_fit("fit_" + mode.label + ".txt", fit, &decomp);
    log(g, "wrote " + rec.payload_path);
    rec = writer.write_fit_trace("fit_" + mode.label + "_trace.csv", fit);
    log(g, "wrote " + rec.payload_path);

    std::cout << "mode " << mode.label << ": |K| = " << format_g12(fit.K_abs) << " ("
              << to_string(fit.kind) << "), alpha_cp = " << format_g12(fit.alpha_cp)
              << ", residual_rms = " << format_g12(fit.residual_rms) << " GHz\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"photon-magnon coupling toolkit"};
    app.require_subcommand(1);

    GlobalOptions g;
    app.add_option("--config", g.config_path, "config JSON path (defaults used when omitted)");
    app.add_option("--out", g.out_dir, "output directory")->capture_default_str();
    app.add_option("--override", g.overrides, "config override KEY=VALUE (repeatable)");
    app.add_option("--workers", g.workers, "worker threads for grid sweeps and fit restarts");
    app.add_option("--grid", g.grid, "grid size HxW (field x freq, or psi x damping)");
    app.add_option("--variant", g.variant, "sweep model: single | per-mode | multimode");
    app.add_flag("--verbose", g.verbose, "progress logging to stderr");

    auto* sub_kittel = app.add_subcommand("kittel", "FMR frequency vs field table");
    auto* sub_sweep = app.add_subcommand("sweep", "|S21|(H, f) map");
    auto* sub_disp = app.add_subcommand("dispersion", "per-center branch trajectories");
    auto* sub_phase = app.add_subcommand("phase-diagram", "CIT/CIA phase diagram");
    auto* sub_fit = app.add_subcommand("fit", "fit coupling constants to dispersion data");

    FitFlags fit_flags;
    sub_fit->add_option("--ridges", fit_flags.ridges_path, "ridge CSV input");
    sub_fit->add_option("--spectrum", fit_flags.spectrum_path, "spectrum CSV input");
    sub_fit->add_option("--window", fit_flags.window, "frequency window MIN:MAX in GHz");
    sub_fit->add_option("--mode", fit_flags.mode_label, "mode label to fit (default: nearest)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (sub_kittel->parsed()) return run_kittel(g);
        if (sub_sweep->parsed()) return run_sweep(g);
        if (sub_disp->parsed()) return run_dispersion(g);
        if (sub_phase->parsed()) return run_phase_diagram(g);
        if (sub_fit->parsed()) return run_fit(g, fit_flags);
    } catch (const pmc::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const pmc::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const pmc::NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
