// io.hpp — configuration ingestion, dataset ingestion and result persistence.
//
// Config files are JSON with fixed sections; unknown keys are rejected with
// their path. All numeric grids go to long-format CSV with a deterministic
// '#' header carrying the exact parameter snapshot and its hash; creation
// metadata lives in a sidecar .meta.json so payloads are byte-reproducible.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pmc/coupling.hpp"
#include "pmc/fitting.hpp"
#include "pmc/phasemap.hpp"
#include "pmc/transmission.hpp"

namespace pmc {

// ---------------------------------- config ----------------------------------

struct AxisSpec {
    double min = 0.0;
    double max = 0.0;
    std::size_t count = 0;

    std::vector<double> linspace() const { return SweepGrid::linspace(min, max, count); }
};

struct SweepSection {
    AxisSpec field{0.0, 0.3, 301};
    AxisSpec freq{4.0, 7.5, 351};
    std::string variant = "multimode";
    std::string single_mode;  // label; empty = first mode

    SweepGrid grid() const { return SweepGrid{field.linspace(), freq.linspace()}; }
    SpectrumVariant variant_enum() const;
};

struct KittelSection {
    double min = 0.0;
    double max = 0.3;
    std::size_t count = 301;
};

struct DispersionSection {
    double half_window_T = 0.02;
    std::size_t count = 401;
};

struct PhaseDiagramSection {
    double sigma = 2.0;
    double k = 0.02;
    double f_p_GHz = 5.56;
    AxisSpec psi_deg{0.0, 90.0, 181};
    AxisSpec damping{0.0, 0.06, 121};
    double tol = default_gap_tol;
};

struct FitSection {
    int restarts = 5;
    int max_iterations = 400;
    double field_offset_bound_T = 5e-3;

    FitOptions options(unsigned workers) const {
        FitOptions o;
        o.restarts = restarts;
        o.max_iterations = max_iterations;
        o.field_offset_bound = field_offset_bound_T;
        o.workers = workers;
        return o;
    }
};

struct Config {
    HybridSystem system;
    std::vector<PhotonPhaseProfile> profiles;  // parallel to system.modes
    SweepSection sweep;
    KittelSection kittel;
    DispersionSection dispersion;
    PhaseDiagramSection phase_diagram;
    FitSection fit;
    nlohmann::json snapshot;  // effective validated document (defaults applied)

    static Config defaults();
    std::string snapshot_string() const { return snapshot.dump(); }
};

// The full default document (the measured three-mode system and the grid
// specs used by the CLI subcommands).
nlohmann::json default_config_json();

// Parses and validates a user document merged over the defaults. Throws
// ConfigError with key-path context.
Config config_from_json(const nlohmann::json& user);

// load_config = read file + apply dotted-key overrides + validate.
Config load_config(const std::string& path, const std::vector<std::string>& overrides = {});
Config config_with_overrides(const nlohmann::json& user, const std::vector<std::string>& overrides);

// "a.b.0.c=value" / "a.*.c=value"; value parsed as JSON when possible.
void apply_override(nlohmann::json& doc, const std::string& assignment);

// ----------------------------------- files ----------------------------------

std::uint64_t fnv1a_hash(std::string_view text) noexcept;
std::string format_g12(double v);  // 12 significant digits

SpectrumMap read_spectrum_csv(const std::string& path);
RidgeData read_ridge_csv(const std::string& path);

struct OutputRecord {
    std::string kind;
    std::string payload_path;
    std::string params_hash;
    std::string created;  // creation metadata, sidecar only
};

class OutputWriter {
  public:
    OutputWriter(std::string out_dir, std::string params_json);

    OutputRecord write_spectrum(const std::string& name, const SpectrumMap& map);
    OutputRecord write_kittel(const std::string& name, const std::vector<double>& field_T,
                              const std::vector<double>& f_GHz);
    // One row per (field, branch): mu0_H_T, branch_id, f_GHz, linewidth_GHz.
    OutputRecord write_branches(const std::string& name, const std::vector<double>& field_T,
                                const std::vector<std::string>& branch_ids,
                                const std::vector<std::vector<Complex>>& eigenvalues);
    OutputRecord write_phase_diagram(const std::string& name, const PhaseDiagram& pd);
    OutputRecord write_boundary(const std::string& name, const PhaseDiagram& pd);
    OutputRecord write_regimes(
        const std::string& name,
        const std::vector<std::pair<std::string, CenterClassification>>& rows);
    OutputRecord write_fit(const std::string& name, const FitResult& fit,
                           const DecompositionResult* decomposition = nullptr);
    OutputRecord write_fit_trace(const std::string& name, const FitResult& fit);

  private:
    std::string dir_;
    std::string params_json_;
    std::string params_hash_;

    std::string payload_path(const std::string& name) const;
    void write_text(const std::string& path, const std::string& text) const;
    std::string header(const std::string& kind, const std::string& extra = "") const;
    OutputRecord finish(const std::string& kind, const std::string& path) const;
};

} // namespace pmc
