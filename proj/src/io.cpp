#include "pmc/io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "pmc/errors.hpp"

namespace pmc {

using nlohmann::json;

std::uint64_t fnv1a_hash(std::string_view text) noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string format_g12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// ---------------------------------- config ----------------------------------

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw ConfigError("config: " + path + ": " + msg);
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) fail(path, "expected an object");
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* k : allowed)
            if (item.key() == k) {
                known = true;
                break;
            }
        if (!known) fail(path, "unknown key '" + item.key() + "'");
    }
}

double need_number(const json& obj, const std::string& path, const char* key) {
    if (!obj.contains(key)) fail(path, std::string("missing key '") + key + "'");
    const json& v = obj.at(key);
    if (!v.is_number()) fail(path + "." + key, "expected a number");
    return v.get<double>();
}

double number_or(const json& obj, const std::string& path, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) fail(path + "." + key, "expected a number");
    return v.get<double>();
}

std::size_t need_count(const json& obj, const std::string& path, const char* key) {
    if (!obj.contains(key)) fail(path, std::string("missing key '") + key + "'");
    const json& v = obj.at(key);
    if (!v.is_number_unsigned() && !v.is_number_integer())
        fail(path + "." + key, "expected a nonnegative integer");
    const auto n = v.get<long long>();
    if (n < 0) fail(path + "." + key, "expected a nonnegative integer");
    return static_cast<std::size_t>(n);
}

std::string string_or(const json& obj, const std::string& path, const char* key,
                      const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_string()) fail(path + "." + key, "expected a string");
    return v.get<std::string>();
}

Complex parse_complex(const json& v, const std::string& path) {
    if (v.is_number()) return Complex{v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return Complex{v[0].get<double>(), v[1].get<double>()};
    fail(path, "expected a number or [re, im]");
}

AxisSpec parse_axis(const json& obj, const std::string& path, std::size_t min_count = 2) {
    check_keys(obj, path, {"min", "max", "count"});
    AxisSpec a;
    a.min = need_number(obj, path, "min");
    a.max = need_number(obj, path, "max");
    a.count = need_count(obj, path, "count");
    if (a.count < min_count)
        fail(path + ".count", "needs >= " + std::to_string(min_count) + " points");
    if (a.count >= 2 && !(a.max > a.min)) fail(path, "max must exceed min");
    return a;
}

MagnonParams parse_magnon(const json& obj, const std::string& path) {
    check_keys(obj, path,
               {"gamma_over_2pi_GHz_per_T", "gamma_rad_per_Ts", "mu0_Ms_T", "alpha_in",
                "alpha_cp"});
    MagnonParams p;
    const bool has_ghz = obj.contains("gamma_over_2pi_GHz_per_T");
    const bool has_rad = obj.contains("gamma_rad_per_Ts");
    if (has_ghz && has_rad) fail(path, "give the gyromagnetic ratio in exactly one form");
    if (has_rad)
        p.gamma_over_2pi = need_number(obj, path, "gamma_rad_per_Ts") / (two_pi * 1e9);
    else if (has_ghz)
        p.gamma_over_2pi = need_number(obj, path, "gamma_over_2pi_GHz_per_T");
    p.mu0_Ms = number_or(obj, path, "mu0_Ms_T", p.mu0_Ms);
    p.alpha_in = number_or(obj, path, "alpha_in", p.alpha_in);
    p.alpha_cp = number_or(obj, path, "alpha_cp", p.alpha_cp);
    return p;
}

PhotonMode parse_mode(const json& obj, const std::string& path) {
    check_keys(obj, path, {"label", "f_GHz", "beta_in", "sigma", "sigma_dB", "psi_deg", "lumped"});
    PhotonMode m;
    m.label = string_or(obj, path, "label", "");
    if (m.label.empty()) fail(path, "missing key 'label'");
    m.f_n = need_number(obj, path, "f_GHz");
    m.beta_in = need_number(obj, path, "beta_in");
    if (obj.contains("lumped")) {
        const std::string lp = path + ".lumped";
        check_keys(obj.at("lumped"), lp, {"L_H", "C_F", "R_ohm"});
        LumpedElements le;
        le.L = need_number(obj.at("lumped"), lp, "L_H");
        le.C = need_number(obj.at("lumped"), lp, "C_F");
        le.R = need_number(obj.at("lumped"), lp, "R_ohm");
        m.lumped = le;
    }
    return m;
}

PhotonPhaseProfile parse_profile(const json& obj, const std::string& path) {
    PhotonPhaseProfile p;
    p.sigma = number_or(obj, path, "sigma", 0.0);
    p.psi_deg = number_or(obj, path, "psi_deg", 0.0);
    if (obj.contains("sigma_dB") && !obj.at("sigma_dB").is_number())
        fail(path + ".sigma_dB", "expected a number");  // documentation only
    return p;
}

ModeCoupling parse_coupling(const json& obj, const std::string& path) {
    check_keys(obj, path,
               {"mode", "k_MP", "k_PP", "alpha_cp", "gamma", "quoted_k_PP", "allow_large",
                "micro", "rates"});
    ModeCoupling c;
    if (obj.contains("k_MP")) c.decomp.k_MP = parse_complex(obj.at("k_MP"), path + ".k_MP");
    c.decomp.k_PP = number_or(obj, path, "k_PP", 0.0);
    c.alpha_cp = number_or(obj, path, "alpha_cp", 0.0);
    if (obj.contains("gamma")) c.gamma = need_number(obj, path, "gamma");
    if (obj.contains("quoted_k_PP")) {
        if (!obj.at("quoted_k_PP").is_null()) c.quoted_k_PP = need_number(obj, path, "quoted_k_PP");
    }
    if (obj.contains("allow_large")) {
        if (!obj.at("allow_large").is_boolean()) fail(path + ".allow_large", "expected a boolean");
        c.allow_large = obj.at("allow_large").get<bool>();
    }
    if (obj.contains("micro")) {
        const std::string mp = path + ".micro";
        check_keys(obj.at("micro"), mp, {"k_F", "k_A", "k_L"});
        c.decomp.micro = MicroRates{need_number(obj.at("micro"), mp, "k_F"),
                                    need_number(obj.at("micro"), mp, "k_A"),
                                    need_number(obj.at("micro"), mp, "k_L")};
    }
    if (obj.contains("rates")) {
        const std::string rp = path + ".rates";
        check_keys(obj.at("rates"), rp, {"k_c", "k_d"});
        c.decomp.rates = CoherentDissipativeRates{need_number(obj.at("rates"), rp, "k_c"),
                                                  need_number(obj.at("rates"), rp, "k_d")};
    }
    return c;
}

json deep_merge(json base, const json& user) {
    if (!base.is_object() || !user.is_object()) return user;
    for (const auto& item : user.items()) {
        if (base.contains(item.key()))
            base[item.key()] = deep_merge(base[item.key()], item.value());
        else
            base[item.key()] = item.value();
    }
    return base;
}

void set_path(json& node, const std::vector<std::string>& tokens, std::size_t pos,
              const json& value, const std::string& full_key) {
    if (pos == tokens.size()) {
        node = value;
        return;
    }
    const std::string& tok = tokens[pos];
    if (tok == "*") {
        if (!node.is_array())
            throw ConfigError("override '" + full_key + "': '*' requires an array");
        for (auto& elem : node) set_path(elem, tokens, pos + 1, value, full_key);
        return;
    }
    if (node.is_array()) {
        std::size_t idx = 0;
        try {
            idx = std::stoul(tok);
        } catch (...) {
            throw ConfigError("override '" + full_key + "': '" + tok +
                              "' is not an array index");
        }
        if (idx >= node.size())
            throw ConfigError("override '" + full_key + "': index " + tok + " out of range");
        set_path(node[idx], tokens, pos + 1, value, full_key);
        return;
    }
    if (node.is_object() || node.is_null()) {
        set_path(node[tok], tokens, pos + 1, value, full_key);
        return;
    }
    throw ConfigError("override '" + full_key + "': cannot descend into a scalar at '" + tok +
                      "'");
}

} // namespace

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("override '" + assignment + "' is not of the form KEY=VALUE");
    const std::string key = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);

    std::vector<std::string> tokens;
    std::stringstream ss(key);
    std::string tok;
    while (std::getline(ss, tok, '.')) {
        if (tok.empty()) throw ConfigError("override '" + assignment + "' has an empty key part");
        tokens.push_back(tok);
    }
    if (tokens.empty()) throw ConfigError("override '" + assignment + "' has an empty key");

    json value = json::parse(raw, nullptr, /*allow_exceptions=*/false);
    if (value.is_discarded()) value = raw;  // plain string
    set_path(doc, tokens, 0, value, key);
}

nlohmann::json default_config_json() {
    const HybridSystem sys = default_three_mode_system();
    json j;
    j["magnon"] = {{"gamma_over_2pi_GHz_per_T", sys.magnon.gamma_over_2pi},
                   {"mu0_Ms_T", sys.magnon.mu0_Ms},
                   {"alpha_in", sys.magnon.alpha_in},
                   {"alpha_cp", sys.magnon.alpha_cp}};

    // sigma_dB keeps the measured feed-line amplitudes on record; sigma itself
    // is the linear ratio actually consumed.
    const double sigma_db[3] = {-33.0, -20.8, -22.5};
    const double psi_deg[3] = {70.0, 170.0, -320.0};
    j["modes"] = json::array();
    for (std::size_t n = 0; n < sys.modes.size(); ++n) {
        j["modes"].push_back({{"label", sys.modes[n].label},
                              {"f_GHz", sys.modes[n].f_n},
                              {"beta_in", sys.modes[n].beta_in},
                              {"sigma", linear_from_db(sigma_db[n])},
                              {"sigma_dB", sigma_db[n]},
                              {"psi_deg", psi_deg[n]}});
    }

    j["couplings"] = json::array();
    for (std::size_t n = 0; n < sys.couplings.size(); ++n) {
        const auto& c = sys.couplings[n];
        json jc = {{"mode", sys.modes[n].label},
                   {"k_MP", json::array({c.decomp.k_MP.real(), c.decomp.k_MP.imag()})},
                   {"k_PP", c.decomp.k_PP},
                   {"alpha_cp", c.alpha_cp}};
        if (c.quoted_k_PP) jc["quoted_k_PP"] = *c.quoted_k_PP;
        j["couplings"].push_back(jc);
    }

    j["sweep"] = {{"field_T", {{"min", 0.05}, {"max", 0.3}, {"count", 301}}},
                  {"freq_GHz", {{"min", 4.0}, {"max", 7.5}, {"count", 351}}},
                  {"variant", "multimode"},
                  {"single_mode", "P1"}};
    j["kittel"] = {{"field_T", {{"min", 0.0}, {"max", 0.3}, {"count", 301}}}};
    j["dispersion"] = {{"half_window_T", 0.02}, {"count", 401}};
    j["phase_diagram"] = {{"sigma", 2.0},
                          {"k", 0.02},
                          {"f_p_GHz", 5.56},
                          {"psi_deg", {{"min", 0.0}, {"max", 90.0}, {"count", 181}}},
                          {"damping", {{"min", 0.0}, {"max", 0.06}, {"count", 121}}},
                          {"tol", default_gap_tol}};
    j["fit"] = {{"restarts", 5}, {"max_iterations", 400}, {"field_offset_bound_T", 5e-3}};
    return j;
}

SpectrumVariant SweepSection::variant_enum() const {
    if (variant == "single") return SpectrumVariant::single;
    if (variant == "per-mode") return SpectrumVariant::per_mode;
    if (variant == "multimode") return SpectrumVariant::multimode;
    throw ConfigError("config: sweep.variant must be one of single, per-mode, multimode; got '" +
                      variant + "'");
}

Config config_from_json(const json& user) {
    json base = default_config_json();
    // A user choosing the rad/(T s) gyromagnetic-ratio form must not collide
    // with the default GHz/T entry.
    if (user.is_object() && user.contains("magnon") && user.at("magnon").is_object() &&
        user.at("magnon").contains("gamma_rad_per_Ts") &&
        !user.at("magnon").contains("gamma_over_2pi_GHz_per_T"))
        base["magnon"].erase("gamma_over_2pi_GHz_per_T");
    if (!user.is_null() && !user.is_object()) throw ConfigError("config: root must be an object");
    json doc = user.is_null() ? base : deep_merge(base, user);

    check_keys(doc, "root",
               {"magnon", "modes", "couplings", "sweep", "kittel", "dispersion", "phase_diagram",
                "fit"});

    Config cfg;
    cfg.system.magnon = parse_magnon(doc.at("magnon"), "magnon");

    if (!doc.at("modes").is_array() || doc.at("modes").empty())
        fail("modes", "expected a nonempty array of photon modes");
    for (std::size_t n = 0; n < doc.at("modes").size(); ++n) {
        const std::string path = "modes[" + std::to_string(n) + "]";
        cfg.system.modes.push_back(parse_mode(doc.at("modes")[n], path));
        cfg.profiles.push_back(parse_profile(doc.at("modes")[n], path));
        for (std::size_t m = 0; m < n; ++m)
            if (cfg.system.modes[m].label == cfg.system.modes[n].label)
                fail(path + ".label", "duplicate mode label '" + cfg.system.modes[n].label + "'");
    }

    if (!doc.at("couplings").is_array())
        fail("couplings", "expected an array with one entry per mode");
    std::vector<ModeCoupling> by_label(cfg.system.modes.size());
    std::vector<bool> seen(cfg.system.modes.size(), false);
    for (std::size_t n = 0; n < doc.at("couplings").size(); ++n) {
        const std::string path = "couplings[" + std::to_string(n) + "]";
        const json& jc = doc.at("couplings")[n];
        const std::string label = string_or(jc, path, "mode", "");
        if (label.empty()) fail(path, "missing key 'mode'");
        std::size_t idx = cfg.system.modes.size();
        for (std::size_t m = 0; m < cfg.system.modes.size(); ++m)
            if (cfg.system.modes[m].label == label) idx = m;
        if (idx == cfg.system.modes.size())
            fail(path + ".mode", "no photon mode labeled '" + label + "'");
        if (seen[idx]) fail(path, "duplicate coupling entry for mode '" + label + "'");
        seen[idx] = true;
        by_label[idx] = parse_coupling(jc, path);
    }
    for (std::size_t m = 0; m < seen.size(); ++m)
        if (!seen[m]) fail("couplings", "no entry for mode '" + cfg.system.modes[m].label + "'");
    cfg.system.couplings = std::move(by_label);

    const json& jsweep = doc.at("sweep");
    check_keys(jsweep, "sweep", {"field_T", "freq_GHz", "variant", "single_mode"});
    cfg.sweep.field = parse_axis(jsweep.at("field_T"), "sweep.field_T");
    cfg.sweep.freq = parse_axis(jsweep.at("freq_GHz"), "sweep.freq_GHz");
    cfg.sweep.variant = string_or(jsweep, "sweep", "variant", "multimode");
    cfg.sweep.variant_enum();
    cfg.sweep.single_mode = string_or(jsweep, "sweep", "single_mode", "");

    const json& jkittel = doc.at("kittel");
    check_keys(jkittel, "kittel", {"field_T"});
    const AxisSpec krange = parse_axis(jkittel.at("field_T"), "kittel.field_T", 1);
    cfg.kittel.min = krange.min;
    cfg.kittel.max = krange.max;
    cfg.kittel.count = krange.count;
    if (cfg.kittel.count == 1 && cfg.kittel.max != cfg.kittel.min)
        fail("kittel.field_T", "a single-point range needs min == max");

    const json& jdisp = doc.at("dispersion");
    check_keys(jdisp, "dispersion", {"half_window_T", "count"});
    cfg.dispersion.half_window_T = need_number(jdisp, "dispersion", "half_window_T");
    cfg.dispersion.count = need_count(jdisp, "dispersion", "count");
    if (cfg.dispersion.count < 2) fail("dispersion.count", "needs >= 2 points");
    if (!(cfg.dispersion.half_window_T > 0.0)) fail("dispersion.half_window_T", "must be > 0");

    const json& jpd = doc.at("phase_diagram");
    check_keys(jpd, "phase_diagram", {"sigma", "k", "f_p_GHz", "psi_deg", "damping", "tol"});
    cfg.phase_diagram.sigma = need_number(jpd, "phase_diagram", "sigma");
    cfg.phase_diagram.k = need_number(jpd, "phase_diagram", "k");
    cfg.phase_diagram.f_p_GHz = need_number(jpd, "phase_diagram", "f_p_GHz");
    cfg.phase_diagram.psi_deg = parse_axis(jpd.at("psi_deg"), "phase_diagram.psi_deg");
    cfg.phase_diagram.damping = parse_axis(jpd.at("damping"), "phase_diagram.damping");
    cfg.phase_diagram.tol = number_or(jpd, "phase_diagram", "tol", default_gap_tol);
    if (!(cfg.phase_diagram.tol > 0.0)) fail("phase_diagram.tol", "must be > 0");

    const json& jfit = doc.at("fit");
    check_keys(jfit, "fit", {"restarts", "max_iterations", "field_offset_bound_T"});
    cfg.fit.restarts = static_cast<int>(need_count(jfit, "fit", "restarts"));
    cfg.fit.max_iterations = static_cast<int>(need_count(jfit, "fit", "max_iterations"));
    cfg.fit.field_offset_bound_T = need_number(jfit, "fit", "field_offset_bound_T");
    if (cfg.fit.restarts < 1 || cfg.fit.restarts > 5)
        fail("fit.restarts", "needs 1..5 (there are 5 deterministic seeds)");
    if (cfg.fit.max_iterations < 1) fail("fit.max_iterations", "needs >= 1");
    if (!(cfg.fit.field_offset_bound_T > 0.0)) fail("fit.field_offset_bound_T", "must be > 0");

    try {
        for (auto& profile : cfg.profiles) profile.validate();
        cfg.system.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }

    cfg.snapshot = std::move(doc);
    return cfg;
}

Config Config::defaults() { return config_from_json(json(nullptr)); }

Config config_with_overrides(const json& user, const std::vector<std::string>& overrides) {
    json base = default_config_json();
    if (user.is_object() && user.contains("magnon") && user.at("magnon").is_object() &&
        user.at("magnon").contains("gamma_rad_per_Ts") &&
        !user.at("magnon").contains("gamma_over_2pi_GHz_per_T"))
        base["magnon"].erase("gamma_over_2pi_GHz_per_T");
    json doc = user.is_null() ? base : deep_merge(base, user);
    for (const auto& o : overrides) apply_override(doc, o);
    return config_from_json(doc);
}

Config load_config(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    json user;
    try {
        user = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config: " + path + ": " + e.what());
    }
    return config_with_overrides(user, overrides);
}

// ----------------------------------- files ----------------------------------

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

double parse_double(const std::string& text, const std::string& where) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (...) {
        throw IoError(where + ": cannot parse number '" + text + "'");
    }
}

std::vector<std::string> read_data_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        lines.push_back(line);
    }
    return lines;
}

std::string now_iso8601() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace

SpectrumMap read_spectrum_csv(const std::string& path) {
    const auto lines = read_data_lines(path);
    if (lines.empty()) throw IoError(path + ": empty file");

    const auto header = split_csv_line(lines[0]);
    if (header.size() != 3 || header[0] != "mu0_H_T" || header[1] != "f_GHz" ||
        (header[2] != "s21_linear" && header[2] != "s21_dB"))
        throw IoError(path + ": header must be mu0_H_T,f_GHz,s21_linear or mu0_H_T,f_GHz,s21_dB");
    const bool in_db = header[2] == "s21_dB";

    struct Row {
        double h, f, v;
    };
    std::vector<Row> rows;
    rows.reserve(lines.size() - 1);
    std::map<double, std::size_t> h_index, f_index;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto fields = split_csv_line(lines[i]);
        const std::string where = path + ":" + std::to_string(i + 1);
        if (fields.size() != 3) throw IoError(where + ": expected 3 columns");
        Row r{parse_double(fields[0], where), parse_double(fields[1], where),
              parse_double(fields[2], where)};
        if (in_db) r.v = linear_from_db(r.v);
        rows.push_back(r);
        h_index.emplace(r.h, 0);
        f_index.emplace(r.f, 0);
    }

    SpectrumMap map;
    map.variant = "file";
    map.normalized = false;
    std::size_t k = 0;
    for (auto& [h, idx] : h_index) {
        idx = k++;
        map.grid.field_T.push_back(h);
    }
    k = 0;
    for (auto& [f, idx] : f_index) {
        idx = k++;
        map.grid.freq_GHz.push_back(f);
    }
    map.grid.validate();

    const auto nh = static_cast<Eigen::Index>(map.grid.field_T.size());
    const auto nf = static_cast<Eigen::Index>(map.grid.freq_GHz.size());
    map.values.resize(nh, nf);
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> seen(nh, nf);
    seen.setConstant(false);
    for (const auto& r : rows) {
        const auto i = static_cast<Eigen::Index>(h_index.at(r.h));
        const auto j = static_cast<Eigen::Index>(f_index.at(r.f));
        if (seen(i, j))
            throw IoError(path + ": duplicate coordinate (mu0_H = " + format_g12(r.h) +
                          ", f = " + format_g12(r.f) + ")");
        seen(i, j) = true;
        map.values(i, j) = r.v;
    }
    if (rows.size() != static_cast<std::size_t>(nh * nf)) {
        std::string missing;
        int listed = 0;
        for (Eigen::Index i = 0; i < nh && listed < 5; ++i)
            for (Eigen::Index j = 0; j < nf && listed < 5; ++j)
                if (!seen(i, j)) {
                    missing += " (" + format_g12(map.grid.field_T[static_cast<std::size_t>(i)]) +
                               ", " + format_g12(map.grid.freq_GHz[static_cast<std::size_t>(j)]) +
                               ")";
                    ++listed;
                }
        throw IoError(path + ": ragged grid, missing cells:" + missing);
    }
    return map;
}

RidgeData read_ridge_csv(const std::string& path) {
    const auto lines = read_data_lines(path);
    if (lines.empty()) throw IoError(path + ": empty file");
    const auto header = split_csv_line(lines[0]);
    if (header.size() != 4 || header[0] != "mu0_H_T" || header[1] != "f_upper_GHz" ||
        header[2] != "f_lower_GHz" || header[3] != "weight")
        throw IoError(path + ": header must be mu0_H_T,f_upper_GHz,f_lower_GHz,weight");

    RidgeData out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto fields = split_csv_line(lines[i]);
        const std::string where = path + ":" + std::to_string(i + 1);
        if (fields.size() != 4) throw IoError(where + ": expected 4 columns");
        RidgePoint p;
        p.mu0_H = parse_double(fields[0], where);
        if (!fields[1].empty()) p.f_upper = parse_double(fields[1], where);
        if (!fields[2].empty()) p.f_lower = parse_double(fields[2], where);
        p.weight = fields[3].empty() ? 1.0 : parse_double(fields[3], where);
        out.points.push_back(p);
    }
    try {
        out.validate();
    } catch (const std::exception& e) {
        throw IoError(path + ": " + e.what());
    }
    return out;
}

// -------------------------------- output writer ------------------------------

OutputWriter::OutputWriter(std::string out_dir, std::string params_json)
    : dir_(std::move(out_dir)), params_json_(std::move(params_json)) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a_hash(params_json_)));
    params_hash_ = buf;
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory '" + dir_ + "': " + ec.message());
}

std::string OutputWriter::payload_path(const std::string& name) const {
    return (std::filesystem::path(dir_) / name).string();
}

void OutputWriter::write_text(const std::string& path, const std::string& text) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("write failed for '" + path + "'");
}

std::string OutputWriter::header(const std::string& kind, const std::string& extra) const {
    std::string h = "# kind: " + kind + "\n# params_hash: " + params_hash_ +
                    "\n# params: " + params_json_ + "\n";
    h += extra;
    return h;
}

OutputRecord OutputWriter::finish(const std::string& kind, const std::string& path) const {
    OutputRecord rec;
    rec.kind = kind;
    rec.payload_path = path;
    rec.params_hash = params_hash_;
    rec.created = now_iso8601();
    nlohmann::json meta = {{"kind", rec.kind},
                           {"payload", std::filesystem::path(path).filename().string()},
                           {"params_hash", rec.params_hash},
                           {"created", rec.created}};
    write_text(path + ".meta.json", meta.dump(2) + "\n");
    return rec;
}

OutputRecord OutputWriter::write_spectrum(const std::string& name, const SpectrumMap& map) {
    if (map.values.size() == 0 || map.grid.field_T.empty() || map.grid.freq_GHz.empty())
        throw IoError("write_spectrum: empty grid, nothing written");
    map.grid.validate();

    std::string text = header("spectrum", "# variant: " + map.variant +
                                              "\n# normalized: " +
                                              (map.normalized ? "true" : "false") +
                                              "\n# norm_scale: " + format_g12(map.norm_scale) +
                                              "\n# saturated_cells: " +
                                              std::to_string(map.saturated.size()) + "\n");
    text += "mu0_H_T,f_GHz,s21_linear\n";
    for (std::size_t i = 0; i < map.grid.field_T.size(); ++i)
        for (std::size_t j = 0; j < map.grid.freq_GHz.size(); ++j) {
            text += format_g12(map.grid.field_T[i]);
            text += ',';
            text += format_g12(map.grid.freq_GHz[j]);
            text += ',';
            text += format_g12(
                map.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
            text += '\n';
        }
    const std::string path = payload_path(name);
    write_text(path, text);
    return finish("spectrum", path);
}

OutputRecord OutputWriter::write_kittel(const std::string& name,
                                        const std::vector<double>& field_T,
                                        const std::vector<double>& f_GHz) {
    if (field_T.empty() || field_T.size() != f_GHz.size())
        throw IoError("write_kittel: empty or mismatched columns");
    std::string text = header("kittel");
    text += "mu0_H_T,f_FMR_GHz\n";
    for (std::size_t i = 0; i < field_T.size(); ++i)
        text += format_g12(field_T[i]) + "," + format_g12(f_GHz[i]) + "\n";
    const std::string path = payload_path(name);
    write_text(path, text);
    return finish("kittel", path);
}

OutputRecord OutputWriter::write_branches(const std::string& name,
                                          const std::vector<double>& field_T,
                                          const std::vector<std::string>& branch_ids,
                                          const std::vector<std::vector<Complex>>& eigenvalues) {
    if (field_T.empty() || eigenvalues.size() != field_T.size())
        throw IoError("write_branches: empty or mismatched data");
    std::string text = header("branches");
    text += "mu0_H_T,branch_id,f_GHz,linewidth_GHz\n";
    for (std::size_t i = 0; i < field_T.size(); ++i) {
        if (eigenvalues[i].size() != branch_ids.size())
            throw IoError("write_branches: branch count mismatch at row " + std::to_string(i));
        for (std::size_t b = 0; b < branch_ids.size(); ++b) {
            const Complex e = eigenvalues[i][b];
            text += format_g12(field_T[i]) + "," + branch_ids[b] + "," +
                    format_g12(ghz_from_rad(e.real())) + "," +
                    format_g12(ghz_from_rad(-e.imag())) + "\n";
        }
    }
    const std::string path = payload_path(name);
    write_text(path, text);
    return finish("branches", path);
}

OutputRecord OutputWriter::write_phase_diagram(const std::string& name, const PhaseDiagram& pd) {
    if (pd.gap_GHz.size() == 0) throw IoError("write_phase_diagram: empty grid, nothing written");
    std::string text = header("phase-diagram");
    text += "psi_deg,damping,gap_GHz,kind,regime\n";
    for (std::size_t i = 0; i < pd.psi_deg_axis.size(); ++i)
        for (std::size_t j = 0; j < pd.damping_axis.size(); ++j) {
            const RegimeCell c = pd.cell(i, j);
            text += format_g12(pd.psi_deg_axis[i]) + "," + format_g12(pd.damping_axis[j]) + "," +
                    format_g12(c.delta.gap_GHz) + "," + to_string(c.delta.kind) + "," +
                    to_string(c.regime) + "\n";
        }
    const std::string path = payload_path(name);
    write_text(path, text);
    return finish("phase-diagram", path);
}

OutputRecord OutputWriter::write_boundary(const std::string& name, const PhaseDiagram& pd) {
    std::string text = header("phase-boundary");
    text += "damping,psi_star_deg\n";
    for (const auto& [d, psi] : pd.boundary)
        text += format_g12(d) + "," + format_g12(psi) + "\n";
    const std::string path = payload_path(name);
    write_text(path, text);
    return finish("phase-boundary", path);
}

OutputRecord OutputWriter::write_regimes(
    const std::string& name,
    const std::vector<std::pair<std::string, CenterClassification>>& rows) {
    std::string text = header("regimes");
    text += "mode,regime,center_gap_GHz,gap_scale_GHz,absorption_ratio\n";
    for (const auto& [label, c] : rows)
        text += label + "," + to_string(c.regime) + "," + format_g12(c.center_gap_GHz) + "," +
                format_g12(c.gap_scale_GHz) + "," + format_g12(c.absorption_ratio) + "\n";
    const std::string path = payload_path(name);
    write_text(path, text);
    return finish("regimes", path);
}

OutputRecord OutputWriter::write_fit(const std::string& name, const FitResult& fit,
                                     const DecompositionResult* decomposition) {
    std::string text = header("fit");
    text += "K_abs: " + format_g12(fit.K_abs) + "\n";
    text += std::string("K_kind: ") + to_string(fit.kind) + "\n";
    text += "alpha_cp: " + format_g12(fit.alpha_cp) + "\n";
    text += "crossing_field_T: " + format_g12(fit.crossing_field) + "\n";
    text += "residual_rms_GHz: " + format_g12(fit.residual_rms) + "\n";
    text += "residual_rms_real_GHz: " + format_g12(fit.residual_rms_real) + "\n";
    text += "residual_rms_imag_GHz: " + format_g12(fit.residual_rms_imag) + "\n";
    text += "sensitivity_K_abs: " + format_g12(fit.sensitivity[0]) + "\n";
    text += "sensitivity_alpha_cp: " + format_g12(fit.sensitivity[1]) + "\n";
    text += "sensitivity_field_T: " + format_g12(fit.sensitivity[2]) + "\n";
    text += std::string("converged: ") + (fit.converged ? "true" : "false") + "\n";
    text += "iterations: " + std::to_string(fit.iterations) + "\n";
    if (decomposition) {
        text += "k_MP: [" + format_g12(decomposition->decomp.k_MP.real()) + ", " +
                format_g12(decomposition->decomp.k_MP.imag()) + "]\n";
        text += "k_PP: " + format_g12(decomposition->decomp.k_PP) + "\n";
        text += std::string("k_PP_complex_warning: ") +
                (decomposition->complex_k_PP ? "true" : "false") + "\n";
        if (decomposition->quoted_k_PP) {
            text += "quoted_k_PP: " + format_g12(*decomposition->quoted_k_PP) + "\n";
            text += std::string("quoted_k_PP_mismatch: ") +
                    (decomposition->quoted_mismatch ? "true" : "false") + "\n";
        }
    }
    const std::string path = payload_path(name);
    write_text(path, text);
    return finish("fit", path);
}

OutputRecord OutputWriter::write_fit_trace(const std::string& name, const FitResult& fit) {
    std::string text = header("fit-trace");
    text += "hypothesis,restart,iteration,best_rms_GHz\n";
    for (const auto& t : fit.trace)
        text += std::string(to_string(t.kind)) + "," + std::to_string(t.restart) + "," +
                std::to_string(t.iteration) + "," + format_g12(t.best_rms) + "\n";
    const std::string path = payload_path(name);
    write_text(path, text);
    return finish("fit-trace", path);
}

} // namespace pmc
