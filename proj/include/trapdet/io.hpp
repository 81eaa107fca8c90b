#pragma once

// Run configuration, tabular output (CSV / JSON) and run manifests.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "trapdet/error.hpp"
#include "trapdet/units.hpp"

namespace trapdet::io {

using json = nlohmann::ordered_json;

inline constexpr char const* tool_version = "0.1.0";
inline constexpr char const* output_dir_env = "TRAPDET_OUTPUT_DIR";

//---------------------------------------------------------------------------//
// Configuration
//---------------------------------------------------------------------------//

//! Leaf types: number, integer, string, bool; a trailing '?' allows null.
//! "numbers" accepts a number or an array of numbers, "vec3" three numbers.
inline json const& config_schema() {
    static json const schema = json::parse(R"({
      "command": "string?",
      "seed": "integer",
      "trap": {
        "species": "string", "kind": "string", "omega_rad_s": "number?", "freq_hz": "number?",
        "n_sensors": "integer", "electrode_distance_m": "number?", "heating_rate_per_s": "number?"
      },
      "model": {"m_chi_gev": "number", "q_chi": "number", "f_q": "number", "rho_gev_cm3": "number"},
      "distribution": {
        "kind": "string", "temperature_k": "number", "v0_kms": "number", "v_esc_kms": "number",
        "v_earth_kms": "number", "v_kms": "number?", "direction": "vec3?"
      },
      "exposure": {"t_obs_days": "number", "n_required": "number"},
      "conventions": {"impulse": "string", "vmin_mode": "string", "acceptance": "bool"},
      "output": {"dir": "string?", "path": "string?", "format": "string"},
      "threshold": {
        "dp_evc": "number?", "scale_distance_m": "number?", "scale_species": "string?",
        "energy_unit": "string", "list_species": "bool"
      },
      "xsec": {"v_over_c": "number?", "v_kms": "number?", "b_nm": "number?", "dp_evc": "number?", "unit": "string"},
      "rate": {"dp_min_evc": "number?", "dp_max_evc": "number?", "n_points": "integer"},
      "sensitivity": {"m_min_gev": "number", "m_max_gev": "number", "n_points": "integer"},
      "flux": {
        "projectile": "string", "e_min_ev": "number", "e_max_ev": "number", "n_points": "integer",
        "rate_per_day": "number"
      },
      "tof": {
        "projectile": "string", "energy_ev": "number", "de_ev": "number?", "baseline_mm": "number?",
        "v_kms": "number?"
      },
      "validate": {
        "ode": {
          "omega_tau": "numbers?", "b_m": "number", "axis": "integer", "rel_tol": "number",
          "window_tau": "number", "projectile_q": "number"
        },
        "mc": {
          "n_samples": "integer", "floor_fraction": "number", "b_cut_m": "number?",
          "bins_per_decade": "integer", "n_decades": "integer", "axis": "vec3", "n_streams": "integer"
        }
      }
    })");
    return schema;
}

inline json default_config() {
    return json::parse(R"({
      "command": null,
      "seed": 1,
      "trap": {
        "species": "electron", "kind": "penning", "omega_rad_s": null, "freq_hz": null,
        "n_sensors": 1, "electrode_distance_m": null, "heating_rate_per_s": null
      },
      "model": {"m_chi_gev": 1.0, "q_chi": 1.0, "f_q": 0.004, "rho_gev_cm3": 0.3},
      "distribution": {
        "kind": "thermal", "temperature_k": 300.0, "v0_kms": 220.0, "v_esc_kms": 544.0,
        "v_earth_kms": 232.0, "v_kms": null, "direction": null
      },
      "exposure": {"t_obs_days": 1.0, "n_required": 3.0},
      "conventions": {"impulse": "paper", "vmin_mode": "paper", "acceptance": true},
      "output": {"dir": null, "path": null, "format": "csv"},
      "threshold": {
        "dp_evc": null, "scale_distance_m": null, "scale_species": null, "energy_unit": "ueV",
        "list_species": false
      },
      "xsec": {"v_over_c": null, "v_kms": null, "b_nm": null, "dp_evc": null, "unit": "nm^2"},
      "rate": {"dp_min_evc": null, "dp_max_evc": null, "n_points": 50},
      "sensitivity": {"m_min_gev": 0.001, "m_max_gev": 1000.0, "n_points": 25},
      "flux": {"projectile": "electron", "e_min_ev": 0.001, "e_max_ev": 1e12, "n_points": 61, "rate_per_day": 1.0},
      "tof": {"projectile": "electron", "energy_ev": 1.0, "de_ev": null, "baseline_mm": null, "v_kms": null},
      "validate": {
        "ode": {
          "omega_tau": null, "b_m": 1e-5, "axis": 1, "rel_tol": 1e-10, "window_tau": 50.0,
          "projectile_q": 1e-12
        },
        "mc": {
          "n_samples": 1000000, "floor_fraction": 0.1, "b_cut_m": null, "bins_per_decade": 10,
          "n_decades": 5, "axis": [0.0, 0.0, 1.0], "n_streams": 16
        }
      }
    })");
}

namespace detail {
inline bool leaf_matches(json const& v, std::string type) {
    bool const nullable = !type.empty() && type.back() == '?';
    if (nullable) type.pop_back();
    if (v.is_null()) return nullable;
    if (type == "number") return v.is_number();
    if (type == "integer") return v.is_number_integer() || (v.is_number() && std::trunc(v.get<double>()) == v.get<double>());
    if (type == "string") return v.is_string();
    if (type == "bool") return v.is_boolean();
    if (type == "numbers") {
        if (v.is_number()) return true;
        if (!v.is_array() || v.empty()) return false;
        for (auto const& x : v)
            if (!x.is_number()) return false;
        return true;
    }
    if (type == "vec3") {
        if (!v.is_array() || v.size() != 3) return false;
        for (auto const& x : v)
            if (!x.is_number()) return false;
        return true;
    }
    return false;
}

inline void validate(json const& cfg, json const& schema, std::string const& where) {
    if (!cfg.is_object()) throw ConfigError("config: '" + (where.empty() ? "<root>" : where) + "' must be an object");
    for (auto const& [key, value] : cfg.items()) {
        std::string const path = where.empty() ? key : where + "." + key;
        if (!schema.contains(key)) throw ConfigError("config: unknown key '" + path + "'");
        auto const& s = schema.at(key);
        if (s.is_object()) {
            validate(value, s, path);
        } else if (!leaf_matches(value, s.get<std::string>())) {
            throw ConfigError("config: key '" + path + "' must be of type " + s.get<std::string>());
        }
    }
}
}  // namespace detail

//! Rejects unknown keys and mistyped values.
inline void validate_config(json const& cfg) { detail::validate(cfg, config_schema(), ""); }

//! Recursive overlay: objects are merged key by key, anything else replaced.
inline void merge_into(json& base, json const& overlay) {
    for (auto const& [key, value] : overlay.items()) {
        if (value.is_object() && base.contains(key) && base[key].is_object())
            merge_into(base[key], value);
        else
            base[key] = value;
    }
}

//! Reads a config file. A run manifest is accepted too; its resolved
//! config is used.
inline json load_config_file(std::filesystem::path const& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path.string() + "'");
    json cfg;
    try {
        cfg = json::parse(in);
    } catch (json::parse_error const& e) {
        throw ConfigError("config: '" + path.string() + "' is not valid JSON: " + e.what());
    }
    if (cfg.is_object() && cfg.contains("manifest_version")) {
        if (!cfg.contains("config")) throw ConfigError("config: manifest has no config block");
        cfg = cfg["config"];
    }
    validate_config(cfg);
    return cfg;
}

//---------------------------------------------------------------------------//
// Number formatting
//---------------------------------------------------------------------------//

inline std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

//! 10^l10 as mantissa e exponent, valid far outside the double range.
inline std::string format_pow10(double l10) {
    if (!std::isfinite(l10)) return format_number(std::pow(10.0, l10));
    double e = std::floor(l10);
    double m = std::pow(10.0, l10 - e);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9f", m);
    if (std::string(buf).rfind("10.", 0) == 0) {
        e += 1.0;
        m /= 10.0;
        std::snprintf(buf, sizeof buf, "%.9f", m);
    }
    char out[96];
    std::snprintf(out, sizeof out, "%se%+03d", buf, static_cast<int>(e));
    return out;
}

//---------------------------------------------------------------------------//
// Tables
//---------------------------------------------------------------------------//

//! Output table. Cells are numbers or strings; numbers are printed with 10
//! significant digits in CSV and at full precision in JSON.
struct Table {
    std::vector<std::pair<std::string, std::string>> metadata;
    std::vector<std::string> columns;
    std::vector<std::vector<json>> rows;

    void meta(std::string key, std::string value) { metadata.emplace_back(std::move(key), std::move(value)); }
    void meta(std::string key, double value) { meta(std::move(key), format_number(value)); }
};

inline std::string cell_text(json const& c) {
    if (c.is_number()) return format_number(c.get<double>());
    if (c.is_string()) return c.get<std::string>();
    if (c.is_boolean()) return c.get<bool>() ? "true" : "false";
    return c.dump();
}

inline std::string to_csv(Table const& t) {
    std::ostringstream os;
    for (auto const& [k, v] : t.metadata) os << "# " << k << ": " << v << "\n";
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
    os << "\n";
    for (auto const& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << cell_text(row[i]);
        os << "\n";
    }
    return os.str();
}

inline std::string to_json(Table const& t) {
    json doc;
    doc["metadata"] = json::object();
    for (auto const& [k, v] : t.metadata) doc["metadata"][k] = v;
    doc["columns"] = t.columns;
    doc["rows"] = json::array();
    for (auto const& row : t.rows) {
        json r = json::object();
        for (std::size_t i = 0; i < row.size() && i < t.columns.size(); ++i) {
            auto const& c = row[i];
            // non-finite numbers have no JSON literal
            if (c.is_number_float() && !std::isfinite(c.get<double>()))
                r[t.columns[i]] = format_number(c.get<double>());
            else
                r[t.columns[i]] = c;
        }
        doc["rows"].push_back(r);
    }
    return doc.dump(2) + "\n";
}

//---------------------------------------------------------------------------//
// Files and manifests
//---------------------------------------------------------------------------//

inline void write_text(std::filesystem::path const& path, std::string const& content) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

//! report.csv -> report.manifest.json
inline std::filesystem::path manifest_path(std::filesystem::path const& output) {
    auto p = output;
    p.replace_extension(".manifest.json");
    return p;
}

inline std::string utc_timestamp() {
    auto const now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline json make_manifest(json const& resolved_config, std::filesystem::path const& output) {
    json m;
    m["manifest_version"] = 1;
    m["tool"] = "trapdet";
    m["version"] = tool_version;
    m["command"] = resolved_config.value("command", json());
    m["output"] = output.filename().string();
    m["constants"] = constants::set_id;
    m["seed"] = resolved_config.at("seed");
    m["wall_clock_utc"] = utc_timestamp();
    m["config"] = resolved_config;
    return m;
}

//! Writes the table and its manifest next to it.
inline void emit(Table const& t, std::filesystem::path const& path, std::string const& format,
                 json const& resolved_config) {
    if (format != "csv" && format != "json") throw ConfigError("output format must be csv or json");
    write_text(path, format == "csv" ? to_csv(t) : to_json(t));
    write_text(manifest_path(path), make_manifest(resolved_config, path).dump(2) + "\n");
}

}  // namespace trapdet::io
