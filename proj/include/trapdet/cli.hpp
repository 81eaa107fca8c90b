#pragma once

// trapdet command-line front end. run() is the whole program; main() only
// forwards argv so the CLI can be driven in-process by tests.

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "trapdet/error.hpp"
#include "trapdet/flyby_mc.hpp"
#include "trapdet/flyby_ode.hpp"
#include "trapdet/io.hpp"
#include "trapdet/kinematics.hpp"
#include "trapdet/rate.hpp"
#include "trapdet/sensitivity.hpp"
#include "trapdet/tof.hpp"
#include "trapdet/trap.hpp"
#include "trapdet/velocity.hpp"

namespace trapdet::cli {

using io::json;

namespace detail {

enum class Kind { Number, Integer, String, Flag, Numbers, Vec3 };

//! Flag -> config-pointer bindings; applied over the config after parsing.
class Overrides {
  public:
    void add(CLI::App* app, std::string const& flag, std::string const& pointer, Kind kind, std::string const& help,
             double scale = 1.0) {
        auto& slot = slots_.emplace_back(Slot{flag, pointer, kind, scale, {}, {}, nullptr});
        if (kind == Kind::Flag) {
            slot.option = app->add_flag(flag, help);
        } else if (kind == Kind::Numbers || kind == Kind::Vec3) {
            slot.option = app->add_option(flag, slot.many, help);
            if (kind == Kind::Vec3) slot.option->expected(3);
        } else {
            slot.option = app->add_option(flag, slot.one, help);
        }
    }

    void apply(json& cfg) const {
        exclusive("/trap/omega_rad_s", "/trap/freq_hz");
        exclusive("/xsec/v_over_c", "/xsec/v_kms");
        for (auto const& s : slots_) {
            if (!s.option || s.option->count() == 0) continue;
            json::json_pointer const ptr(s.pointer);
            cfg[ptr] = value(s);
            // the two frequency entry points are exclusive
            if (s.pointer == "/trap/omega_rad_s") cfg["trap"]["freq_hz"] = nullptr;
            if (s.pointer == "/trap/freq_hz") cfg["trap"]["omega_rad_s"] = nullptr;
            if (s.pointer == "/xsec/v_kms") cfg["xsec"]["v_over_c"] = nullptr;
            if (s.pointer == "/xsec/v_over_c") cfg["xsec"]["v_kms"] = nullptr;
        }
    }

  private:
    void exclusive(std::string const& a, std::string const& b) const {
        std::string given;
        for (auto const& s : slots_) {
            if (!s.option || s.option->count() == 0 || (s.pointer != a && s.pointer != b)) continue;
            if (!given.empty() && given != s.flag) throw ConfigError(given + " and " + s.flag + " are mutually exclusive");
            given = s.flag;
        }
    }

    struct Slot {
        std::string flag;
        std::string pointer;
        Kind kind;
        double scale;  // flag unit -> config unit
        std::string one;
        std::vector<std::string> many;
        CLI::Option* option;
    };

    static double number(std::string const& flag, std::string const& text) {
        try {
            std::size_t used = 0;
            double const x = std::stod(text, &used);
            if (used == text.size()) return x;
        } catch (std::exception const&) {
        }
        throw ConfigError("invalid number '" + text + "' for " + flag);
    }

    static json value(Slot const& s) {
        switch (s.kind) {
        case Kind::Flag:
            return s.pointer == "/conventions/acceptance" ? false : true;
        case Kind::String:
            return s.one;
        case Kind::Number:
            return number(s.flag, s.one) * s.scale;
        case Kind::Integer: {
            double const x = number(s.flag, s.one);
            if (std::trunc(x) != x || std::abs(x) > 9e15) throw ConfigError("invalid integer '" + s.one + "' for " + s.flag);
            return static_cast<long long>(x);
        }
        case Kind::Numbers:
        case Kind::Vec3: {
            json a = json::array();
            for (auto const& t : s.many) a.push_back(number(s.flag, t));
            return a;
        }
        }
        return nullptr;
    }

    std::deque<Slot> slots_;
};

struct Common {
    std::string config_path;
    std::optional<std::string> out;
    std::optional<std::string> output_dir;
    std::optional<std::string> format;
};

inline void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config_path, "JSON run configuration (or a run manifest)");
    app->add_option("--out", c.out, "output file path");
    app->add_option("--output-dir", c.output_dir, "output directory (default: $TRAPDET_OUTPUT_DIR or .)");
    app->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

inline void add_trap(CLI::App* app, Overrides& o, bool species = true) {
    if (species) o.add(app, "--species", "/trap/species", Kind::String, "trapped species: electron, proton, Be9+");
    o.add(app, "--trap-kind", "/trap/kind", Kind::String, "penning or paul");
    o.add(app, "--omega", "/trap/omega_rad_s", Kind::Number, "angular trap frequency in rad/s, taken literally");
    o.add(app, "--freq-hz", "/trap/freq_hz", Kind::Number, "cycle trap frequency in Hz (omega = 2 pi f)");
    o.add(app, "--n-sensors", "/trap/n_sensors", Kind::Integer, "number of independent trapped charges");
}

inline void add_conventions(CLI::App* app, Overrides& o, bool vmin = true, bool acc = true) {
    o.add(app, "--impulse-convention", "/conventions/impulse", Kind::String, "paper (lambda/bv) or exact (2 lambda/bv)");
    if (vmin) o.add(app, "--vmin-mode", "/conventions/vmin_mode", Kind::String, "paper (dp/m) or reduced-mass (dp/2mu)");
    if (acc) o.add(app, "--no-acceptance", "/conventions/acceptance", Kind::Flag, "drop the geometric acceptance factor");
}

inline void add_model(CLI::App* app, Overrides& o, bool mass = true) {
    if (mass) o.add(app, "--m-gev", "/model/m_chi_gev", Kind::Number, "projectile mass in GeV");
    o.add(app, "--q", "/model/q_chi", Kind::Number, "projectile charge in units of e");
    o.add(app, "--f-q", "/model/f_q", Kind::Number, "charged fraction of the dark matter");
    o.add(app, "--rho-gev-cm3", "/model/rho_gev_cm3", Kind::Number, "dark matter density in GeV/cm^3");
}

inline void add_distribution(CLI::App* app, Overrides& o) {
    o.add(app, "--dist", "/distribution/kind", Kind::String, "thermal, halo or mono");
    o.add(app, "--temperature-k", "/distribution/temperature_k", Kind::Number, "thermal population temperature in K");
    o.add(app, "--v0-kms", "/distribution/v0_kms", Kind::Number, "halo dispersion speed in km/s");
    o.add(app, "--vesc-kms", "/distribution/v_esc_kms", Kind::Number, "halo escape speed in km/s");
    o.add(app, "--vearth-kms", "/distribution/v_earth_kms", Kind::Number, "Earth speed through the halo in km/s");
    o.add(app, "--v-kms", "/distribution/v_kms", Kind::Number, "monochromatic beam speed in km/s");
    o.add(app, "--direction", "/distribution/direction", Kind::Vec3, "fixed beam direction (default isotropic)");
}

inline void add_exposure(CLI::App* app, Overrides& o) {
    o.add(app, "--t-obs-days", "/exposure/t_obs_days", Kind::Number, "observation time in days");
    o.add(app, "--n-events", "/exposure/n_required", Kind::Number, "expected events required for detection");
}

//---------------------------------------------------------------------------//
// Config resolution
//---------------------------------------------------------------------------//

inline ImpulseConvention impulse_convention(json const& cfg) {
    auto const s = cfg["conventions"]["impulse"].get<std::string>();
    if (s == "paper") return ImpulseConvention::PaperEq2;
    if (s == "exact") return ImpulseConvention::ExactTransverse;
    throw ConfigError("impulse convention must be 'paper' or 'exact', got '" + s + "'");
}

inline RateOptions rate_options(json const& cfg) {
    RateOptions opt;
    opt.impulse = impulse_convention(cfg);
    auto const v = cfg["conventions"]["vmin_mode"].get<std::string>();
    if (v == "paper")
        opt.vmin = VminMode::PaperLinear;
    else if (v == "reduced-mass")
        opt.vmin = VminMode::ReducedMass;
    else
        throw ConfigError("vmin mode must be 'paper' or 'reduced-mass', got '" + v + "'");
    opt.apply_acceptance = cfg["conventions"]["acceptance"].get<bool>();
    return opt;
}

inline double trap_omega(json const& cfg, double fallback) {
    auto const& t = cfg["trap"];
    if (!t["omega_rad_s"].is_null() && !t["freq_hz"].is_null())
        throw ConfigError("trap: give either omega_rad_s or freq_hz, not both");
    if (!t["omega_rad_s"].is_null()) return t["omega_rad_s"].get<double>();
    if (!t["freq_hz"].is_null()) return constants::two_pi * t["freq_hz"].get<double>();
    return fallback;
}

inline TrapConfig make_trap(json const& cfg, double fallback_omega = 1e9) {
    auto const& t = cfg["trap"];
    auto const kind_s = t["kind"].get<std::string>();
    TrapKind kind;
    if (kind_s == "penning")
        kind = TrapKind::Penning;
    else if (kind_s == "paul")
        kind = TrapKind::Paul;
    else
        throw ConfigError("trap kind must be 'penning' or 'paul', got '" + kind_s + "'");
    std::optional<Quantity> d;
    std::optional<Quantity> gamma;
    if (!t["electrode_distance_m"].is_null()) d = Quantity(t["electrode_distance_m"].get<double>(), dim::length);
    if (!t["heating_rate_per_s"].is_null()) gamma = Quantity(t["heating_rate_per_s"].get<double>(), dim::frequency);
    return {kind, quantity(trap_omega(cfg, fallback_omega), units::rad_per_s),
            species::by_name(t["species"].get<std::string>()), d, gamma, t["n_sensors"].get<int>()};
}

inline DistributionFamily distribution_family(json const& cfg) {
    auto const& d = cfg["distribution"];
    auto const kind = d["kind"].get<std::string>();
    if (kind == "thermal") return ThermalFamily{d["temperature_k"].get<double>()};
    if (kind == "halo")
        return StandardHalo(d["v0_kms"].get<double>() * 1e3, d["v_esc_kms"].get<double>() * 1e3,
                            d["v_earth_kms"].get<double>() * 1e3);
    if (kind == "mono") {
        if (d["v_kms"].is_null()) throw ConfigError("distribution: mono needs v_kms");
        double const v = d["v_kms"].get<double>() * 1e3;
        if (d["direction"].is_null()) return Monochromatic(v);
        auto const dir = d["direction"].get<std::vector<double>>();
        return Monochromatic(v, false, {dir[0], dir[1], dir[2]});
    }
    throw ConfigError("distribution kind must be thermal, halo or mono, got '" + kind + "'");
}

inline PopulationParams population(json const& cfg) {
    return {cfg["model"]["f_q"].get<double>(), cfg["model"]["rho_gev_cm3"].get<double>()};
}

inline MdmModel make_model(json const& cfg) {
    auto const& m = cfg["model"];
    auto const chi = species::mcp(m["m_chi_gev"].get<double>(), m["q_chi"].get<double>());
    if (!(chi.mass_kg() > 0)) throw ConfigError("model: m_chi_gev must be positive");
    return {chi, make_distribution(distribution_family(cfg), chi.mass_kg()), m["f_q"].get<double>(),
            quantity(m["rho_gev_cm3"].get<double>(), units::GeV_per_cm3)};
}

inline Exposure make_exposure(json const& cfg) {
    return {quantity(cfg["exposure"]["t_obs_days"].get<double>(), units::day_u),
            cfg["exposure"]["n_required"].get<double>()};
}

inline std::vector<double> log_grid(double lo, double hi, int n, std::string const& what) {
    if (!(lo > 0 && hi >= lo) || n < 1) throw ConfigError(what + ": need 0 < min <= max and n_points >= 1");
    if (n == 1) return {lo};
    if (!(hi > lo)) throw ConfigError(what + ": need min < max for more than one point");
    std::vector<double> g;
    for (int i = 0; i < n; ++i) g.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
    return g;
}

inline void describe_conventions(io::Table& t, json const& cfg) {
    t.meta("impulse_convention", cfg["conventions"]["impulse"].get<std::string>());
    t.meta("vmin_mode", cfg["conventions"]["vmin_mode"].get<std::string>());
    t.meta("acceptance", cfg["conventions"]["acceptance"].get<bool>() ? "on" : "off");
}

inline io::Table scalar_table() {
    io::Table t;
    t.columns = {"quantity", "value", "unit"};
    return t;
}

inline void row(io::Table& t, std::string name, double value, std::string_view unit) {
    t.rows.push_back({std::move(name), value, std::string(unit)});
}

//---------------------------------------------------------------------------//
// Commands
//---------------------------------------------------------------------------//

inline io::Table cmd_threshold(json const& cfg) {
    auto const trap = make_trap(cfg);
    auto const r = sql_threshold(trap);
    auto const& th = cfg["threshold"];
    auto const& eu = trapdet::unit(th["energy_unit"].get<std::string>());

    auto t = scalar_table();
    t.meta("command", "threshold");
    t.meta("trap", describe(trap));
    row(t, "dp_sql", in(r.dp_sql, units::eV_c), "eV/c");
    row(t, "dp_sql_si", r.dp_sql.si(), "kg m/s");
    row(t, "energy_threshold", convert(r.energy_threshold, eu).value, eu.id);
    row(t, "ground_state_size", in(r.ground_state_size, units::nm), "nm");
    row(t, "period", trap.period().si(), "s");
    if (!th["dp_evc"].is_null()) {
        auto const dp = quantity(th["dp_evc"].get<double>(), units::eV_c);
        row(t, "energy_deposit", convert(energy_deposit(dp, trap.species()), eu).value, eu.id);
    }
    if (trap.heating_rate()) {
        row(t, "quality_factor", quality_factor(trap), "1");
        row(t, "duty_cycle_max", duty_cycle_max(trap).si(), "s");
    }
    if (!th["scale_distance_m"].is_null() || !th["scale_species"].is_null()) {
        auto const d = th["scale_distance_m"].is_null() ? trap.electrode_distance()
                                                        : std::optional(Quantity(th["scale_distance_m"].get<double>(), dim::length));
        if (!d) throw ConfigError("threshold: scaling the heating rate needs a distance");
        auto const s = th["scale_species"].is_null() ? trap.species() : species::by_name(th["scale_species"].get<std::string>());
        row(t, "scaled_heating_rate", scale_heating_rate(trap, *d, s).si(), "1/s");
    }
    if (th["list_species"].get<bool>()) {
        for (auto const& s : species::builtin()) {
            row(t, "species." + s.label() + ".mass", in(s.mass(), units::MeV_c2), "MeV/c^2");
            row(t, "species." + s.label() + ".charge", s.charge_e(), "e");
        }
    }
    return t;
}

inline io::Table cmd_xsec(json const& cfg) {
    auto const trap = make_trap(cfg);
    auto const& x = cfg["xsec"];
    auto const conv = impulse_convention(cfg);
    auto const opt = rate_options(cfg);
    double const q = cfg["model"]["q_chi"].get<double>();
    auto const projectile = species::mcp(cfg["model"]["m_chi_gev"].get<double>(), q);
    Quantity v = quantity(1.0, units::c_u);
    if (!x["v_kms"].is_null()) v = quantity(x["v_kms"].get<double>(), units::km_per_s);
    if (!x["v_over_c"].is_null()) v = quantity(x["v_over_c"].get<double>(), units::c_u);
    auto const& au = trapdet::unit(x["unit"].get<std::string>());

    auto t = scalar_table();
    t.meta("command", "xsec");
    t.meta("trap", describe(trap));
    t.meta("impulse_convention", std::string(to_string(conv)));
    t.meta("q_chi", q);
    row(t, "speed", v.si(), "m/s");
    row(t, "sigma_eff", convert(effective_cross_section(trap, q, v, conv), au).value, au.id);
    auto const dp_th = sql_threshold(trap).dp_sql;
    row(t, "dp_sql", in(dp_th, units::eV_c), "eV/c");
    if (!x["b_nm"].is_null()) {
        FlybyEvent const e(quantity(x["b_nm"].get<double>(), units::nm), v, projectile, trap.species());
        auto const dp = impulse(e, conv);
        auto const ok = impulsive_ok(e, trap);
        row(t, "impulse", in(dp, units::eV_c), "eV/c");
        row(t, "flyby_time", flyby_time(e).si(), "s");
        row(t, "omega_tau", ok.margin, "1");
        row(t, "impulsive_ok", ok.ok ? 1.0 : 0.0, "bool");
        row(t, "acceptance_at_impulse", acceptance(dp, dp_th), "1");
    }
    if (!x["dp_evc"].is_null()) {
        auto const dp = quantity(x["dp_evc"].get<double>(), units::eV_c);
        row(t, "acceptance", acceptance(dp, dp_th), "1");
        row(t, "v_min", in(v_min(dp, trap.species(), opt.vmin, projectile), units::km_per_s), "km/s");
    }
    return t;
}

inline io::Table cmd_rate(json const& cfg) {
    auto const trap = make_trap(cfg);
    auto const model = make_model(cfg);
    auto const opt = rate_options(cfg);
    auto const r = integrated_rate(model, trap, opt);
    double const evc = units::eV_c.si_factor;
    double const th = r.dp_threshold.si();
    auto const& rc = cfg["rate"];
    double const lo = rc["dp_min_evc"].is_null() ? th : rc["dp_min_evc"].get<double>() * evc;
    double const hi = rc["dp_max_evc"].is_null() ? 1e3 * th : rc["dp_max_evc"].get<double>() * evc;
    auto const vmin_th = v_min(r.dp_threshold, trap.species(), opt.vmin, model.chi());

    io::Table t;
    t.meta("command", "rate");
    t.meta("trap", describe(trap));
    t.meta("distribution", describe(model.distribution()));
    t.meta("m_chi_GeV", cfg["model"]["m_chi_gev"].get<double>());
    t.meta("q_chi", model.q_chi());
    t.meta("f_q", model.f_q());
    t.meta("rho_GeV_cm3", cfg["model"]["rho_gev_cm3"].get<double>());
    describe_conventions(t, cfg);
    t.meta("number_density_per_cm3", in(number_density(model), units::per_cm3));
    t.meta("dp_threshold_eV_c", th / evc);
    t.meta("dp_max_eV_c", r.dp_max.si() / evc);
    t.meta("eta_at_threshold_s_per_km", eta(model.distribution(), vmin_th).si() * 1e3);
    t.meta("mean_inverse_speed_s_per_km", mean_inverse_speed(model.distribution()).si() * 1e3);
    t.meta("rate_per_s", r.rate.si());
    t.meta("rate_per_day", in(r.rate, units::per_day));
    t.meta("ln_rate_per_s", r.log_rate);
    t.meta("rate_error_estimate_per_s", r.error_estimate);
    t.meta("units", "dp in eV/c, dR_ddp in events/s per eV/c, per sensor");
    t.columns = {"dp", "dR_ddp"};
    int const n = rc["n_points"].get<int>();
    if (n >= 2) {
        for (auto const& p : rate_spectrum(model, trap, lo, hi, n, opt)) t.rows.push_back({p.dp / evc, p.rate * evc});
    } else if (n == 1) {
        t.rows.push_back({lo / evc, differential_rate(model, trap, Quantity(lo, dim::momentum), opt).si() * evc});
    }
    return t;
}

inline io::Table cmd_sensitivity(json const& cfg) {
    auto const trap = make_trap(cfg);
    auto const& s = cfg["sensitivity"];
    auto const grid = log_grid(s["m_min_gev"].get<double>(), s["m_max_gev"].get<double>(), s["n_points"].get<int>(),
                               "sensitivity");
    auto const family = distribution_family(cfg);
    auto const exposure = make_exposure(cfg);
    auto const curve = sensitivity_curve(grid, trap, family, exposure, population(cfg), rate_options(cfg));

    io::Table t;
    t.meta("command", "sensitivity");
    t.meta("trap", curve.trap_description);
    t.meta("distribution", curve.distribution);
    t.meta("f_q", curve.f_q);
    t.meta("rho_GeV_cm3", curve.rho_gev_cm3);
    t.meta("t_obs_days", in(exposure.t_obs, units::day_u));
    t.meta("n_required", exposure.n_required);
    describe_conventions(t, cfg);
    t.meta("units", "m_chi in GeV, q_min in units of e; no_sensitivity marks kinematically dead masses");
    t.columns = {"m_chi_GeV", "q_min"};
    for (auto const& p : curve.points) {
        if (p.log10_q_min)
            t.rows.push_back({p.m_chi_gev, io::format_pow10(*p.log10_q_min)});
        else
            t.rows.push_back({p.m_chi_gev, "no_sensitivity"});
    }
    return t;
}

inline io::Table cmd_flux(json const& cfg) {
    auto const trap = make_trap(cfg);
    auto const& f = cfg["flux"];
    auto const grid = log_grid(f["e_min_ev"].get<double>(), f["e_max_ev"].get<double>(), f["n_points"].get<int>(), "flux");
    auto const projectile = species::by_name(f["projectile"].get<std::string>());
    auto const curve = flux_curve(grid, trap, projectile, quantity(f["rate_per_day"].get<double>(), units::per_day),
                                  impulse_convention(cfg));
    io::Table t;
    t.meta("command", "flux");
    t.meta("trap", curve.trap_description);
    t.meta("projectile", curve.projectile);
    t.meta("rate_target_per_day", curve.rate_target_per_day);
    t.meta("impulse_convention", cfg["conventions"]["impulse"].get<std::string>());
    t.meta("units", "E in eV (kinetic), flux in 1/(cm^2 day)");
    t.columns = {"E_eV", "flux_cm2_day"};
    for (auto const& p : curve.points) t.rows.push_back({p.E_eV, p.flux_cm2_day});
    return t;
}

inline io::Table cmd_tof(json const& cfg) {
    auto const trap = make_trap(cfg);
    auto const& c = cfg["tof"];
    auto const projectile = species::by_name(c["projectile"].get<std::string>());
    auto const E = quantity(c["energy_ev"].get<double>(), units::eV_u);

    auto t = scalar_table();
    t.meta("command", "tof");
    t.meta("trap", describe(trap));
    t.meta("projectile", projectile.label());
    row(t, "timing_resolution", trap.period().si(), "s");
    row(t, "energy", c["energy_ev"].get<double>(), "eV");
    if (!c["de_ev"].is_null()) {
        auto const b = required_baseline(E, quantity(c["de_ev"].get<double>(), units::eV_u), trap, projectile);
        row(t, "required_baseline", in(b.baseline, units::mm), "mm");
        row(t, "relativistic_warning", b.relativistic_warning ? 1.0 : 0.0, "bool");
    }
    if (!c["baseline_mm"].is_null()) {
        TofSetup const s(trap, quantity(c["baseline_mm"].get<double>(), units::mm), projectile);
        row(t, "energy_resolution", in(energy_resolution(s, E), units::eV_u), "eV");
        Quantity v(std::sqrt(2.0 * E.si() / projectile.mass_kg()), dim::velocity);
        if (!c["v_kms"].is_null()) v = quantity(c["v_kms"].get<double>(), units::km_per_s);
        row(t, "speed", v.si(), "m/s");
        row(t, "velocity_resolution", velocity_resolution(s, v).si(), "m/s");
    }
    if (c["de_ev"].is_null() && c["baseline_mm"].is_null())
        throw ConfigError("tof: give --de-ev (baseline sizing) and/or --baseline-mm (resolution)");
    return t;
}

inline io::Table cmd_validate_ode(json const& cfg) {
    auto const& o = cfg["validate"]["ode"];
    auto base = default_regime_scenario();
    base.omega = trap_omega(cfg, base.omega);
    base.target = species::by_name(cfg["trap"]["species"].get<std::string>());
    base.projectile = species::mcp(cfg["model"]["m_chi_gev"].get<double>(), o["projectile_q"].get<double>());
    base.b = o["b_m"].get<double>();
    base.monitored_axis = o["axis"].get<int>();
    base.rel_tol = o["rel_tol"].get<double>();
    base.window_tau = o["window_tau"].get<double>();
    std::vector<double> grid = default_omega_tau_grid();
    if (o["omega_tau"].is_number()) grid = {o["omega_tau"].get<double>()};
    if (o["omega_tau"].is_array()) grid = o["omega_tau"].get<std::vector<double>>();

    io::Table t;
    t.meta("command", "validate ode");
    t.meta("omega_rad_s", base.omega);
    t.meta("target", base.target.label());
    t.meta("projectile_charge_e", base.projectile.charge_e());
    t.meta("b_m", base.b);
    t.meta("monitored_axis", std::to_string(base.monitored_axis));
    t.meta("rel_tol", base.rel_tol);
    t.meta("window_tau", base.window_tau);
    t.meta("units", "ratio = mode momentum / (2 lambda / (b v)); dp_mode in eV/c");
    t.columns = {"omega_tau", "ratio", "dp_mode", "accepted_steps", "energy_balance_residual"};
    for (double wt : grid) {
        if (!(wt > 0)) throw ConfigError("validate ode: omega_tau must be positive");
        auto sc = base;
        sc.v = sc.omega * sc.b / wt;
        auto const r = ode_flyby(sc);
        t.rows.push_back({wt, r.ratio_to_exact, in(r.dp_mode, units::eV_c),
                          static_cast<double>(r.diagnostics.accepted_steps), r.diagnostics.energy_balance_residual});
    }
    t.meta("free_oscillator_drift_100_periods", free_oscillator_energy_drift(100.0, base.rel_tol));
    return t;
}

inline io::Table cmd_validate_mc(json const& cfg, unsigned threads) {
    auto const trap = make_trap(cfg);
    auto const model = make_model(cfg);
    auto const opt = rate_options(cfg);
    auto const& m = cfg["validate"]["mc"];
    McRun run{model, trap};
    run.n_samples = m["n_samples"].get<std::uint64_t>();
    run.seed = cfg["seed"].get<std::uint64_t>();
    run.floor_fraction = m["floor_fraction"].get<double>();
    if (!m["b_cut_m"].is_null()) run.b_cut = m["b_cut_m"].get<double>();
    run.impulse = opt.impulse;
    run.vmin = opt.vmin;
    run.bins_per_decade = m["bins_per_decade"].get<int>();
    run.n_decades = m["n_decades"].get<int>();
    auto const axis = m["axis"].get<std::vector<double>>();
    run.monitored_axis = {axis[0], axis[1], axis[2]};
    run.n_streams = m["n_streams"].get<unsigned>();
    run.max_threads = threads;
    auto const s = mc_spectrum(run);
    RateOptions no_acc = opt;
    no_acc.apply_acceptance = false;
    auto const analytic = integrated_rate(model, trap, no_acc);

    double const evc = units::eV_c.si_factor;
    io::Table t;
    t.meta("command", "validate mc");
    t.meta("trap", describe(trap));
    t.meta("distribution", describe(model.distribution()));
    t.meta("m_chi_GeV", cfg["model"]["m_chi_gev"].get<double>());
    t.meta("q_chi", model.q_chi());
    t.meta("seed", std::to_string(run.seed));
    t.meta("n_samples", std::to_string(s.n_samples));
    t.meta("n_streams", std::to_string(run.n_streams));
    t.meta("n_vetoed", std::to_string(s.n_vetoed));
    t.meta("n_below_first_bin", std::to_string(s.n_below));
    t.meta("n_above_last_bin", std::to_string(s.n_above));
    t.meta("impulse_convention", std::string(to_string(run.impulse)));
    t.meta("vmin_mode", std::string(to_string(run.vmin)));
    t.meta("dp_threshold_eV_c", s.dp_threshold / evc);
    t.meta("mc_rate_above_per_s", s.rate_above);
    t.meta("mc_rate_above_err_per_s", s.rate_above_err);
    t.meta("analytic_rate_above_per_s", analytic.rate.si());
    t.meta("mc_axial_rate_above_per_s", s.rate_axial_above);
    t.meta("mc_axial_rate_above_err_per_s", s.rate_axial_above_err);
    t.meta("units", "dp bins in eV/c, densities in events/s per eV/c, per sensor; axial = |dp . axis|");
    t.columns = {"dp_bin_lo", "dp_bin_hi", "rate_density", "stat_err", "counts", "axial_rate_density", "axial_stat_err"};
    for (std::size_t i = 0; i < s.bins.size(); ++i) {
        auto const& b = s.bins[i];
        auto const& a = s.axial_bins[i];
        t.rows.push_back({b.lo / evc, b.hi / evc, b.rate_density(s.n_samples) * evc, b.stat_err(s.n_samples) * evc,
                          static_cast<double>(b.counts), a.rate_density(s.n_samples) * evc,
                          a.stat_err(s.n_samples) * evc});
    }
    return t;
}

inline std::string error_json(std::string const& type, std::string const& message, int code, json extra = json::object()) {
    json e;
    e["error"] = {{"type", type}, {"message", message}, {"exit_code", code}};
    for (auto const& [k, v] : extra.items()) e["error"][k] = v;
    return e.dump();
}

}  // namespace detail

//! Runs the CLI on args (args[0] is the program name). Returns the exit code:
//! 0 success, 1 configuration or validation error, 2 numeric or IO failure.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    using namespace detail;
    CLI::App app{"trapdet: sensitivity forecasts for trapped-charge impulse detectors"};
    app.require_subcommand(1);
    app.set_version_flag("--version", io::tool_version);

    Common common;
    Overrides ov;
    unsigned threads = 0;

    auto* threshold = app.add_subcommand("threshold", "SQL threshold, energy deposit and heating for one trap");
    add_common(threshold, common);
    add_trap(threshold, ov);
    ov.add(threshold, "--dp-evc", "/threshold/dp_evc", Kind::Number, "momentum kick for the energy deposit, eV/c");
    ov.add(threshold, "--electrode-distance-mm", "/trap/electrode_distance_m", Kind::Number, "electrode distance, mm", 1e-3);
    ov.add(threshold, "--heating-rate-per-s", "/trap/heating_rate_per_s", Kind::Number, "phonon heating rate, 1/s");
    ov.add(threshold, "--scale-distance-mm", "/threshold/scale_distance_m", Kind::Number, "scale heating to this distance, mm", 1e-3);
    ov.add(threshold, "--scale-species", "/threshold/scale_species", Kind::String, "scale heating to this species");
    ov.add(threshold, "--energy-unit", "/threshold/energy_unit", Kind::String, "unit for energies (neV, ueV, meV, eV, J)");
    ov.add(threshold, "--list-species", "/threshold/list_species", Kind::Flag, "also list the builtin species");

    auto* xsec = app.add_subcommand("xsec", "effective cross section and single fly-by kinematics");
    add_common(xsec, common);
    add_trap(xsec, ov);
    add_conventions(xsec, ov, true, false);
    ov.add(xsec, "--q", "/model/q_chi", Kind::Number, "projectile charge in units of e");
    ov.add(xsec, "--m-gev", "/model/m_chi_gev", Kind::Number, "projectile mass in GeV");
    ov.add(xsec, "--v-over-c", "/xsec/v_over_c", Kind::Number, "projectile speed as a fraction of c");
    ov.add(xsec, "--v-kms", "/xsec/v_kms", Kind::Number, "projectile speed in km/s");
    ov.add(xsec, "--b-nm", "/xsec/b_nm", Kind::Number, "impact parameter for a single fly-by, nm");
    ov.add(xsec, "--dp-evc", "/xsec/dp_evc", Kind::Number, "momentum transfer for acceptance and v_min, eV/c");
    ov.add(xsec, "--unit", "/xsec/unit", Kind::String, "area unit (nm^2, m^2, cm^2)");

    auto* rate = app.add_subcommand("rate", "differential and integrated event rate");
    add_common(rate, common);
    add_trap(rate, ov);
    add_conventions(rate, ov);
    add_model(rate, ov);
    add_distribution(rate, ov);
    ov.add(rate, "--dp-min-evc", "/rate/dp_min_evc", Kind::Number, "spectrum start, eV/c (default: threshold)");
    ov.add(rate, "--dp-max-evc", "/rate/dp_max_evc", Kind::Number, "spectrum end, eV/c (default: 1000 x threshold)");
    ov.add(rate, "--n-points", "/rate/n_points", Kind::Integer, "spectrum points (0: none)");

    auto* sens = app.add_subcommand("sensitivity", "minimum detectable charge over a mass grid");
    add_common(sens, common);
    add_trap(sens, ov);
    add_conventions(sens, ov);
    add_model(sens, ov, false);
    add_distribution(sens, ov);
    add_exposure(sens, ov);
    ov.add(sens, "--m-min-gev", "/sensitivity/m_min_gev", Kind::Number, "lightest mass, GeV");
    ov.add(sens, "--m-max-gev", "/sensitivity/m_max_gev", Kind::Number, "heaviest mass, GeV");
    ov.add(sens, "--n-points", "/sensitivity/n_points", Kind::Integer, "log-spaced grid points");

    auto* flux = app.add_subcommand("flux", "detectable flux of ambient charged particles");
    add_common(flux, common);
    add_trap(flux, ov);
    add_conventions(flux, ov, false, false);
    ov.add(flux, "--projectile", "/flux/projectile", Kind::String, "incoming species");
    ov.add(flux, "--e-min-ev", "/flux/e_min_ev", Kind::Number, "lowest kinetic energy, eV");
    ov.add(flux, "--e-max-ev", "/flux/e_max_ev", Kind::Number, "highest kinetic energy, eV");
    ov.add(flux, "--n-points", "/flux/n_points", Kind::Integer, "log-spaced grid points");
    ov.add(flux, "--rate-per-day", "/flux/rate_per_day", Kind::Number, "threshold crossings per day");

    auto* tof = app.add_subcommand("tof", "two-trap time-of-flight baseline and resolution");
    add_common(tof, common);
    add_trap(tof, ov, false);
    ov.add(tof, "--species", "/tof/projectile", Kind::String, "species whose flight time is measured");
    ov.add(tof, "--energy-ev", "/tof/energy_ev", Kind::Number, "kinetic energy, eV");
    ov.add(tof, "--de-ev", "/tof/de_ev", Kind::Number, "target energy resolution, eV");
    ov.add(tof, "--baseline-mm", "/tof/baseline_mm", Kind::Number, "trap separation, mm");
    ov.add(tof, "--v-kms", "/tof/v_kms", Kind::Number, "speed for the velocity resolution, km/s");

    auto* validate = app.add_subcommand("validate", "brute-force checks of the impulse approximation and the rate");
    validate->require_subcommand(1);
    auto* ode = validate->add_subcommand("ode", "integrate fly-bys across omega tau");
    add_common(ode, common);
    add_trap(ode, ov);
    ov.add(ode, "--omega-tau", "/validate/ode/omega_tau", Kind::Numbers, "omega tau values (default 1e-5 .. 10)");
    ov.add(ode, "--b-m", "/validate/ode/b_m", Kind::Number, "impact parameter, m");
    ov.add(ode, "--axis", "/validate/ode/axis", Kind::Integer, "monitored axis: 0 along track, 1 towards it, 2 normal");
    ov.add(ode, "--rel-tol", "/validate/ode/rel_tol", Kind::Number, "local relative tolerance");
    ov.add(ode, "--window-tau", "/validate/ode/window_tau", Kind::Number, "half window in units of tau");
    ov.add(ode, "--projectile-q", "/validate/ode/projectile_q", Kind::Number, "projectile charge, e");
    ov.add(ode, "--m-gev", "/model/m_chi_gev", Kind::Number, "projectile mass, GeV");

    auto* mc = validate->add_subcommand("mc", "Monte-Carlo momentum-transfer spectrum");
    add_common(mc, common);
    add_trap(mc, ov);
    add_conventions(mc, ov, true, false);
    add_model(mc, ov);
    add_distribution(mc, ov);
    ov.add(mc, "--seed", "/seed", Kind::Integer, "random seed");
    ov.add(mc, "--n-samples", "/validate/mc/n_samples", Kind::Integer, "number of fly-bys");
    ov.add(mc, "--floor-fraction", "/validate/mc/floor_fraction", Kind::Number, "lowest sampled impulse / threshold");
    ov.add(mc, "--b-cut-m", "/validate/mc/b_cut_m", Kind::Number, "fixed sampling radius, m");
    ov.add(mc, "--bins-per-decade", "/validate/mc/bins_per_decade", Kind::Integer, "histogram bins per decade");
    ov.add(mc, "--n-decades", "/validate/mc/n_decades", Kind::Integer, "histogram decades");
    ov.add(mc, "--axis", "/validate/mc/axis", Kind::Vec3, "monitored axis");
    ov.add(mc, "--n-streams", "/validate/mc/n_streams", Kind::Integer, "independent random streams");
    mc->add_option("--threads", threads, "worker threads (0: all cores); does not change results");

    std::string command;
    try {
        std::vector<char const*> argv;
        for (auto const& a : args) argv.push_back(a.c_str());
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (CLI::CallForHelp const&) {
        out << app.help();
        return 0;
    } catch (CLI::CallForAllHelp const&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (CLI::CallForVersion const&) {
        out << io::tool_version << "\n";
        return 0;
    } catch (CLI::ParseError const& e) {
        // nested help requests carry the sub-app in the message path
        if (e.get_exit_code() == 0) {
            out << e.what() << "\n";
            return 0;
        }
        err << error_json("usage_error", e.what(), 1) << "\n";
        return 1;
    }

    try {
        for (auto* sub : {threshold, xsec, rate, sens, flux, tof}) {
            if (sub->parsed()) command = sub->get_name();
        }
        if (ode->parsed()) command = "validate ode";
        if (mc->parsed()) command = "validate mc";

        json cfg = io::default_config();
        if (!common.config_path.empty()) {
            auto const file = io::load_config_file(common.config_path);
            if (file.contains("command") && !file["command"].is_null() && file["command"] != command)
                throw ConfigError("config: command '" + file["command"].get<std::string>() + "' does not match '" +
                                  command + "'");
            io::merge_into(cfg, file);
        }
        ov.apply(cfg);
        if (common.format) cfg["output"]["format"] = *common.format;
        if (common.out) cfg["output"]["path"] = *common.out;
        if (common.output_dir) cfg["output"]["dir"] = *common.output_dir;
        cfg["command"] = command;
        io::validate_config(cfg);

        // the file name is fixed by the command and format unless given
        auto const format = cfg["output"]["format"].get<std::string>();
        if (format != "csv" && format != "json") throw ConfigError("output format must be csv or json");
        std::filesystem::path path;
        if (!cfg["output"]["path"].is_null()) {
            path = cfg["output"]["path"].get<std::string>();
        } else {
            std::string dir = ".";
            if (!cfg["output"]["dir"].is_null())
                dir = cfg["output"]["dir"].get<std::string>();
            else if (char const* env = std::getenv(io::output_dir_env); env && *env)
                dir = env;
            std::string stem = command;
            std::replace(stem.begin(), stem.end(), ' ', '_');
            path = std::filesystem::path(dir) / (stem + "." + format);
        }

        io::Table table;
        if (command == "threshold") table = cmd_threshold(cfg);
        if (command == "xsec") table = cmd_xsec(cfg);
        if (command == "rate") table = cmd_rate(cfg);
        if (command == "sensitivity") table = cmd_sensitivity(cfg);
        if (command == "flux") table = cmd_flux(cfg);
        if (command == "tof") table = cmd_tof(cfg);
        if (command == "validate ode") table = cmd_validate_ode(cfg);
        if (command == "validate mc") table = cmd_validate_mc(cfg, threads);

        io::emit(table, path, format, cfg);

        bool const scalar = table.columns.size() == 3 && table.columns[0] == "quantity";
        if (scalar) {
            for (auto const& r : table.rows)
                out << io::cell_text(r[0]) << " = " << io::cell_text(r[1]) << " " << io::cell_text(r[2]) << "\n";
        } else {
            for (auto const& [k, v] : table.metadata)
                if (k.find("rate") != std::string::npos) out << k << " = " << v << "\n";
        }
        out << "wrote " << path.string() << " (" << table.rows.size() << " rows)\n";
        return 0;
    } catch (DimensionError const& e) {
        err << error_json("dimension_error", e.what(), 1, {{"lhs", e.lhs().to_string()}, {"rhs", e.rhs().to_string()}})
            << "\n";
        return 1;
    } catch (ConfigError const& e) {
        err << error_json("config_error", e.what(), 1) << "\n";
        return 1;
    } catch (IoError const& e) {
        err << error_json("io_error", e.what(), 2) << "\n";
        return 2;
    } catch (QuadratureError const& e) {
        err << error_json("quadrature_error", e.what(), 2,
                          {{"partial", e.partial()}, {"error_estimate", e.error_estimate()}})
            << "\n";
        return 2;
    } catch (IntegrationError const& e) {
        auto const& d = e.diagnostics();
        err << error_json("integration_error", e.what(), 2,
                          {{"omega_tau", d.omega_tau},
                           {"accepted_steps", d.accepted_steps},
                           {"rejected_steps", d.rejected_steps}})
            << "\n";
        return 2;
    } catch (NoSensitivityError const& e) {
        err << error_json("no_sensitivity", e.what(), 2) << "\n";
        return 2;
    } catch (NumericError const& e) {
        err << error_json("numeric_error", e.what(), 2) << "\n";
        return 2;
    } catch (json::exception const& e) {
        err << error_json("config_error", e.what(), 1) << "\n";
        return 1;
    } catch (std::exception const& e) {
        err << error_json("internal_error", e.what(), 2) << "\n";
        return 2;
    }
}

}  // namespace trapdet::cli
