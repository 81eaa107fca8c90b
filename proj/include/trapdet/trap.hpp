#pragma once

#include <cmath>
#include <optional>
#include <string_view>

#include "trapdet/species.hpp"
#include "trapdet/units.hpp"

namespace trapdet {

enum class TrapKind { Penning, Paul };

inline std::string_view to_string(TrapKind k) { return k == TrapKind::Penning ? "penning" : "paul"; }

//! A single monitored mode of a trapped charge.
//!
//! omega is always an angular frequency in rad/s. Use from_frequency_hz()
//! when a trap is quoted as a cycle frequency.
class TrapConfig {
  public:
    TrapConfig(TrapKind kind, Quantity omega, ParticleSpecies species,
               std::optional<Quantity> electrode_distance = std::nullopt,
               std::optional<Quantity> heating_rate = std::nullopt, int n_sensors = 1)
        : kind_(kind),
          omega_(omega),
          species_(std::move(species)),
          electrode_distance_(electrode_distance),
          heating_rate_(heating_rate),
          n_sensors_(n_sensors) {
        if (omega.dimension() != dim::frequency) throw DimensionError("trap omega", omega.dimension(), dim::frequency);
        if (!(omega.si() > 0)) throw ConfigError("trap omega must be positive");
        if (electrode_distance) {
            if (electrode_distance->dimension() != dim::length)
                throw DimensionError("electrode distance", electrode_distance->dimension(), dim::length);
            if (!(electrode_distance->si() > 0)) throw ConfigError("electrode distance must be positive");
        }
        if (heating_rate) {
            if (heating_rate->dimension() != dim::frequency)
                throw DimensionError("heating rate", heating_rate->dimension(), dim::frequency);
            if (heating_rate->si() < 0) throw ConfigError("heating rate must be non-negative");
        }
        if (n_sensors < 1) throw ConfigError("n_sensors must be >= 1");
    }

    static TrapConfig with_omega(ParticleSpecies s, double omega_rad_s, TrapKind kind = TrapKind::Penning) {
        return {kind, quantity(omega_rad_s, units::rad_per_s), std::move(s)};
    }
    static TrapConfig from_frequency_hz(ParticleSpecies s, double nu_hz, TrapKind kind = TrapKind::Penning) {
        return with_omega(std::move(s), constants::two_pi * nu_hz, kind);
    }

    TrapKind kind() const { return kind_; }
    Quantity omega() const { return omega_; }
    double omega_si() const { return omega_.si(); }
    ParticleSpecies const& species() const { return species_; }
    std::optional<Quantity> electrode_distance() const { return electrode_distance_; }
    std::optional<Quantity> heating_rate() const { return heating_rate_; }
    int n_sensors() const { return n_sensors_; }

    //! Single-shot readout time, one trap period 2 pi / omega.
    Quantity period() const { return Quantity(constants::two_pi / omega_.si(), dim::time); }

    TrapConfig with_n_sensors(int n) const {
        return {kind_, omega_, species_, electrode_distance_, heating_rate_, n};
    }
    TrapConfig with_omega(double omega_rad_s) const {
        return {kind_, quantity(omega_rad_s, units::rad_per_s), species_, electrode_distance_, heating_rate_, n_sensors_};
    }
    TrapConfig with_heating(Quantity d, Quantity gamma) const {
        return {kind_, omega_, species_, d, gamma, n_sensors_};
    }

  private:
    TrapKind kind_;
    Quantity omega_;
    ParticleSpecies species_;
    std::optional<Quantity> electrode_distance_;
    std::optional<Quantity> heating_rate_;
    int n_sensors_;
};

struct ThresholdReport {
    Quantity dp_sql;            // sqrt(2 hbar m omega)
    Quantity energy_threshold;  // hbar omega
    Quantity ground_state_size; // sqrt(hbar / (2 m omega))
};

//! Standard-quantum-limit momentum threshold of the monitored mode.
inline ThresholdReport sql_threshold(TrapConfig const& trap) {
    using constants::hbar;
    double const m = trap.species().mass_kg();
    double const w = trap.omega_si();
    return {
        Quantity(std::sqrt(2.0 * hbar * m * w), dim::momentum),
        Quantity(hbar * w, dim::energy),
        Quantity(std::sqrt(hbar / (2.0 * m * w)), dim::length),
    };
}

//! Kinetic energy dp^2 / 2m deposited by a momentum kick on a free particle.
inline Quantity energy_deposit(Quantity const& dp, ParticleSpecies const& s) {
    if (dp.dimension() != dim::momentum) throw DimensionError("energy_deposit", dp.dimension(), dim::momentum);
    if (dp.si() < 0) throw ConfigError("energy_deposit: momentum must be non-negative");
    return dp * dp / (2.0 * s.mass());
}

//! Quantum quality factor omega / Gamma_Q. Requires a positive heating rate.
inline double quality_factor(TrapConfig const& trap) {
    auto const g = trap.heating_rate();
    if (!g || !(g->si() > 0)) throw ConfigError("quality factor requires a positive heating rate");
    return trap.omega_si() / g->si();
}

//! Longest integration window before ~1 spurious heating phonon: Q / omega = 1 / Gamma_Q.
inline Quantity duty_cycle_max(TrapConfig const& trap) {
    return Quantity(quality_factor(trap) / trap.omega_si(), dim::time);
}

//! Heating rate extrapolated to a new electrode distance and species:
//! Gamma' = Gamma (d / d')^4 (m / m').
inline Quantity scale_heating_rate(TrapConfig const& reference, Quantity const& new_d,
                                   ParticleSpecies const& new_species) {
    auto const d = reference.electrode_distance();
    auto const g = reference.heating_rate();
    if (!d || !g) throw ConfigError("scale_heating_rate: reference trap needs electrode distance and heating rate");
    if (new_d.dimension() != dim::length) throw DimensionError("scale_heating_rate", new_d.dimension(), dim::length);
    if (!(new_d.si() > 0)) throw ConfigError("scale_heating_rate: electrode distance must be positive");
    double const ratio = d->si() / new_d.si();
    double const mass_ratio = reference.species().mass_kg() / new_species.mass_kg();
    return *g * (ratio * ratio * ratio * ratio * mass_ratio);
}

}  // namespace trapdet
