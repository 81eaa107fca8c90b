#pragma once

// Two-trap time-of-flight coincidence: resolution and baseline sizing.
// Nonrelativistic throughout; inputs above 5% of the rest energy are flagged.

#include <cmath>

#include "trapdet/species.hpp"
#include "trapdet/trap.hpp"
#include "trapdet/units.hpp"

namespace trapdet {

struct TofSetup {
    TrapConfig trap;
    Quantity baseline;
    ParticleSpecies projectile;

    TofSetup(TrapConfig t, Quantity L, ParticleSpecies p)
        : trap(std::move(t)), baseline(L), projectile(std::move(p)) {
        if (L.dimension() != dim::length) throw DimensionError("baseline", L.dimension(), dim::length);
        if (!(L.si() > 0)) throw ConfigError("baseline must be positive");
    }
};

inline constexpr double tof_relativistic_fraction = 0.05;

//! dv = v^2 dT / L with dT = 2 pi / omega.
inline Quantity velocity_resolution(TofSetup const& s, Quantity const& v) {
    double const vs = v.si(dim::velocity);
    if (!(vs > 0 && vs < constants::c)) throw ConfigError("velocity_resolution: speed must lie in (0, c)");
    return v * v * s.trap.period() / s.baseline;
}

struct BaselineResult {
    Quantity baseline;
    bool relativistic_warning;
};

//! L = (2E)^{3/2} dT / (m^{1/2} dE)
inline BaselineResult required_baseline(Quantity const& E, Quantity const& dE, TrapConfig const& trap,
                                        ParticleSpecies const& projectile) {
    double const e = E.si(dim::energy);
    double const de = dE.si(dim::energy);
    if (!(e > 0 && de > 0)) throw ConfigError("required_baseline: energies must be positive");
    double const m = projectile.mass_kg();
    double const L = std::pow(2.0 * e, 1.5) * trap.period().si() / (std::sqrt(m) * de);
    bool const rel = e > tof_relativistic_fraction * projectile.rest_energy().si();
    return {Quantity(L, dim::length), rel};
}

//! dE = m v dv with v = sqrt(2E/m); the algebraic inverse of required_baseline.
inline Quantity energy_resolution(TofSetup const& s, Quantity const& E) {
    double const e = E.si(dim::energy);
    if (!(e > 0)) throw ConfigError("energy_resolution: energy must be positive");
    double const m = s.projectile.mass_kg();
    Quantity const v(std::sqrt(2.0 * e / m), dim::velocity);
    return s.projectile.mass() * v * velocity_resolution(s, v);
}

}  // namespace trapdet
