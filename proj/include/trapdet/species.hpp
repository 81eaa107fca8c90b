#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "trapdet/units.hpp"

namespace trapdet {

//! A charged particle: trapped target or passing projectile.
class ParticleSpecies {
  public:
    ParticleSpecies(Quantity mass, double charge_e, std::string label)
        : mass_(mass), charge_e_(charge_e), label_(std::move(label)) {
        if (mass.dimension() != dim::mass) throw DimensionError("species mass", mass.dimension(), dim::mass);
        if (!(mass.si() > 0)) throw ConfigError("species '" + label_ + "': mass must be positive");
    }

    Quantity mass() const { return mass_; }
    double mass_kg() const { return mass_.si(); }
    //! Charge in units of the elementary charge; may be fractional or negative.
    double charge_e() const { return charge_e_; }
    std::string const& label() const { return label_; }

    //! Rest energy m c^2.
    Quantity rest_energy() const { return mass_ * Quantity(constants::c * constants::c, dim::velocity.scaled(2)); }

    ParticleSpecies with_charge(double q) const { return {mass_, q, label_}; }
    ParticleSpecies with_mass(Quantity m) const { return {m, charge_e_, label_}; }

  private:
    Quantity mass_;
    double charge_e_;
    std::string label_;
};

namespace species {
inline ParticleSpecies electron() { return {quantity(constants::m_e, units::kg), -1.0, "electron"}; }
inline ParticleSpecies proton() { return {quantity(constants::m_p, units::kg), 1.0, "proton"}; }
//! Singly charged beryllium-9 ion, mass 9.012 u.
inline ParticleSpecies beryllium9_ion() { return {quantity(9.012, units::amu), 1.0, "Be9+"}; }
inline ParticleSpecies custom(Quantity mass, double charge_e, std::string label = "custom") {
    return {mass, charge_e, std::move(label)};
}
//! Millicharged projectile of the given mass in GeV/c^2.
inline ParticleSpecies mcp(double mass_gev, double charge_e = 1.0) {
    return {quantity(mass_gev, units::GeV_c2), charge_e, "chi"};
}

inline std::vector<ParticleSpecies> builtin() { return {electron(), proton(), beryllium9_ion()}; }

//! Look up a builtin species by label; accepts a few common aliases.
inline ParticleSpecies by_name(std::string_view name) {
    if (name == "electron" || name == "e" || name == "e-") return electron();
    if (name == "proton" || name == "p") return proton();
    if (name == "Be9+" || name == "be9" || name == "beryllium" || name == "Be") return beryllium9_ion();
    throw ConfigError("unknown species '" + std::string(name) + "'");
}
}  // namespace species

}  // namespace trapdet
