#pragma once

// Inversion of event rates into minimum detectable charge and flux.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "trapdet/error.hpp"
#include "trapdet/kinematics.hpp"
#include "trapdet/parallel.hpp"
#include "trapdet/rate.hpp"
#include "trapdet/trap.hpp"
#include "trapdet/velocity.hpp"

namespace trapdet {

//! Observation time and the expected event count required for detection.
//! The default of 3 events is the background-free ~95% CL criterion.
struct Exposure {
    Quantity t_obs = quantity(1.0, units::day_u);
    double n_required = 3.0;

    Exposure() = default;
    Exposure(Quantity t, double n) : t_obs(t), n_required(n) {
        if (t.dimension() != dim::time) throw DimensionError("exposure", t.dimension(), dim::time);
        if (!(t.si() > 0)) throw ConfigError("exposure time must be positive");
        if (!(n > 0)) throw ConfigError("required event count must be positive");
    }
};

//! Minimum detectable charge. q_min itself can exceed the double range for
//! kinematically suppressed points, so the base-10 log is the primary value.
struct MinCharge {
    double log10_q_min;
    RateResult unit_rate;  // rate at q_chi = 1

    double q_min() const { return std::pow(10.0, log10_q_min); }
};

//! q_min = sqrt(n_required / (t_obs R(q = 1))), exact because R scales as q^2.
inline MinCharge min_charge(MdmModel const& model, TrapConfig const& trap, Exposure const& exposure,
                            RateOptions const& opt = {}) {
    auto const unit = integrated_rate(model.with_charge(1.0), trap, opt);
    if (!std::isfinite(unit.log_rate)) {
        throw NoSensitivityError("no sensitivity: zero above-threshold rate for m_chi = " +
                                 std::to_string(in(model.chi().mass(), units::GeV_c2)) + " GeV");
    }
    double const ln_q =
        0.5 * (std::log(exposure.n_required) - std::log(exposure.t_obs.si()) - unit.log_rate);
    return {ln_q / std::log(10.0), unit};
}

//! Velocity distribution family; thermal distributions are rebuilt per mass.
struct ThermalFamily {
    double temperature_K;
};
using DistributionFamily = std::variant<ThermalFamily, StandardHalo, Monochromatic>;

inline VelocityDistribution make_distribution(DistributionFamily const& f, double mass_kg) {
    return std::visit(detail::overloaded{
                          [&](ThermalFamily const& t) -> VelocityDistribution {
                              return MaxwellBoltzmann(t.temperature_K, mass_kg);
                          },
                          [](StandardHalo const& h) -> VelocityDistribution { return h; },
                          [](Monochromatic const& m) -> VelocityDistribution { return m; },
                      },
                      f);
}

inline std::string describe(DistributionFamily const& f) {
    return std::visit(detail::overloaded{
                          [](ThermalFamily const& t) {
                              std::ostringstream os;
                              os << "thermal(T_K=" << t.temperature_K << ")";
                              return os.str();
                          },
                          [](StandardHalo const& h) { return describe(VelocityDistribution(h)); },
                          [](Monochromatic const& m) { return describe(VelocityDistribution(m)); },
                      },
                      f);
}

struct SensitivityPoint {
    double m_chi_gev;
    std::optional<double> log10_q_min;  // empty: no sensitivity at this mass
    double log_rate_unit_charge;        // ln R(q = 1) in 1/s
};

struct SensitivityCurve {
    std::vector<SensitivityPoint> points;
    std::string trap_description;
    std::string distribution;
    Exposure exposure;
    RateOptions options;
    double f_q;
    double rho_gev_cm3;

    bool all_finite() const {
        for (auto const& p : points)
            if (!p.log10_q_min || !std::isfinite(*p.log10_q_min)) return false;
        return true;
    }
};

//! Population parameters that do not vary along a mass sweep.
struct PopulationParams {
    double f_q = MdmModel::default_f_q;
    double rho_gev_cm3 = MdmModel::default_rho_gev_cm3;
};

inline std::string describe(TrapConfig const& trap) {
    std::ostringstream os;
    os.precision(10);
    os << to_string(trap.kind()) << "(species=" << trap.species().label() << ", omega_rad_s=" << trap.omega_si()
       << ", n_sensors=" << trap.n_sensors() << ")";
    return os.str();
}

//! min_charge over a mass grid; dead points are kept with an empty value.
inline SensitivityCurve sensitivity_curve(std::vector<double> const& mass_grid_gev, TrapConfig const& trap,
                                          DistributionFamily const& family, Exposure const& exposure,
                                          PopulationParams const& pop = {}, RateOptions const& opt = {}) {
    if (mass_grid_gev.empty()) throw ConfigError("sensitivity_curve: empty mass grid");
    for (std::size_t i = 0; i < mass_grid_gev.size(); ++i) {
        if (!(mass_grid_gev[i] > 0)) throw ConfigError("sensitivity_curve: masses must be positive");
        if (i > 0 && !(mass_grid_gev[i] > mass_grid_gev[i - 1]))
            throw ConfigError("sensitivity_curve: mass grid must be strictly increasing");
    }
    SensitivityCurve curve{std::vector<SensitivityPoint>(mass_grid_gev.size()),
                           describe(trap),
                           describe(family),
                           exposure,
                           opt,
                           pop.f_q,
                           pop.rho_gev_cm3};
    parallel_for(mass_grid_gev.size(), [&](std::size_t i) {
        double const m_gev = mass_grid_gev[i];
        auto const chi = species::mcp(m_gev, 1.0);
        MdmModel const model(chi, make_distribution(family, chi.mass_kg()), pop.f_q,
                             quantity(pop.rho_gev_cm3, units::GeV_per_cm3));
        SensitivityPoint p{m_gev, std::nullopt, -std::numeric_limits<double>::infinity()};
        try {
            auto const mc = min_charge(model, trap, exposure, opt);
            p.log10_q_min = mc.log10_q_min;
            p.log_rate_unit_charge = mc.unit_rate.log_rate;
        } catch (NoSensitivityError const&) {
        }
        curve.points[i] = p;
    });
    return curve;
}

//---------------------------------------------------------------------------//
// Detectable flux of ambient charged particles
//---------------------------------------------------------------------------//

//! Relativistic speed of a particle with kinetic energy E.
inline double speed_from_kinetic_energy(double E_J, double mass_kg) {
    double const mc2 = mass_kg * constants::c * constants::c;
    double const x = E_J / mc2;
    // 1 - 1/gamma^2 with gamma = 1 + x, kept accurate for x << 1
    return constants::c * std::sqrt(x * (2.0 + x)) / (1.0 + x);
}

struct FluxPoint {
    double E_eV;
    double flux_cm2_day;  // per cm^2 per day
};

struct FluxCurve {
    std::vector<FluxPoint> points;
    std::string trap_description;
    std::string projectile;
    double rate_target_per_day;
};

//! Flux giving rate_target threshold crossings: Phi = rate / sigma_eff(v(E)).
inline FluxCurve flux_curve(std::vector<double> const& energies_eV, TrapConfig const& trap,
                            ParticleSpecies const& projectile, Quantity const& rate_target,
                            ImpulseConvention conv = ImpulseConvention::PaperEq2) {
    if (rate_target.dimension() != dim::frequency)
        throw DimensionError("flux_curve rate", rate_target.dimension(), dim::frequency);
    FluxCurve out{{}, describe(trap), projectile.label(), in(rate_target, units::per_day)};
    out.points.reserve(energies_eV.size());
    for (double E : energies_eV) {
        if (!(E > 0)) throw ConfigError("flux_curve: energies must be positive");
        double const v = speed_from_kinetic_energy(E * constants::eV, projectile.mass_kg());
        auto const sigma = effective_cross_section(trap, projectile.charge_e(), Quantity(v, dim::velocity), conv);
        out.points.push_back({E, in(rate_target / sigma, units::per_cm2_day)});
    }
    return out;
}

}  // namespace trapdet
