#pragma once

// Single fly-by Coulomb kinematics in the straight-line, small-angle limit.

#include <cmath>
#include <string_view>

#include "trapdet/species.hpp"
#include "trapdet/trap.hpp"
#include "trapdet/units.hpp"

namespace trapdet {

//! PaperEq2: dp = lambda / (b v). ExactTransverse: the full transverse
//! time integral of the Coulomb force, 2 lambda / (b v).
enum class ImpulseConvention { PaperEq2, ExactTransverse };

//! PaperLinear: v_min = dp / m_target. ReducedMass: v_min = dp / (2 mu).
enum class VminMode { PaperLinear, ReducedMass };

inline double impulse_factor(ImpulseConvention c) { return c == ImpulseConvention::PaperEq2 ? 1.0 : 2.0; }

inline std::string_view to_string(ImpulseConvention c) {
    return c == ImpulseConvention::PaperEq2 ? "paper" : "exact";
}
inline std::string_view to_string(VminMode m) { return m == VminMode::PaperLinear ? "paper" : "reduced-mass"; }

//! Coulomb coupling alpha |q1 q2| hbar c in J m.
inline double coulomb_coupling_si(double q1_e, double q2_e) {
    return constants::alpha_hbar_c * std::abs(q1_e * q2_e);
}

inline Quantity coulomb_coupling(ParticleSpecies const& a, ParticleSpecies const& b) {
    return {coulomb_coupling_si(a.charge_e(), b.charge_e()), dim::coupling};
}

struct FlybyEvent {
    Quantity b;  // impact parameter
    Quantity v;  // relative speed
    ParticleSpecies projectile;
    ParticleSpecies target;

    FlybyEvent(Quantity b_, Quantity v_, ParticleSpecies proj, ParticleSpecies targ)
        : b(b_), v(v_), projectile(std::move(proj)), target(std::move(targ)) {
        if (b.dimension() != dim::length) throw DimensionError("impact parameter", b.dimension(), dim::length);
        if (v.dimension() != dim::velocity) throw DimensionError("speed", v.dimension(), dim::velocity);
        if (!(b.si() > 0)) throw ConfigError("impact parameter must be positive");
        if (!(v.si() > 0 && v.si() < constants::c)) throw ConfigError("speed must lie in (0, c)");
    }
};

inline Quantity impulse(FlybyEvent const& e, ImpulseConvention conv = ImpulseConvention::PaperEq2) {
    return impulse_factor(conv) * coulomb_coupling(e.projectile, e.target) / (e.b * e.v);
}

//! tau = b / v
inline Quantity flyby_time(FlybyEvent const& e) { return e.b / e.v; }

struct ImpulsiveCheck {
    bool ok;
    double margin;  // omega * tau
};

//! The free-particle approximation holds when omega * tau < 0.1.
inline ImpulsiveCheck impulsive_ok(FlybyEvent const& e, TrapConfig const& trap) {
    double const wt = (trap.omega() * flyby_time(e)).si(dim::none);
    return {wt < 0.1, wt};
}

//! Area 4 pi b_th^2 within which a fly-by at speed v kicks the trapped
//! charge above the SQL threshold.
inline Quantity effective_cross_section(TrapConfig const& trap, double q_chi, Quantity const& v,
                                        ImpulseConvention conv = ImpulseConvention::PaperEq2) {
    if (v.dimension() != dim::velocity) throw DimensionError("effective_cross_section", v.dimension(), dim::velocity);
    if (!(v.si() > 0 && v.si() <= constants::c)) throw ConfigError("effective_cross_section: speed must lie in (0, c]");
    double const lambda = impulse_factor(conv) * coulomb_coupling_si(q_chi, trap.species().charge_e());
    double const b_th = lambda / (v.si() * sql_threshold(trap).dp_sql.si());
    return {4.0 * std::numbers::pi * b_th * b_th, dim::area};
}

//! Fraction of isotropic events whose single-axis projection clears threshold.
inline double acceptance(double dp, double dp_th) {
    if (dp_th < 0) throw ConfigError("acceptance: threshold must be non-negative");
    if (dp <= dp_th) return 0.0;
    double const r = dp_th / dp;
    return std::sqrt(1.0 - r * r);
}

inline double acceptance(Quantity const& dp, Quantity const& dp_th) {
    return acceptance(dp.si(dim::momentum), dp_th.si(dim::momentum));
}

//! Minimum projectile speed able to transfer dp to the target (SI doubles).
inline double v_min_si(double dp, double m_target, VminMode mode, double m_projectile) {
    if (mode == VminMode::PaperLinear) return dp / m_target;
    double const mu = m_target * m_projectile / (m_target + m_projectile);
    return dp / (2.0 * mu);
}

//! Inverse of v_min_si: largest dp reachable at speed v.
inline double dp_max_si(double v, double m_target, VminMode mode, double m_projectile) {
    if (mode == VminMode::PaperLinear) return v * m_target;
    double const mu = m_target * m_projectile / (m_target + m_projectile);
    return 2.0 * mu * v;
}

inline Quantity v_min(Quantity const& dp, ParticleSpecies const& target, VminMode mode,
                      ParticleSpecies const& projectile) {
    double const p = dp.si(dim::momentum);
    if (p < 0) throw ConfigError("v_min: momentum must be non-negative");
    return {v_min_si(p, target.mass_kg(), mode, projectile.mass_kg()), dim::velocity};
}

}  // namespace trapdet
