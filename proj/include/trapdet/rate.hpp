#pragma once

// Millicharged dark matter event rates on a trapped charge.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "trapdet/error.hpp"
#include "trapdet/kinematics.hpp"
#include "trapdet/quadrature.hpp"
#include "trapdet/species.hpp"
#include "trapdet/trap.hpp"
#include "trapdet/units.hpp"
#include "trapdet/velocity.hpp"

namespace trapdet {

struct RateOptions {
    ImpulseConvention impulse = ImpulseConvention::PaperEq2;
    VminMode vmin = VminMode::PaperLinear;
    bool apply_acceptance = true;
};

//! Charged dark-matter population seen by the detector.
class MdmModel {
  public:
    static constexpr double default_f_q = 4e-3;
    static constexpr double default_rho_gev_cm3 = 0.3;

    MdmModel(ParticleSpecies chi, VelocityDistribution dist, double f_q = default_f_q,
             Quantity rho_dm = quantity(default_rho_gev_cm3, units::GeV_per_cm3))
        : chi_(std::move(chi)), dist_(std::move(dist)), f_q_(f_q), rho_dm_(rho_dm) {
        if (!(chi_.charge_e() > 0)) throw ConfigError("mDM charge q_chi must be positive");
        if (!(f_q > 0 && f_q <= 1)) throw ConfigError("charged fraction f_q must lie in (0, 1]");
        if (rho_dm.dimension() != dim::mass_density) throw DimensionError("rho_dm", rho_dm.dimension(), dim::mass_density);
        if (!(rho_dm.si() > 0)) throw ConfigError("dark matter density must be positive");
    }

    //! Convenience: projectile of mass m_chi_gev and charge q_chi.
    static MdmModel make(double m_chi_gev, double q_chi, VelocityDistribution dist, double f_q = default_f_q) {
        return {species::mcp(m_chi_gev, q_chi), std::move(dist), f_q};
    }

    ParticleSpecies const& chi() const { return chi_; }
    double q_chi() const { return chi_.charge_e(); }
    double f_q() const { return f_q_; }
    Quantity rho_dm() const { return rho_dm_; }
    VelocityDistribution const& distribution() const { return dist_; }

    MdmModel with_charge(double q) const { return {chi_.with_charge(q), dist_, f_q_, rho_dm_}; }
    MdmModel with_distribution(VelocityDistribution d) const { return {chi_, std::move(d), f_q_, rho_dm_}; }
    MdmModel with_f_q(double f) const { return {chi_, dist_, f, rho_dm_}; }
    MdmModel with_rho(Quantity rho) const { return {chi_, dist_, f_q_, rho}; }

  private:
    ParticleSpecies chi_;
    VelocityDistribution dist_;
    double f_q_;
    Quantity rho_dm_;
};

//! n_chi = f_q rho_dm / m_chi
inline Quantity number_density(MdmModel const& m) { return m.f_q() * m.rho_dm() / m.chi().mass(); }

//! Effective coupling lambda entering the rate, including the impulse
//! convention factor, in J m.
inline double rate_coupling_si(MdmModel const& m, TrapConfig const& trap, ImpulseConvention conv) {
    return impulse_factor(conv) * coulomb_coupling_si(m.q_chi(), trap.species().charge_e());
}

namespace detail {
//! log of dR/d(ln dp) = dp * dR/ddp, per sensor, in 1/s.
inline double log_rate_per_log_dp(MdmModel const& m, TrapConfig const& trap, RateOptions const& opt,
                                  double log_n, double log_dp) {
    double const lambda = rate_coupling_si(m, trap, opt.impulse);
    double const dp = std::exp(log_dp);
    double const vmin = v_min_si(dp, trap.species().mass_kg(), opt.vmin, m.chi().mass_kg());
    return log_n + std::log(2.0 * std::numbers::pi * lambda * lambda) - 2.0 * log_dp +
           log_eta_si(m.distribution(), vmin);
}
}  // namespace detail

//! dR/d(dp) = n 2 pi lambda^2 / dp^3 eta(v_min(dp)), per sensor, 1/s per (kg m/s).
inline Quantity differential_rate(MdmModel const& m, TrapConfig const& trap, Quantity const& dp,
                                  RateOptions const& opt = {}) {
    double const p = dp.si(dim::momentum);
    if (!(p > 0)) throw ConfigError("differential_rate: momentum transfer must be positive");
    double const log_n = std::log(number_density(m).si());
    double const lr = detail::log_rate_per_log_dp(m, trap, opt, log_n, std::log(p));
    return {std::exp(lr) / p, dim::rate_per_momentum};
}

struct RateResult {
    Quantity rate;         // events / s, all sensors
    double log_rate;       // ln(rate in 1/s); finite even where rate underflows
    Quantity dp_threshold;
    Quantity dp_max;       // kinematic end point (infinite for thermal tails)
    double error_estimate; // absolute, 1/s
    RateOptions options;
};

//! Events per second above the SQL threshold, integrating the differential
//! rate in ln(dp). The integral is split into chunks of doubling width,
//! starting from the local decay length at threshold, and stops at the
//! kinematic end point or once a chunk adds less than 1e-9 of the total.
inline RateResult integrated_rate(MdmModel const& m, TrapConfig const& trap, RateOptions const& opt = {}) {
    double constexpr inf = std::numeric_limits<double>::infinity();
    double const dp_th = sql_threshold(trap).dp_sql.si();
    double const m_t = trap.species().mass_kg();
    double const dp_top = dp_max_si(max_speed_si(m.distribution()), m_t, opt.vmin, m.chi().mass_kg());
    double const n_sens = trap.n_sensors();

    RateResult out{Quantity(0.0, dim::frequency), -inf, Quantity(dp_th, dim::momentum),
                   Quantity(dp_top, dim::momentum), 0.0, opt};
    if (!(dp_top > dp_th)) return out;

    double const log_n = std::log(number_density(m).si());
    double const u0 = std::log(dp_th);
    double const d_top = std::log(dp_top / dp_th);
    double const log_eta0 = log_eta_si(m.distribution(), v_min_si(dp_th, m_t, opt.vmin, m.chi().mass_kg()));
    double const s0 = detail::log_rate_per_log_dp(m, trap, opt, log_n, u0);
    if (!std::isfinite(s0)) return out;

    // log of the integrand relative to threshold, as a function of d = ln(dp / dp_th);
    // working in offsets keeps the rounding of ln(dp) out of the exponent
    auto g = [&](double d) {
        double const dp = dp_th * std::exp(d);
        double const le = log_eta_si(m.distribution(), v_min_si(dp, m_t, opt.vmin, m.chi().mass_kg()));
        return -2.0 * d + (le - log_eta0);
    };
    auto h = [&](double d) {
        double const s = g(d);
        if (s < -745.0) return 0.0;
        double w = std::exp(s);
        if (opt.apply_acceptance) w *= std::sqrt(-std::expm1(-2.0 * d));
        return w;
    };

    double const probe = 1e-6;
    double const slope = std::abs(g(std::min(probe, 0.5 * d_top))) / std::min(probe, 0.5 * d_top);
    double width = std::min(1.0, 1.0 / std::max(slope, 1e-300));

    quad::Options qopt{.target_rel = 1e-9, .required_rel = 1e-7, .max_depth = 15};
    double total = 0.0;
    double err = 0.0;
    double a = 0.0;
    for (int chunk = 0;; ++chunk) {
        if (chunk > 400) throw QuadratureError("integrated_rate: tail did not converge", total, err);
        double const b = std::min(a + width, d_top);
        quad::Result piece{};
        try {
            // w = sqrt(d) smooths the square-root edge of the acceptance
            auto hw = [&](double w) { return 2.0 * w * h(w * w); };
            qopt.abs_floor = 1e-9 * total;
            piece = quad::integrate(hw, std::sqrt(a), std::sqrt(b), qopt);
        } catch (QuadratureError const& e) {
            throw QuadratureError(std::string("integrated_rate: ") + e.what(),
                                  n_sens * std::exp(s0) * (total + e.partial()), e.error_estimate());
        }
        total += piece.value;
        err += piece.error;
        a = b;
        if (a >= d_top) break;
        if (chunk > 0 && piece.value <= 1e-9 * total) break;
        if (g(a) < -745.0) break;
        width *= 2.0;
    }

    if (total > 0) {
        out.log_rate = std::log(n_sens) + s0 + std::log(total);
        out.rate = Quantity(std::exp(out.log_rate), dim::frequency);
        out.error_estimate = n_sens * std::exp(s0) * err;
    }
    return out;
}

struct SpectrumPoint {
    double dp;    // kg m/s
    double rate;  // dR/ddp, 1/s per kg m/s
};

//! dR/ddp on a log grid from lo to hi (inclusive), per sensor.
inline std::vector<SpectrumPoint> rate_spectrum(MdmModel const& m, TrapConfig const& trap, double lo, double hi,
                                                int n_points, RateOptions const& opt = {}) {
    if (!(lo > 0 && hi > lo) || n_points < 2) throw ConfigError("rate_spectrum: need 0 < lo < hi and >= 2 points");
    std::vector<SpectrumPoint> out;
    out.reserve(static_cast<std::size_t>(n_points));
    double const step = std::log(hi / lo) / (n_points - 1);
    for (int i = 0; i < n_points; ++i) {
        double const dp = lo * std::exp(step * i);
        out.push_back({dp, differential_rate(m, trap, Quantity(dp, dim::momentum), opt).si()});
    }
    return out;
}

}  // namespace trapdet
