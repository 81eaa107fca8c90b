#pragma once

// Brute-force check of the impulse approximation: integrate a trapped
// charge in an isotropic harmonic well while a projectile passes on a
// straight line, and read off the momentum left in the monitored mode.
//
// The equations are solved in scaled variables. With tau = b/v,
// p0 = lambda/(b v) and kappa = lambda/(m b v^2):
//   s = t / tau, Y = x / (kappa b), P = p / p0
//   dY/ds = P
//   dP/ds = -(omega tau)^2 Y + sgn (kappa Y - S) / |kappa Y - S|^3
// where S(s) = (s, 1, 0) is the projectile position in units of b.
// A seventh state accumulates the work done by the Coulomb force.

#include <array>
#include <cmath>
#include <sstream>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "trapdet/error.hpp"
#include "trapdet/kinematics.hpp"
#include "trapdet/species.hpp"
#include "trapdet/units.hpp"

namespace trapdet {

struct OdeScenario {
    double omega;                // rad/s
    ParticleSpecies target;
    ParticleSpecies projectile;
    double b;                    // m
    double v;                    // m/s
    int monitored_axis = 1;      // 0 = along the trajectory, 1 = towards closest approach, 2 = normal
    double rel_tol = 1e-10;
    double window_tau = 50.0;    // integrate t in [-window_tau, +window_tau] * tau

    void validate() const {
        if (!(omega > 0)) throw ConfigError("ode scenario: omega must be positive");
        if (!(b > 0)) throw ConfigError("ode scenario: impact parameter must be positive");
        if (!(v > 0 && v <= 0.1 * constants::c)) throw ConfigError("ode scenario: requires 0 < v <= 0.1 c");
        if (monitored_axis < 0 || monitored_axis > 2) throw ConfigError("ode scenario: monitored axis must be 0, 1 or 2");
        if (!(rel_tol > 0)) throw ConfigError("ode scenario: tolerance must be positive");
        if (!(window_tau > 0)) throw ConfigError("ode scenario: window must be positive");
    }

    double omega_tau() const { return omega * b / v; }
};

struct OdeDiagnostics {
    double omega_tau;
    double kappa;                   // peak recoil scale lambda / (m b v^2)
    long accepted_steps;
    long rejected_steps;
    double energy_balance_residual; // |E_final - W| / max(W, tiny)
    std::array<double, 3> mode_momentum_over_p0; // per axis, in units of lambda/(b v)
};

struct OdeResult {
    Quantity dp_mode;  // momentum amplitude left in the monitored mode
    Quantity dE_mode;
    double ratio_to_exact;  // dp_mode / (2 lambda / (b v))
    OdeDiagnostics diagnostics;
};

class IntegrationError : public NumericError {
  public:
    IntegrationError(std::string const& what, OdeDiagnostics d) : NumericError(what), diagnostics_(d) {}
    OdeDiagnostics const& diagnostics() const { return diagnostics_; }

  private:
    OdeDiagnostics diagnostics_;
};

namespace detail {
using OdeState = std::array<double, 7>;  // Y(3), P(3), W

struct FlybySystem {
    double wt2;    // (omega tau)^2
    double kappa;
    double sign;   // +1 repulsive, -1 attractive, 0 no coupling

    void operator()(OdeState const& x, OdeState& dxdt, double s) const {
        double r[3] = {kappa * x[0] - s, kappa * x[1] - 1.0, kappa * x[2]};
        double const r2 = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
        double const inv_r3 = sign / (r2 * std::sqrt(r2));
        double work = 0.0;
        for (int i = 0; i < 3; ++i) {
            double const f = r[i] * inv_r3;
            dxdt[i] = x[3 + i];
            dxdt[3 + i] = -wt2 * x[i] + f;
            work += x[3 + i] * f;
        }
        dxdt[6] = work;
    }
};

struct StepCounts {
    long accepted = 0;
    long rejected = 0;
};

//! The step controller runs this much tighter than the requested local
//! tolerance so that accumulated quantities (energy over many periods) stay
//! within the nominal tolerance as well.
inline constexpr double controller_safety = 0.1;

//! Controlled Runge-Kutta-Fehlberg 7(8) from s0 to s1. Throws on step underflow.
inline StepCounts integrate_controlled(FlybySystem const& sys, OdeState& x, double s0, double s1, double rel_tol,
                                       double abs_tol, double dt0, OdeDiagnostics const& diag_template) {
    namespace odeint = boost::numeric::odeint;
    auto stepper = odeint::make_controlled<odeint::runge_kutta_fehlberg78<OdeState>>(
        controller_safety * abs_tol, controller_safety * rel_tol);
    StepCounts counts;
    double s = s0;
    double dt = dt0;
    long constexpr max_steps = 50'000'000;
    while (s < s1) {
        if (s + dt > s1) dt = s1 - s;
        auto const res = stepper.try_step(sys, x, s, dt);
        if (res == odeint::success) {
            ++counts.accepted;
        } else {
            ++counts.rejected;
            if (dt < 1e-15 * std::max(1.0, std::abs(s))) {
                OdeDiagnostics d = diag_template;
                d.accepted_steps = counts.accepted;
                d.rejected_steps = counts.rejected;
                std::ostringstream os;
                os << "ode_flyby: step size underflow at s = " << s << " (dt = " << dt << ")";
                throw IntegrationError(os.str(), d);
            }
        }
        if (counts.accepted + counts.rejected > max_steps) {
            OdeDiagnostics d = diag_template;
            d.accepted_steps = counts.accepted;
            d.rejected_steps = counts.rejected;
            throw IntegrationError("ode_flyby: step budget exhausted", d);
        }
    }
    return counts;
}
}  // namespace detail

inline OdeResult ode_flyby(OdeScenario const& sc) {
    sc.validate();
    double const q1q2 = sc.target.charge_e() * sc.projectile.charge_e();
    double const lambda = coulomb_coupling_si(sc.target.charge_e(), sc.projectile.charge_e());
    if (!(lambda > 0)) throw ConfigError("ode scenario: both particles must be charged");
    double const m = sc.target.mass_kg();
    double const wt = sc.omega_tau();
    double const kappa = lambda / (m * sc.b * sc.v * sc.v);
    double const p0 = lambda / (sc.b * sc.v);

    detail::FlybySystem const sys{wt * wt, kappa, q1q2 > 0 ? 1.0 : -1.0};
    detail::OdeState x{};
    OdeDiagnostics diag{wt, kappa, 0, 0, 0.0, {}};

    double const abs_tol = sc.rel_tol * 1e-3;
    double const dt0 = std::min(0.01, 0.01 / std::max(wt, 1e-300));
    auto const counts = detail::integrate_controlled(sys, x, -sc.window_tau, sc.window_tau, sc.rel_tol, abs_tol,
                                                     dt0, diag);
    diag.accepted_steps = counts.accepted;
    diag.rejected_steps = counts.rejected;

    double energy = 0.0;
    for (int i = 0; i < 3; ++i) {
        double const amp2 = x[3 + i] * x[3 + i] + wt * wt * x[i] * x[i];
        diag.mode_momentum_over_p0[static_cast<std::size_t>(i)] = std::sqrt(amp2);
        energy += 0.5 * amp2;
    }
    diag.energy_balance_residual = std::abs(energy - x[6]) / std::max(std::abs(x[6]), 1e-300);
    if (diag.energy_balance_residual > 1e-6 && x[6] > 1e-20) {
        std::ostringstream os;
        os << "ode_flyby: energy balance violated (residual " << diag.energy_balance_residual << ")";
        throw IntegrationError(os.str(), diag);
    }

    double const amp = diag.mode_momentum_over_p0[static_cast<std::size_t>(sc.monitored_axis)];
    double const dp = amp * p0;
    return {Quantity(dp, dim::momentum), Quantity(dp * dp / (2.0 * m), dim::energy), amp / 2.0, diag};
}

//! Relative drift of the oscillator energy with the coupling switched off,
//! starting from a unit momentum kick, after the given number of periods.
inline double free_oscillator_energy_drift(double periods, double rel_tol = 1e-10) {
    detail::FlybySystem const sys{1.0, 0.0, 0.0};
    detail::OdeState x{};
    x[3] = 1.0;
    x[5] = 0.5;
    double const e0 = 0.5 * (x[3] * x[3] + x[5] * x[5]);
    OdeDiagnostics diag{1.0, 0.0, 0, 0, 0.0, {}};
    detail::integrate_controlled(sys, x, 0.0, constants::two_pi * periods, rel_tol, rel_tol * 1e-3, 0.01, diag);
    double e1 = 0.0;
    for (int i = 0; i < 3; ++i) e1 += 0.5 * (x[3 + i] * x[3 + i] + x[i] * x[i]);
    return std::abs(e1 - e0) / e0;
}

//---------------------------------------------------------------------------//
// Sweep over omega tau at fixed b and coupling
//---------------------------------------------------------------------------//
struct RegimeRow {
    double omega_tau;
    double ratio;  // dp_mode / (2 lambda / (b v))
};

//! Varies v = omega b / (omega tau) for each requested omega tau.
inline std::vector<RegimeRow> validate_impulse_regime(OdeScenario base, std::vector<double> const& omega_taus) {
    std::vector<RegimeRow> rows;
    rows.reserve(omega_taus.size());
    for (double wt : omega_taus) {
        if (!(wt > 0)) throw ConfigError("validate_impulse_regime: omega tau must be positive");
        base.v = base.omega * base.b / wt;
        rows.push_back({wt, ode_flyby(base).ratio_to_exact});
    }
    return rows;
}

//! Default sweep: electron at omega = 1e7 rad/s, b = 10 um, projectile
//! charge 1e-12 e. v stays below 0.1 c down to omega tau = 1e-5 and the
//! recoil scale kappa stays below 1e-6 up to omega tau = 10.
inline OdeScenario default_regime_scenario() {
    return {1e7, species::electron(), species::mcp(1.0, 1e-12), 1e-5, 1e6};
}

inline std::vector<double> default_omega_tau_grid() {
    return {1e-5, 3e-5, 1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 0.1, 0.3, 1.0, 3.0, 10.0};
}

}  // namespace trapdet
