#pragma once

// Projectile velocity distributions in the lab frame and the inverse-speed
// integral eta(v_min) = \int_{|v| > v_min} f(v) / |v| d^3v.

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <variant>

#include "trapdet/error.hpp"
#include "trapdet/quadrature.hpp"
#include "trapdet/units.hpp"

namespace trapdet {

using Vec3 = std::array<double, 3>;

inline double norm(Vec3 const& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

//! Thermal gas at rest in the lab.
struct MaxwellBoltzmann {
    double temperature_K;
    double mass_kg;

    MaxwellBoltzmann(double T, double m) : temperature_K(T), mass_kg(m) {
        if (!(T > 0)) throw ConfigError("Maxwell-Boltzmann: temperature must be positive");
        if (!(m > 0)) throw ConfigError("Maxwell-Boltzmann: mass must be positive");
    }

    double kT() const { return constants::k_B * temperature_K; }
    //! One-dimensional velocity dispersion sqrt(kT/m).
    double sigma() const { return std::sqrt(kT() / mass_kg); }
};

//! Truncated isotropic Maxwellian in the galactic frame, seen from a lab
//! moving at v_earth along +z. Speeds in m/s.
struct StandardHalo {
    double v0 = 220e3;
    double v_esc = 544e3;
    double v_earth = 232e3;

    StandardHalo() = default;
    StandardHalo(double v0_, double v_esc_, double v_earth_) : v0(v0_), v_esc(v_esc_), v_earth(v_earth_) {
        if (!(v0 > 0 && v0 < constants::c)) throw ConfigError("halo: v0 must lie in (0, c)");
        if (!(v_esc > 0 && v_esc < constants::c)) throw ConfigError("halo: v_esc must lie in (0, c)");
        if (!(v_earth >= 0 && v_earth < constants::c)) throw ConfigError("halo: v_earth must lie in [0, c)");
    }

    //! Normalization of exp(-u^2/v0^2) over |u| < v_esc.
    double norm_constant() const {
        double const z = v_esc / v0;
        double const n_esc = std::erf(z) - 2.0 * z * std::exp(-z * z) / std::sqrt(std::numbers::pi);
        return 1.0 / (std::pow(std::numbers::pi, 1.5) * v0 * v0 * v0 * n_esc);
    }
};

//! Single speed, either from a fixed direction or isotropic.
struct Monochromatic {
    double v;
    bool isotropic = true;
    Vec3 direction{1.0, 0.0, 0.0};

    explicit Monochromatic(double v_, bool iso = true, Vec3 dir = {1.0, 0.0, 0.0}) : v(v_), isotropic(iso) {
        if (!(v > 0 && v < constants::c)) throw ConfigError("monochromatic: speed must lie in (0, c)");
        double const n = norm(dir);
        if (!(n > 0)) throw ConfigError("monochromatic: direction must be nonzero");
        direction = {dir[0] / n, dir[1] / n, dir[2] / n};
    }
};

using VelocityDistribution = std::variant<MaxwellBoltzmann, StandardHalo, Monochromatic>;

namespace detail {
template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

//! Angular integral of the boosted halo at lab speed v, without the
//! normalization constant: \int dcos exp(-|v + v_E|^2 / v0^2) over the
//! region |v + v_E| < v_esc.
inline double halo_angular(StandardHalo const& h, double v) {
    double const v0sq = h.v0 * h.v0;
    double const ve = h.v_earth;
    if (ve == 0.0) return v < h.v_esc ? 2.0 * std::exp(-v * v / v0sq) : 0.0;
    if (v == 0.0) return ve < h.v_esc ? 2.0 * std::exp(-ve * ve / v0sq) : 0.0;
    double const cmax = std::min(1.0, (h.v_esc * h.v_esc - v * v - ve * ve) / (2.0 * v * ve));
    if (cmax <= -1.0) return 0.0;
    double const beta = 2.0 * v * ve / v0sq;
    // exp(-(v^2+ve^2)/v0^2) * (e^beta - e^{-beta cmax}) / beta, written to avoid overflow
    double const lo = std::exp(-(v - ve) * (v - ve) / v0sq);
    double const hi = std::exp(-(v * v + ve * ve + 2.0 * v * ve * cmax) / v0sq);
    return (lo - hi) / beta;
}

inline double halo_speed_pdf(StandardHalo const& h, double v) {
    return 2.0 * std::numbers::pi * h.norm_constant() * v * v * halo_angular(h, v);
}

inline double halo_eta(StandardHalo const& h, double v_min) {
    double const v_top = h.v_esc + h.v_earth;
    if (v_min >= v_top) return 0.0;
    double const knee = std::abs(h.v_esc - h.v_earth);
    auto f = [&](double v) { return v > 0 ? halo_speed_pdf(h, v) / v : 0.0; };
    quad::Options const opt{.target_rel = 1e-12, .required_rel = 1e-8, .max_depth = 20};
    double total = 0.0;
    if (v_min < knee) {
        total += quad::integrate(f, v_min, knee, opt).value;
        total += quad::integrate(f, knee, v_top, opt).value;
    } else {
        total += quad::integrate(f, v_min, v_top, opt).value;
    }
    return total;
}
}  // namespace detail

//! eta(v_min) in s/m.
inline double eta_si(VelocityDistribution const& dist, double v_min) {
    if (v_min < 0) throw ConfigError("eta: v_min must be non-negative");
    return std::visit(
        detail::overloaded{
            [&](MaxwellBoltzmann const& mb) {
                double const a = mb.mass_kg / (2.0 * mb.kT());
                return std::sqrt(4.0 * a / std::numbers::pi) * std::exp(-a * v_min * v_min);
            },
            [&](StandardHalo const& h) { return detail::halo_eta(h, v_min); },
            [&](Monochromatic const& m) { return m.v > v_min ? 1.0 / m.v : 0.0; },
        },
        dist);
}

//! Natural log of eta; -inf where eta vanishes. Exact for the thermal case
//! even where eta itself underflows.
inline double log_eta_si(VelocityDistribution const& dist, double v_min) {
    if (auto const* mb = std::get_if<MaxwellBoltzmann>(&dist)) {
        double const a = mb->mass_kg / (2.0 * mb->kT());
        return 0.5 * std::log(4.0 * a / std::numbers::pi) - a * v_min * v_min;
    }
    double const e = eta_si(dist, v_min);
    return e > 0 ? std::log(e) : -std::numeric_limits<double>::infinity();
}

inline Quantity eta(VelocityDistribution const& dist, Quantity const& v_min) {
    return {eta_si(dist, v_min.si(dim::velocity)), dim::inverse_velocity};
}

inline Quantity mean_inverse_speed(VelocityDistribution const& dist) {
    return {eta_si(dist, 0.0), dim::inverse_velocity};
}

//! Largest lab-frame speed with nonzero density (infinity for thermal).
inline double max_speed_si(VelocityDistribution const& dist) {
    return std::visit(detail::overloaded{
                          [](MaxwellBoltzmann const&) { return std::numeric_limits<double>::infinity(); },
                          [](StandardHalo const& h) { return h.v_esc + h.v_earth; },
                          [](Monochromatic const& m) { return m.v; },
                      },
                      dist);
}

//! Lab-frame speed density 4 pi v^2 <f> (not defined for monochromatic).
inline double speed_pdf_si(VelocityDistribution const& dist, double v) {
    return std::visit(detail::overloaded{
                          [&](MaxwellBoltzmann const& mb) {
                              double const a = mb.mass_kg / (2.0 * mb.kT());
                              return 4.0 * std::numbers::pi * std::pow(a / std::numbers::pi, 1.5) * v * v *
                                     std::exp(-a * v * v);
                          },
                          [&](StandardHalo const& h) { return detail::halo_speed_pdf(h, v); },
                          [](Monochromatic const&) -> double {
                              throw ConfigError("monochromatic distribution has no speed density");
                          },
                      },
                      dist);
}

//! Human-readable one-line description, used in output metadata.
inline std::string describe(VelocityDistribution const& dist) {
    std::ostringstream os;
    os.precision(10);
    std::visit(detail::overloaded{
                   [&](MaxwellBoltzmann const& mb) {
                       os << "mb(T_K=" << mb.temperature_K << ", m_kg=" << mb.mass_kg << ")";
                   },
                   [&](StandardHalo const& h) {
                       os << "halo(v0_kms=" << h.v0 / 1e3 << ", vesc_kms=" << h.v_esc / 1e3
                          << ", vearth_kms=" << h.v_earth / 1e3 << ")";
                   },
                   [&](Monochromatic const& m) {
                       os << "mono(v_kms=" << m.v / 1e3 << ", " << (m.isotropic ? "isotropic" : "fixed") << ")";
                   },
               },
               dist);
    return os.str();
}

//---------------------------------------------------------------------------//
// Sampling
//---------------------------------------------------------------------------//

//! Draws lab-frame velocity vectors. Holds no reference to a random
//! stream; each call takes the caller's engine, so independent streams
//! can be used from different threads.
class VelocitySampler {
  public:
    explicit VelocitySampler(VelocityDistribution dist) : dist_(std::move(dist)) {}

    template <class Rng>
    Vec3 operator()(Rng& rng) {
        return std::visit(detail::overloaded{
                              [&](MaxwellBoltzmann const& mb) {
                                  double const s = mb.sigma();
                                  return Vec3{s * normal_(rng), s * normal_(rng), s * normal_(rng)};
                              },
                              [&](StandardHalo const& h) {
                                  Vec3 u = galactic(h, rng);
                                  u[2] -= h.v_earth;
                                  return u;
                              },
                              [&](Monochromatic const& m) {
                                  Vec3 const d = m.isotropic ? isotropic_direction(rng) : m.direction;
                                  return Vec3{m.v * d[0], m.v * d[1], m.v * d[2]};
                              },
                          },
                          dist_);
    }

    //! Galactic-frame halo velocity, |u| < v_esc.
    template <class Rng>
    Vec3 galactic(StandardHalo const& h, Rng& rng) {
        double const s = h.v0 / std::numbers::sqrt2;
        for (;;) {
            Vec3 u{s * normal_(rng), s * normal_(rng), s * normal_(rng)};
            if (norm(u) < h.v_esc) return u;
        }
    }

    template <class Rng>
    Vec3 isotropic_direction(Rng& rng) {
        double const cz = 2.0 * uniform_(rng) - 1.0;
        double const phi = 2.0 * std::numbers::pi * uniform_(rng);
        double const sz = std::sqrt(std::max(0.0, 1.0 - cz * cz));
        return {sz * std::cos(phi), sz * std::sin(phi), cz};
    }

    VelocityDistribution const& distribution() const { return dist_; }

  private:
    VelocityDistribution dist_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

template <class Rng>
Vec3 sample(VelocityDistribution const& dist, Rng& rng) {
    VelocitySampler s(dist);
    return s(rng);
}

}  // namespace trapdet
