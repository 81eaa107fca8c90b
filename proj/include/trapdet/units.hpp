#pragma once

// Runtime dimension-checked quantities over the base set (M, L, T, Q).
// Values are always stored in SI; other unit systems are views.
// Temperature is not a base dimension: use thermal_energy() to turn
// kelvin into k_B*T.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>

#include "trapdet/error.hpp"

namespace trapdet {

//---------------------------------------------------------------------------//
// Dimension
//---------------------------------------------------------------------------//
struct Dimension {
    std::array<int, 4> exp{};  // mass, length, time, charge

    constexpr int mass() const { return exp[0]; }
    constexpr int length() const { return exp[1]; }
    constexpr int time() const { return exp[2]; }
    constexpr int charge() const { return exp[3]; }

    friend constexpr bool operator==(Dimension const&, Dimension const&) = default;

    friend constexpr Dimension operator+(Dimension a, Dimension const& b) {
        for (std::size_t i = 0; i < 4; ++i) a.exp[i] += b.exp[i];
        return a;
    }
    friend constexpr Dimension operator-(Dimension a, Dimension const& b) {
        for (std::size_t i = 0; i < 4; ++i) a.exp[i] -= b.exp[i];
        return a;
    }
    constexpr Dimension scaled(int k) const {
        Dimension d = *this;
        for (auto& e : d.exp) e *= k;
        return d;
    }

    std::string to_string() const {
        std::ostringstream os;
        os << "[M^" << exp[0] << " L^" << exp[1] << " T^" << exp[2] << " Q^" << exp[3] << "]";
        return os.str();
    }
};

namespace dim {
inline constexpr Dimension none{{0, 0, 0, 0}};
inline constexpr Dimension mass{{1, 0, 0, 0}};
inline constexpr Dimension length{{0, 1, 0, 0}};
inline constexpr Dimension time{{0, 0, 1, 0}};
inline constexpr Dimension charge{{0, 0, 0, 1}};
inline constexpr Dimension frequency{{0, 0, -1, 0}};
inline constexpr Dimension velocity{{0, 1, -1, 0}};
inline constexpr Dimension inverse_velocity{{0, -1, 1, 0}};
inline constexpr Dimension momentum{{1, 1, -1, 0}};
inline constexpr Dimension energy{{1, 2, -2, 0}};
inline constexpr Dimension action{{1, 2, -1, 0}};
inline constexpr Dimension area{{0, 2, 0, 0}};
inline constexpr Dimension number_density{{0, -3, 0, 0}};
inline constexpr Dimension mass_density{{1, -3, 0, 0}};
inline constexpr Dimension flux{{0, -2, -1, 0}};                 // per area per time
inline constexpr Dimension coupling{{1, 3, -2, 0}};              // energy * length
inline constexpr Dimension rate_per_momentum{{-1, -1, 0, 0}};    // (1/s) / (kg m/s)
}  // namespace dim

class DimensionError : public ConfigError {
  public:
    DimensionError(std::string_view op, Dimension lhs, Dimension rhs)
        : ConfigError(std::string(op) + ": dimension mismatch " + lhs.to_string() + " vs " +
                      rhs.to_string()),
          lhs_(lhs),
          rhs_(rhs) {}

    Dimension lhs() const { return lhs_; }
    Dimension rhs() const { return rhs_; }

  private:
    Dimension lhs_;
    Dimension rhs_;
};

//---------------------------------------------------------------------------//
// Quantity
//---------------------------------------------------------------------------//
class Quantity {
  public:
    constexpr Quantity() = default;
    constexpr Quantity(double value, Dimension d) : value_(value), dim_(d) {}

    static constexpr Quantity scalar(double v) { return {v, dim::none}; }

    //! Value in SI base units.
    constexpr double si() const { return value_; }
    constexpr Dimension dimension() const { return dim_; }

    //! SI value, asserting the expected dimension.
    double si(Dimension expected) const {
        if (dim_ != expected) throw DimensionError("si", dim_, expected);
        return value_;
    }

    Quantity& operator+=(Quantity const& o) {
        if (dim_ != o.dim_) throw DimensionError("add", dim_, o.dim_);
        value_ += o.value_;
        return *this;
    }
    Quantity& operator-=(Quantity const& o) {
        if (dim_ != o.dim_) throw DimensionError("subtract", dim_, o.dim_);
        value_ -= o.value_;
        return *this;
    }
    friend Quantity operator+(Quantity a, Quantity const& b) { return a += b; }
    friend Quantity operator-(Quantity a, Quantity const& b) { return a -= b; }
    friend constexpr Quantity operator-(Quantity const& a) { return {-a.value_, a.dim_}; }

    friend constexpr Quantity operator*(Quantity const& a, Quantity const& b) {
        return {a.value_ * b.value_, a.dim_ + b.dim_};
    }
    friend constexpr Quantity operator/(Quantity const& a, Quantity const& b) {
        return {a.value_ / b.value_, a.dim_ - b.dim_};
    }
    friend constexpr Quantity operator*(double k, Quantity const& a) { return {k * a.value_, a.dim_}; }
    friend constexpr Quantity operator*(Quantity const& a, double k) { return {k * a.value_, a.dim_}; }
    friend constexpr Quantity operator/(Quantity const& a, double k) { return {a.value_ / k, a.dim_}; }

    friend bool operator<(Quantity const& a, Quantity const& b) {
        if (a.dim_ != b.dim_) throw DimensionError("compare", a.dim_, b.dim_);
        return a.value_ < b.value_;
    }
    friend bool operator>(Quantity const& a, Quantity const& b) { return b < a; }
    friend bool operator<=(Quantity const& a, Quantity const& b) { return !(b < a); }
    friend bool operator>=(Quantity const& a, Quantity const& b) { return !(a < b); }

    Quantity pow(int n) const { return {std::pow(value_, n), dim_.scaled(n)}; }

  private:
    double value_ = 0.0;
    Dimension dim_{};
};

inline Quantity sqrt(Quantity const& q) {
    Dimension half{};
    for (std::size_t i = 0; i < 4; ++i) {
        if (q.dimension().exp[i] % 2 != 0) throw DimensionError("sqrt", q.dimension(), half);
        half.exp[i] = q.dimension().exp[i] / 2;
    }
    return {std::sqrt(q.si()), half};
}

//---------------------------------------------------------------------------//
// Constants (CODATA 2018, exact where the SI defines them)
//---------------------------------------------------------------------------//
namespace constants {
inline constexpr std::string_view set_id = "CODATA-2018";

inline constexpr double c = 299792458.0;                  // m/s
inline constexpr double hbar = 1.054571817e-34;           // J s
inline constexpr double e = 1.602176634e-19;              // C
inline constexpr double k_B = 1.380649e-23;               // J/K
inline constexpr double alpha = 7.2973525693e-3;
inline constexpr double m_e = 9.1093837015e-31;           // kg
inline constexpr double m_p = 1.67262192369e-27;          // kg
inline constexpr double u = 1.66053906660e-27;            // kg
inline constexpr double eV = e;                           // J
inline constexpr double eV_per_c2 = eV / (c * c);         // kg
inline constexpr double GeV_per_c2 = 1e9 * eV_per_c2;     // kg
inline constexpr double hbar_eVs = hbar / eV;             // eV s
inline constexpr double hbar_c_eVm = hbar * c / eV;       // eV m
inline constexpr double alpha_hbar_c = alpha * hbar * c;  // J m, e^2/(4 pi eps0)
inline constexpr double day = 86400.0;                    // s
inline constexpr double two_pi = 2.0 * std::numbers::pi;
}  // namespace constants

//---------------------------------------------------------------------------//
// Units
//---------------------------------------------------------------------------//
struct Unit {
    std::string_view id;
    double si_factor;  // SI value of one of this unit
    Dimension dim;
};

namespace units {
using namespace constants;
inline constexpr Unit one{"1", 1.0, dim::none};
inline constexpr Unit kg{"kg", 1.0, dim::mass};
inline constexpr Unit eV_c2{"eV/c^2", eV_per_c2, dim::mass};
inline constexpr Unit MeV_c2{"MeV/c^2", 1e6 * eV_per_c2, dim::mass};
inline constexpr Unit GeV_c2{"GeV/c^2", GeV_per_c2, dim::mass};
inline constexpr Unit amu{"u", u, dim::mass};
inline constexpr Unit m{"m", 1.0, dim::length};
inline constexpr Unit cm{"cm", 1e-2, dim::length};
inline constexpr Unit mm{"mm", 1e-3, dim::length};
inline constexpr Unit um{"um", 1e-6, dim::length};
inline constexpr Unit nm{"nm", 1e-9, dim::length};
inline constexpr Unit s{"s", 1.0, dim::time};
inline constexpr Unit ns{"ns", 1e-9, dim::time};
inline constexpr Unit day_u{"day", day, dim::time};
inline constexpr Unit per_s{"1/s", 1.0, dim::frequency};
inline constexpr Unit Hz{"Hz", 1.0, dim::frequency};
inline constexpr Unit rad_per_s{"rad/s", 1.0, dim::frequency};
inline constexpr Unit per_day{"1/day", 1.0 / day, dim::frequency};
inline constexpr Unit m_per_s{"m/s", 1.0, dim::velocity};
inline constexpr Unit km_per_s{"km/s", 1e3, dim::velocity};
inline constexpr Unit c_u{"c", c, dim::velocity};
inline constexpr Unit s_per_m{"s/m", 1.0, dim::inverse_velocity};
inline constexpr Unit J{"J", 1.0, dim::energy};
inline constexpr Unit eV_u{"eV", eV, dim::energy};
inline constexpr Unit neV{"neV", 1e-9 * eV, dim::energy};
inline constexpr Unit ueV{"ueV", 1e-6 * eV, dim::energy};
inline constexpr Unit meV{"meV", 1e-3 * eV, dim::energy};
inline constexpr Unit keV{"keV", 1e3 * eV, dim::energy};
inline constexpr Unit MeV{"MeV", 1e6 * eV, dim::energy};
inline constexpr Unit GeV{"GeV", 1e9 * eV, dim::energy};
inline constexpr Unit kg_m_per_s{"kg*m/s", 1.0, dim::momentum};
inline constexpr Unit eV_c{"eV/c", eV / c, dim::momentum};
inline constexpr Unit keV_c{"keV/c", 1e3 * eV / c, dim::momentum};
inline constexpr Unit m2{"m^2", 1.0, dim::area};
inline constexpr Unit nm2{"nm^2", 1e-18, dim::area};
inline constexpr Unit cm2{"cm^2", 1e-4, dim::area};
inline constexpr Unit per_cm3{"1/cm^3", 1e6, dim::number_density};
inline constexpr Unit per_m3{"1/m^3", 1.0, dim::number_density};
inline constexpr Unit GeV_per_cm3{"GeV/cm^3", GeV_per_c2 * 1e6, dim::mass_density};
inline constexpr Unit per_cm2_day{"1/(cm^2*day)", 1e4 / day, dim::flux};
inline constexpr Unit C{"C", 1.0, dim::charge};
inline constexpr Unit e_u{"e", e, dim::charge};

inline constexpr std::array catalog{
    one,   kg,   eV_c2,  MeV_c2, GeV_c2, amu,         m,       cm,     mm,         um,
    nm,    s,    ns,     day_u,  per_s,  Hz,          rad_per_s, per_day, m_per_s, km_per_s,
    c_u,   s_per_m, J,   eV_u,   neV,    ueV,         meV,     keV,    MeV,        GeV,
    kg_m_per_s, eV_c, keV_c, m2, nm2,    cm2,         per_cm3, per_m3, GeV_per_cm3, per_cm2_day,
    C,     e_u};
}  // namespace units

//! Look up a unit by its id ("eV", "GeV/c^2", "rad/s", ...).
inline Unit const& unit(std::string_view id) {
    for (auto const& u : units::catalog) {
        if (u.id == id) return u;
    }
    throw ConfigError("unknown unit '" + std::string(id) + "'");
}

//! Construct a quantity from a value in the given unit.
inline constexpr Quantity quantity(double value, Unit const& u) {
    return {value * u.si_factor, u.dim};
}

//! A value together with the unit it is expressed in.
struct Expressed {
    double value;
    Unit const* unit;

    Quantity to_quantity() const { return quantity(value, *unit); }
};

//! Express q in the target unit; the dimensions must agree.
inline Expressed convert(Quantity const& q, Unit const& target) {
    if (q.dimension() != target.dim) throw DimensionError("convert", q.dimension(), target.dim);
    return {q.si() / target.si_factor, &target};
}

//! Shorthand for convert(q, u).value.
inline double in(Quantity const& q, Unit const& u) { return convert(q, u).value; }

//---------------------------------------------------------------------------//
// Natural units (hbar = c = 1, charge in units of e): every dimension maps
// to a power of eV, mass -> eV, length and time -> 1/eV.
//---------------------------------------------------------------------------//
struct NaturalValue {
    double value;
    int ev_power;
};

namespace detail {
inline double natural_factor(Dimension d) {
    using namespace constants;
    // SI-per-natural for each base dimension
    double const per_mass = eV_per_c2;      // kg per eV
    double const per_length = hbar_c_eVm;   // m per 1/eV
    double const per_time = hbar_eVs;       // s per 1/eV
    double const per_charge = e;            // C per e
    return std::pow(per_mass, d.mass()) * std::pow(per_length, d.length()) *
           std::pow(per_time, d.time()) * std::pow(per_charge, d.charge());
}
}  // namespace detail

inline NaturalValue to_natural(Quantity const& q) {
    Dimension const d = q.dimension();
    return {q.si() / detail::natural_factor(d), d.mass() - d.length() - d.time()};
}

//! Inverse of to_natural. The SI dimension cannot be recovered from the eV
//! power alone, so it must be supplied.
inline Quantity from_natural(NaturalValue nv, Dimension d) {
    if (nv.ev_power != d.mass() - d.length() - d.time()) {
        throw ConfigError("from_natural: eV power " + std::to_string(nv.ev_power) +
                          " inconsistent with " + d.to_string());
    }
    return {nv.value * detail::natural_factor(d), d};
}

//! k_B * T as an energy.
inline Quantity thermal_energy(double kelvin) {
    if (!(kelvin > 0)) throw ConfigError("temperature must be positive");
    return {constants::k_B * kelvin, dim::energy};
}

}  // namespace trapdet
