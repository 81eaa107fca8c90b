#include <random>

#include <gtest/gtest.h>

#include "trapdet/species.hpp"
#include "trapdet/units.hpp"

using namespace trapdet;

TEST(Units, GeVToKilogram) {
    // e * 1e9 / c^2 with CODATA values
    double const expected = 1.602176634e-19 * 1e9 / (299792458.0 * 299792458.0);
    auto const q = quantity(1.0, units::GeV_c2);
    EXPECT_NEAR(in(q, units::kg), expected, 1e-15 * expected);
    EXPECT_NEAR(in(q, units::kg), 1.7827e-27, 1e-4 * 1.7827e-27);
}

TEST(Units, IdentityConversion) {
    auto const q = quantity(1.0, units::m);
    auto const x = convert(q, units::m);
    EXPECT_EQ(x.value, 1.0);
    EXPECT_EQ(x.unit->id, "m");
}

TEST(Units, HbarTimesRateIsEnergy) {
    Quantity const hbar(constants::hbar, dim::action);
    auto const E = hbar * quantity(1e9, units::per_s);
    EXPECT_EQ(E.dimension(), dim::energy);
    EXPECT_NEAR(in(E, units::eV_u), 6.582119569e-7, 1e-15);
}

TEST(Units, ConvertRejectsDimensionMismatch) {
    try {
        convert(quantity(1.0, units::m), units::eV_u);
        FAIL() << "expected DimensionError";
    } catch (DimensionError const& e) {
        EXPECT_EQ(e.lhs(), dim::length);
        EXPECT_EQ(e.rhs(), dim::energy);
        EXPECT_NE(std::string(e.what()).find("L^1"), std::string::npos);
    }
}

TEST(Units, UnitLookup) {
    EXPECT_EQ(unit("GeV/c^2").dim, dim::mass);
    EXPECT_EQ(unit("rad/s").dim, dim::frequency);
    EXPECT_THROW(unit("furlong"), ConfigError);
}

TEST(Units, AdditionRequiresMatchingDimensions) {
    auto const a = quantity(1.0, units::m);
    auto const b = quantity(1.0, units::s);
    EXPECT_THROW(a + b, DimensionError);
    EXPECT_THROW(a - b, DimensionError);
    EXPECT_THROW((void)(a < b), DimensionError);
    EXPECT_DOUBLE_EQ((a + quantity(2.0, units::cm)).si(), 1.02);
}

TEST(Units, SqrtNeedsEvenExponents) {
    EXPECT_EQ(sqrt(quantity(4.0, units::m2)).dimension(), dim::length);
    EXPECT_DOUBLE_EQ(sqrt(quantity(4.0, units::m2)).si(), 2.0);
    EXPECT_THROW(sqrt(quantity(4.0, units::m)), DimensionError);
}

TEST(Units, ThermalEnergy) {
    EXPECT_NEAR(in(thermal_energy(300.0), units::eV_u), 300.0 * 1.380649e-23 / 1.602176634e-19, 1e-15);
    EXPECT_THROW(thermal_energy(0.0), ConfigError);
}

// dim(a*b) = dim(a) + dim(b); dim(a/b) = dim(a) - dim(b)
TEST(UnitsProperty, DimensionAlgebra) {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> e(-3, 3);
    std::uniform_real_distribution<double> v(0.1, 10.0);
    for (int i = 0; i < 500; ++i) {
        Dimension da{{e(rng), e(rng), e(rng), e(rng)}};
        Dimension db{{e(rng), e(rng), e(rng), e(rng)}};
        Quantity const a(v(rng), da);
        Quantity const b(v(rng), db);
        auto const p = a * b;
        auto const q = a / b;
        for (std::size_t k = 0; k < 4; ++k) {
            EXPECT_EQ(p.dimension().exp[k], da.exp[k] + db.exp[k]);
            EXPECT_EQ(q.dimension().exp[k], da.exp[k] - db.exp[k]);
        }
        if (da == db) {
            EXPECT_NO_THROW(a + b);
        } else {
            EXPECT_THROW(a + b, DimensionError);
        }
    }
}

// SI -> natural -> SI and unit -> SI -> unit round trips.
TEST(UnitsProperty, RoundTrips) {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> e(-3, 3);
    std::uniform_real_distribution<double> lv(-30.0, 30.0);
    for (int i = 0; i < 500; ++i) {
        Dimension d{{e(rng), e(rng), e(rng), e(rng)}};
        Quantity const q(std::pow(10.0, lv(rng)), d);
        auto const nv = to_natural(q);
        auto const back = from_natural(nv, d);
        EXPECT_NEAR(back.si(), q.si(), 1e-12 * std::abs(q.si()));
        EXPECT_EQ(back.dimension(), d);
    }
    for (auto const& u : units::catalog) {
        Quantity const q(3.7 * u.si_factor, u.dim);
        auto const x = convert(q, u);
        EXPECT_NEAR(x.to_quantity().si(), q.si(), 1e-12 * std::abs(q.si())) << u.id;
    }
}

TEST(Units, NaturalUnitsSpotValues) {
    // electron mass ~ 511 keV, 1 m ~ 5.068e6 / eV
    auto const me = to_natural(quantity(constants::m_e, units::kg));
    EXPECT_EQ(me.ev_power, 1);
    EXPECT_NEAR(me.value, 510998.95, 0.01);
    auto const meter = to_natural(quantity(1.0, units::m));
    EXPECT_EQ(meter.ev_power, -1);
    EXPECT_NEAR(meter.value, 1.0 / 1.97326980459e-7, 1.0);
    EXPECT_THROW(from_natural({1.0, 2}, dim::length), ConfigError);
}

TEST(Species, Catalog) {
    auto const e = species::electron();
    EXPECT_NEAR(e.mass_kg(), 9.109e-31, 1e-34);
    EXPECT_EQ(e.charge_e(), -1.0);

    auto const be = species::beryllium9_ion();
    EXPECT_NEAR(be.mass_kg(), 9.012 * 1.66053906660e-27, 1e-40);
    EXPECT_NEAR(be.mass_kg(), 9.012 * 1.6605e-27, 1e-4 * be.mass_kg());
    EXPECT_EQ(be.charge_e(), 1.0);

    auto const all = species::builtin();
    EXPECT_GE(all.size(), 3u);
    EXPECT_EQ(species::by_name("proton").label(), "proton");
    EXPECT_THROW(species::by_name("muon"), ConfigError);
}

TEST(Species, CustomConstructorEchoesFields) {
    auto const s = species::custom(quantity(1.0, units::GeV_c2), 1e-3, "chi");
    EXPECT_DOUBLE_EQ(s.mass_kg(), constants::GeV_per_c2);
    EXPECT_EQ(s.charge_e(), 1e-3);
    EXPECT_EQ(s.label(), "chi");
}

TEST(Species, RejectsNonPositiveMass) {
    EXPECT_THROW(species::custom(quantity(0.0, units::kg), 1.0), ConfigError);
    EXPECT_THROW(species::custom(quantity(1.0, units::m), 1.0), DimensionError);
}
