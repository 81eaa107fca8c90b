#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "trapdet/trap.hpp"

using namespace trapdet;

namespace {
constexpr double hbar = 1.054571817e-34;
constexpr double me = 9.1093837015e-31;
constexpr double c = 299792458.0;
constexpr double eV = 1.602176634e-19;
}  // namespace

TEST(SqlThreshold, ElectronAtOneGigaRadPerSecond) {
    auto const r = sql_threshold(TrapConfig::with_omega(species::electron(), 1e9));
    double const dp = std::sqrt(2.0 * hbar * me * 1e9);
    EXPECT_NEAR(r.dp_sql.si(), dp, 1e-14 * dp);
    EXPECT_NEAR(in(r.dp_sql, units::eV_c), 0.82, 0.005);
    EXPECT_NEAR(dp * c / eV, 0.8199, 1e-3);
    EXPECT_NEAR(in(r.energy_threshold, units::ueV), 0.658, 0.001);
    EXPECT_NEAR(r.ground_state_size.si(), std::sqrt(hbar / (2 * me * 1e9)), 1e-20);
}

TEST(SqlThreshold, EnergyBandOverTrapFrequencies) {
    auto const lo = sql_threshold(TrapConfig::with_omega(species::electron(), 1e7)).energy_threshold;
    auto const hi = sql_threshold(TrapConfig::with_omega(species::electron(), 1e10)).energy_threshold;
    EXPECT_NEAR(in(lo, units::neV), 6.58, 0.01);
    EXPECT_NEAR(in(hi, units::ueV), 6.58, 0.01);
}

TEST(SqlThreshold, QuadruplingOmegaDoublesThreshold) {
    for (auto const& s : species::builtin()) {
        auto const a = sql_threshold(TrapConfig::with_omega(s, 3e6)).dp_sql.si();
        auto const b = sql_threshold(TrapConfig::with_omega(s, 12e6)).dp_sql.si();
        EXPECT_NEAR(b / a, 2.0, 1e-14);
    }
}

TEST(TrapConfig, FrequencyConventions) {
    auto const t = TrapConfig::from_frequency_hz(species::electron(), 100e6);
    EXPECT_NEAR(t.omega_si(), 2 * M_PI * 100e6, 1e-3);
    EXPECT_NEAR(t.period().si(), 10e-9, 1e-22);
    EXPECT_THROW(TrapConfig::with_omega(species::electron(), 0.0), ConfigError);
    EXPECT_THROW(TrapConfig::with_omega(species::electron(), 1e6).with_n_sensors(0), ConfigError);
    EXPECT_THROW(TrapConfig(TrapKind::Paul, quantity(1.0, units::m), species::electron()), DimensionError);
}

TEST(EnergyDeposit, Examples) {
    auto const e = species::electron();
    auto const t = TrapConfig::with_omega(e, 1e9);
    auto const r = sql_threshold(t);
    EXPECT_NEAR(energy_deposit(r.dp_sql, e).si() / r.energy_threshold.si(), 1.0, 1e-12);
    EXPECT_EQ(energy_deposit(quantity(0.0, units::eV_c), e).si(), 0.0);
    // (1e3 eV)^2 / (2 * 510998.95 eV)
    EXPECT_NEAR(in(energy_deposit(quantity(1.0, units::keV_c), e), units::eV_u), 1e6 / (2 * 510998.95), 1e-9);
    EXPECT_NEAR(in(energy_deposit(quantity(1.0, units::keV_c), e), units::eV_u), 0.978, 0.001);
    EXPECT_THROW(energy_deposit(quantity(-1.0, units::eV_c), e), ConfigError);
}

TEST(DutyCycle, Examples) {
    auto const e = species::electron();
    auto const base = TrapConfig::with_omega(e, 2 * M_PI * 18e6);
    auto const two_per_day = base.with_heating(quantity(1.8, units::mm), quantity(2.0, units::per_day));
    EXPECT_NEAR(in(duty_cycle_max(two_per_day), units::day_u), 0.5, 1e-12);

    auto const one_per_s = base.with_heating(quantity(1.8, units::mm), quantity(1.0, units::per_s));
    EXPECT_NEAR(duty_cycle_max(one_per_s).si(), 1.0, 1e-12);

    auto const ion = TrapConfig::with_omega(species::beryllium9_ion(), 6.28e6)
                         .with_heating(quantity(50.0, units::um), quantity(3.0, units::per_s));
    EXPECT_NEAR(quality_factor(ion), 6.28e6 / 3.0, 1e-6);
    EXPECT_GT(quality_factor(ion), 1e5);

    EXPECT_THROW(duty_cycle_max(base), ConfigError);
}

TEST(HeatingRate, QuarticDistanceAndMassScaling) {
    auto const ion = species::beryllium9_ion();
    auto const ref = TrapConfig::with_omega(ion, 2 * M_PI * 1e6)
                         .with_heating(quantity(50.0, units::um), quantity(3.0, units::per_s));
    auto const twice = scale_heating_rate(ref, quantity(100.0, units::um), ion);
    EXPECT_NEAR(twice.si(), 3.0 / 16.0, 1e-15);

    auto const cm = scale_heating_rate(ref, quantity(1.0, units::cm), ion);
    EXPECT_NEAR(cm.si() / 3.0, 6.25e-10, 1e-22);
    // a few phonons per second becomes well under a few per day at d = 1 cm
    EXPECT_LT(in(cm, units::per_day), 3.0);

    EXPECT_DOUBLE_EQ(scale_heating_rate(ref, quantity(50.0, units::um), ion).si(), 3.0);

    auto const electron = scale_heating_rate(ref, quantity(50.0, units::um), species::electron());
    EXPECT_NEAR(electron.si() / 3.0, ion.mass_kg() / me, 1e-9 * ion.mass_kg() / me);

    EXPECT_THROW(scale_heating_rate(ref, quantity(0.0, units::m), ion), ConfigError);
    EXPECT_THROW(scale_heating_rate(TrapConfig::with_omega(ion, 1e6), quantity(1.0, units::m), ion), ConfigError);
}

TEST(TrapProperty, SqlConsistency) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> lw(3.0, 12.0);
    std::uniform_real_distribution<double> lm(-31.0, -24.0);
    for (int i = 0; i < 300; ++i) {
        auto const s = species::custom(Quantity(std::pow(10.0, lm(rng)), dim::mass), 1.0);
        auto const t = TrapConfig::with_omega(s, std::pow(10.0, lw(rng)));
        auto const r = sql_threshold(t);
        EXPECT_NEAR((r.dp_sql * r.ground_state_size).si() / hbar, 1.0, 1e-12);
        EXPECT_NEAR(energy_deposit(r.dp_sql, s).si() / (hbar * t.omega_si()), 1.0, 1e-12);
    }
}

TEST(TrapProperty, HeatingScalingIsMultiplicative) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> f(0.2, 5.0);
    auto const ion = species::beryllium9_ion();
    for (int i = 0; i < 200; ++i) {
        double const d0 = 50e-6;
        double const a = f(rng);
        double const b = f(rng);
        auto const ref = TrapConfig::with_omega(ion, 1e6).with_heating(Quantity(d0, dim::length),
                                                                        quantity(2.0, units::per_s));
        auto const step1 = scale_heating_rate(ref, Quantity(a * d0, dim::length), ion);
        auto const mid = ref.with_heating(Quantity(a * d0, dim::length), step1);
        auto const step2 = scale_heating_rate(mid, Quantity(a * b * d0, dim::length), ion);
        auto const direct = scale_heating_rate(ref, Quantity(a * b * d0, dim::length), ion);
        EXPECT_NEAR(step2.si() / direct.si(), 1.0, 1e-12);
    }
}
