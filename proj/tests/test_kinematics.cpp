#include <cmath>
#include <random>

#include <boost/math/quadrature/sinh_sinh.hpp>
#include <gtest/gtest.h>

#include "trapdet/kinematics.hpp"

using namespace trapdet;

namespace {
constexpr double alpha_hbar_c = 7.2973525693e-3 * 1.054571817e-34 * 299792458.0;
constexpr double c = 299792458.0;
constexpr double eV = 1.602176634e-19;

FlybyEvent electron_event(double b, double v, double q = 1.0) {
    return {Quantity(b, dim::length), Quantity(v, dim::velocity), species::mcp(1.0, q), species::electron()};
}
}  // namespace

TEST(Impulse, DefaultConventionExample) {
    auto const e = electron_event(100e-9, 1e-3 * c);
    double const expected = alpha_hbar_c / (100e-9 * 1e-3 * c);
    auto const dp = impulse(e, ImpulseConvention::PaperEq2);
    EXPECT_NEAR(dp.si(), expected, 1e-14 * expected);
    EXPECT_NEAR(dp.si(), 7.7e-27, 0.01e-27);
    EXPECT_NEAR(in(dp, units::eV_c), 14.4, 0.05);
}

TEST(Impulse, DoublingImpactParameterHalves) {
    auto const a = impulse(electron_event(1e-7, 1e5)).si();
    auto const b = impulse(electron_event(2e-7, 1e5)).si();
    EXPECT_NEAR(a / b, 2.0, 1e-14);
}

// Transverse force lambda b / (b^2 + v^2 t^2)^{3/2} integrated over all t.
TEST(Impulse, ExactConventionMatchesTimeIntegral) {
    double const b = 100e-9;
    double const v = 1e-3 * c;
    double const lambda = alpha_hbar_c;
    boost::math::quadrature::sinh_sinh<double> integrator;
    double const tau = b / v;
    // integrate in s = t / tau for conditioning
    double const integral =
        tau * integrator.integrate([&](double s) { return lambda * b / std::pow(b * b + v * v * tau * tau * s * s, 1.5); });
    auto const exact = impulse(electron_event(b, v), ImpulseConvention::ExactTransverse).si();
    EXPECT_NEAR(exact / integral, 1.0, 1e-10);
    EXPECT_NEAR(exact / impulse(electron_event(b, v)).si(), 2.0, 1e-15);
}

TEST(FlybyTime, Examples) {
    auto const e = electron_event(1e-6, 1e5);
    EXPECT_NEAR(flyby_time(e).si(), 1e-11, 1e-25);
    auto const ok = impulsive_ok(e, TrapConfig::with_omega(species::electron(), 1e9));
    EXPECT_TRUE(ok.ok);
    EXPECT_NEAR(ok.margin, 0.01, 1e-15);
    auto const bad = impulsive_ok(e, TrapConfig::with_omega(species::electron(), 1e12));
    EXPECT_FALSE(bad.ok);
    EXPECT_NEAR(bad.margin, 10.0, 1e-12);
}

TEST(FlybyEvent, RejectsInvalidInput) {
    EXPECT_THROW(electron_event(0.0, 1e5), ConfigError);
    EXPECT_THROW(electron_event(1e-6, c), ConfigError);
    EXPECT_THROW(electron_event(1e-6, -1.0), ConfigError);
}

TEST(EffectiveCrossSection, FortyNanometerSquaredPin) {
    auto const t = TrapConfig::with_omega(species::electron(), 1e9);
    auto const s = effective_cross_section(t, 1.0, quantity(1.0, units::c_u));
    EXPECT_NEAR(in(s, units::nm2), 38.8, 0.05 * 38.8);
    // independent arithmetic: 4 pi x0^2 alpha^2 with x0^2 = hbar / (2 m omega)
    double const x0sq = 1.054571817e-34 / (2 * 9.1093837015e-31 * 1e9);
    double const alpha = 7.2973525693e-3;
    EXPECT_NEAR(s.si() / (4 * M_PI * x0sq * alpha * alpha), 1.0, 1e-12);
}

TEST(EffectiveCrossSection, Scalings) {
    auto const e = species::electron();
    auto const v = quantity(0.01, units::c_u);
    auto const s1 = effective_cross_section(TrapConfig::with_omega(e, 1e9), 1.0, v).si();
    auto const s2 = effective_cross_section(TrapConfig::with_omega(e, 2e9), 1.0, v).si();
    EXPECT_NEAR(s1 / s2, 2.0, 1e-13);
    auto const sq = effective_cross_section(TrapConfig::with_omega(e, 1e9), 1e-2, v).si();
    EXPECT_NEAR(sq / s1, 1e-4, 1e-17);
    EXPECT_THROW(effective_cross_section(TrapConfig::with_omega(e, 1e9), 1.0, quantity(0.0, units::m_per_s)),
                 ConfigError);
}

TEST(Acceptance, Examples) {
    EXPECT_EQ(acceptance(1.0, 1.0), 0.0);
    EXPECT_EQ(acceptance(0.5, 1.0), 0.0);
    EXPECT_NEAR(acceptance(1e12, 1.0), 1.0, 1e-15);
    EXPECT_NEAR(acceptance(2.0, 1.0), std::sqrt(3.0) / 2.0, 1e-15);
    EXPECT_NEAR(acceptance(2.0, 1.0), 0.866, 0.001);
    EXPECT_EQ(acceptance(1.0, 0.0), 1.0);
    EXPECT_THROW(acceptance(1.0, -1.0), ConfigError);
}

TEST(VMin, Examples) {
    auto const e = species::electron();
    auto const chi = species::mcp(1.0, 1.0);
    EXPECT_EQ(v_min(quantity(0.0, units::eV_c), e, VminMode::PaperLinear, chi).si(), 0.0);
    // 0.511 keV/c on an electron of 510.999 keV
    auto const v = v_min(quantity(0.51099895, units::keV_c), e, VminMode::PaperLinear, chi);
    EXPECT_NEAR(v.si() / c, 1e-3, 1e-11);
    auto const heavy = species::mcp(1e6, 1.0);
    auto const lin = v_min(quantity(1.0, units::eV_c), e, VminMode::PaperLinear, heavy).si();
    auto const red = v_min(quantity(1.0, units::eV_c), e, VminMode::ReducedMass, heavy).si();
    EXPECT_NEAR(red / lin, 0.5, 1e-9);
    EXPECT_THROW(v_min(quantity(-1.0, units::eV_c), e, VminMode::PaperLinear, chi), ConfigError);
}

TEST(KinematicsProperty, Invariants) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> lb(-9.0, -4.0);
    std::uniform_real_distribution<double> lv(2.0, 8.0);
    std::uniform_real_distribution<double> lq(-6.0, 0.0);
    std::uniform_real_distribution<double> lw(4.0, 11.0);
    std::uniform_real_distribution<double> k(0.1, 10.0);
    for (int i = 0; i < 500; ++i) {
        double const b = std::pow(10.0, lb(rng));
        double const v = std::pow(10.0, lv(rng));
        double const q = std::pow(10.0, lq(rng));
        double const kk = k(rng);
        if (kk * v >= c) continue;
        auto const base = impulse(electron_event(b, v, q)).si();
        auto const scaled = impulse(electron_event(kk * b, kk * v, q)).si();
        EXPECT_NEAR(scaled * kk * kk / base, 1.0, 1e-12);
        auto const exact = impulse(electron_event(b, v, q), ImpulseConvention::ExactTransverse).si();
        EXPECT_NEAR(exact / base, 2.0, 1e-15);

        auto const t = TrapConfig::with_omega(species::electron(), std::pow(10.0, lw(rng)));
        auto const x0 = sql_threshold(t).ground_state_size.si();
        double const a = 7.2973525693e-3 * q * c / v;
        auto const sp = effective_cross_section(t, q, Quantity(v, dim::velocity)).si();
        EXPECT_NEAR(sp / (4 * M_PI * x0 * x0 * a * a), 1.0, 1e-10);
        auto const se = effective_cross_section(t, q, Quantity(v, dim::velocity), ImpulseConvention::ExactTransverse).si();
        EXPECT_NEAR(se / sp, 4.0, 1e-12);
    }
}

TEST(KinematicsProperty, AcceptanceMonotoneAndBounded) {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    for (int i = 0; i < 1000; ++i) {
        double const th = u(rng);
        double const a = u(rng);
        double const b = a + u(rng);
        double const fa = acceptance(a, th);
        double const fb = acceptance(b, th);
        EXPECT_GE(fa, 0.0);
        EXPECT_LE(fb, 1.0);
        EXPECT_LE(fa, fb);
    }
}
