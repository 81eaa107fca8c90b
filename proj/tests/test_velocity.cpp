#include <cmath>
#include <random>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <gtest/gtest.h>

#include "trapdet/species.hpp"
#include "trapdet/velocity.hpp"

using namespace trapdet;

namespace {
constexpr double k_B = 1.380649e-23;
constexpr double GeV = 1.602176634e-10 / (299792458.0 * 299792458.0);

// Oracle: \int_{vmin}^inf 4 pi v^2 f(v) / v dv for the thermal gas.
double mb_eta_quadrature(double T, double m, double vmin) {
    double const a = m / (2.0 * k_B * T);
    double const norm = std::pow(a / M_PI, 1.5);
    boost::math::quadrature::exp_sinh<double> integrator;
    // integrate in units of the thermal speed
    double const s = 1.0 / std::sqrt(a);
    double const x0 = vmin / s;
    double const integral = integrator.integrate([&](double x) { return x * std::exp(-x * x); }, x0,
                                                 std::numeric_limits<double>::infinity());
    return 4.0 * M_PI * norm * s * s * integral;
}

// Closed form of the boosted truncated Maxwellian eta (standard halo).
double halo_eta_closed(StandardHalo const& h, double vmin) {
    double const z = h.v_esc / h.v0;
    double const x = vmin / h.v0;
    double const y = h.v_earth / h.v0;
    double const n_esc = std::erf(z) - 2.0 * z * std::exp(-z * z) / std::sqrt(M_PI);
    double const pre = 1.0 / (2.0 * n_esc * h.v0 * y);
    if (x < z - y)
        return pre * (std::erf(x + y) - std::erf(x - y) - 4.0 / std::sqrt(M_PI) * y * std::exp(-z * z));
    if (x < z + y)
        return pre * (std::erf(z) - std::erf(x - y) - 2.0 / std::sqrt(M_PI) * (z + y - x) * std::exp(-z * z));
    return 0.0;
}
}  // namespace

TEST(Eta, MonochromaticIsInverseSpeed) {
    VelocityDistribution const d = Monochromatic(1e5);
    EXPECT_DOUBLE_EQ(eta_si(d, 0.0), 1e-5);
    EXPECT_DOUBLE_EQ(eta(d, quantity(50.0, units::km_per_s)).si(), 1e-5);
    EXPECT_EQ(eta_si(d, 1e5), 0.0);
    EXPECT_EQ(eta_si(d, 2e5), 0.0);
    EXPECT_DOUBLE_EQ(mean_inverse_speed(d).si(), 1e-5);
}

TEST(Eta, ThermalClosedFormAtZero) {
    for (double T : {4.0, 300.0}) {
        for (double m_gev : {0.1, 1.0, 10.0}) {
            double const m = m_gev * GeV;
            VelocityDistribution const d = MaxwellBoltzmann(T, m);
            double const closed = std::sqrt(2.0 * m / (M_PI * k_B * T));
            EXPECT_NEAR(eta_si(d, 0.0) / closed, 1.0, 1e-14);
            EXPECT_NEAR(eta_si(d, 0.0) / mb_eta_quadrature(T, m, 0.0), 1.0, 1e-6);
            EXPECT_NEAR(mean_inverse_speed(d).si() / mb_eta_quadrature(T, m, 0.0), 1.0, 1e-6);
        }
    }
}

TEST(Eta, ThermalMatchesQuadratureAcrossGrid) {
    double const m = 1.0 * GeV;
    MaxwellBoltzmann const mb(300.0, m);
    VelocityDistribution const d = mb;
    double const vth = std::sqrt(2.0 * k_B * 300.0 / m);
    for (int i = 0; i < 50; ++i) {
        double const vmin = 8.0 * vth * i / 49.0;
        EXPECT_NEAR(eta_si(d, vmin) / mb_eta_quadrature(300.0, m, vmin), 1.0, 1e-6) << vmin;
    }
}

TEST(Eta, HaloQuadratureMatchesClosedForm) {
    StandardHalo const h;
    VelocityDistribution const d = h;
    for (int i = 0; i <= 80; ++i) {
        double const vmin = 800e3 * i / 80.0;
        double const expected = halo_eta_closed(h, vmin);
        double const got = eta_si(d, vmin);
        if (expected > 1e-12) {
            EXPECT_NEAR(got / expected, 1.0, 1e-8) << vmin;
        } else {
            EXPECT_NEAR(got, 0.0, 1e-18) << vmin;
        }
    }
}

TEST(Eta, HaloVanishesBeyondKinematicSupport) {
    StandardHalo const h;
    EXPECT_EQ(eta_si(h, h.v_esc + h.v_earth + 1.0), 0.0);
    EXPECT_GT(mean_inverse_speed(h).si(), 0.0);
    EXPECT_TRUE(std::isfinite(mean_inverse_speed(h).si()));
    // Earth at rest: reduces to the truncated Maxwellian
    StandardHalo const rest(220e3, 544e3, 0.0);
    EXPECT_GT(eta_si(rest, 100e3), 0.0);
    EXPECT_EQ(eta_si(rest, 544e3), 0.0);
}

TEST(Eta, RejectsNegativeVmin) { EXPECT_THROW(eta_si(Monochromatic(1e5), -1.0), ConfigError); }

TEST(VelocityProperty, NormalizationAndMonotonicity) {
    std::vector<VelocityDistribution> dists{MaxwellBoltzmann(300.0, GeV), MaxwellBoltzmann(4.0, 0.01 * GeV),
                                            StandardHalo(), StandardHalo(200e3, 600e3, 100e3)};
    for (auto const& d : dists) {
        boost::math::quadrature::tanh_sinh<double> integrator;
        double const top = std::isfinite(max_speed_si(d)) ? max_speed_si(d) : 0.0;
        double total = 0.0;
        if (top > 0) {
            // split at the halo knee where the density has a kink
            auto const& h = std::get<StandardHalo>(d);
            double const knee = std::abs(h.v_esc - h.v_earth);
            total = integrator.integrate([&](double v) { return speed_pdf_si(d, v); }, 0.0, knee) +
                    integrator.integrate([&](double v) { return speed_pdf_si(d, v); }, knee, top);
        } else {
            boost::math::quadrature::exp_sinh<double> tail;
            double const s = std::get<MaxwellBoltzmann>(d).sigma();
            total = s * tail.integrate([&](double x) { return speed_pdf_si(d, x * s); }, 0.0,
                                       std::numeric_limits<double>::infinity());
        }
        EXPECT_NEAR(total, 1.0, 1e-8) << describe(d);

        double const vmax = std::isfinite(max_speed_si(d)) ? max_speed_si(d) : 10.0 * std::get<MaxwellBoltzmann>(d).sigma();
        double prev = eta_si(d, 0.0);
        EXPECT_TRUE(std::isfinite(prev));
        for (int i = 1; i <= 60; ++i) {
            double const e = eta_si(d, vmax * i / 60.0);
            EXPECT_LE(e, prev * (1.0 + 1e-12)) << describe(d);
            prev = e;
        }
    }
}

TEST(Sample, MonochromaticFixedDirection) {
    std::mt19937_64 rng(1);
    VelocityDistribution const d = Monochromatic(3e5, false, {0.0, 0.0, 2.0});
    for (int i = 0; i < 10; ++i) {
        auto const v = sample(d, rng);
        EXPECT_EQ(v[0], 0.0);
        EXPECT_EQ(v[1], 0.0);
        EXPECT_DOUBLE_EQ(v[2], 3e5);
    }
}

TEST(Sample, MonochromaticIsotropicHasFixedSpeed) {
    std::mt19937_64 rng(2);
    VelocitySampler s(Monochromatic(3e5));
    double mean_z = 0.0;
    int const n = 100000;
    for (int i = 0; i < n; ++i) {
        auto const v = s(rng);
        EXPECT_NEAR(norm(v), 3e5, 1e-9);
        mean_z += v[2] / 3e5;
    }
    EXPECT_NEAR(mean_z / n, 0.0, 5.0 / std::sqrt(3.0 * n));
}

TEST(Sample, ThermalEquipartition) {
    double const m = GeV;
    double const T = 300.0;
    VelocitySampler s(MaxwellBoltzmann(T, m));
    std::mt19937_64 rng(3);
    int const n = 1'000'000;
    double sum = 0.0;
    double sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        auto const v = s(rng);
        double const v2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        sum += v2;
        sum2 += v2 * v2;
    }
    double const mean = sum / n;
    double const se = std::sqrt((sum2 / n - mean * mean) / n);
    double const expected = 3.0 * k_B * T / m;
    EXPECT_LT(std::abs(mean - expected), 5.0 * se);
}

TEST(Sample, HaloRespectsEscapeSpeed) {
    StandardHalo const h;
    VelocitySampler s(h);
    std::mt19937_64 rng(4);
    for (int i = 0; i < 200000; ++i) {
        auto v = s(rng);
        v[2] += h.v_earth;  // back to the galactic frame
        EXPECT_LT(norm(v), h.v_esc);
    }
}

TEST(Sample, DeterministicGivenSeed) {
    VelocitySampler a(StandardHalo{});
    VelocitySampler b(StandardHalo{});
    std::mt19937_64 ra(99);
    std::mt19937_64 rb(99);
    for (int i = 0; i < 1000; ++i) EXPECT_EQ(a(ra), b(rb));
}

// Empirical mean of 1[v > vmin] / v matches eta within 5 standard errors.
TEST(VelocityProperty, SamplingMatchesEta) {
    std::vector<std::pair<VelocityDistribution, std::vector<double>>> cases{
        {MaxwellBoltzmann(300.0, GeV), {0.0, 500.0, 2000.0, 4000.0}},
        {StandardHalo(), {0.0, 200e3, 400e3, 650e3}},
    };
    std::mt19937_64 rng(5);
    int const n = 1'000'000;
    for (auto const& [d, vmins] : cases) {
        VelocitySampler s(d);
        std::vector<double> speeds(n);
        for (auto& v : speeds) v = norm(s(rng));
        for (double vmin : vmins) {
            double sum = 0.0;
            double sum2 = 0.0;
            for (double v : speeds) {
                double const x = v > vmin ? 1.0 / v : 0.0;
                sum += x;
                sum2 += x * x;
            }
            double const mean = sum / n;
            double const se = std::sqrt((sum2 / n - mean * mean) / n);
            EXPECT_LT(std::abs(mean - eta_si(d, vmin)), 5.0 * se) << describe(d) << " vmin=" << vmin;
        }
    }
}

TEST(VelocityDistribution, InvalidParameters) {
    EXPECT_THROW(MaxwellBoltzmann(0.0, GeV), ConfigError);
    EXPECT_THROW(MaxwellBoltzmann(300.0, 0.0), ConfigError);
    EXPECT_THROW(StandardHalo(0.0, 544e3, 232e3), ConfigError);
    EXPECT_THROW(Monochromatic(4e8), ConfigError);
    EXPECT_THROW(Monochromatic(1e5, false, {0.0, 0.0, 0.0}), ConfigError);
    EXPECT_THROW(speed_pdf_si(Monochromatic(1e5), 1e5), ConfigError);
}
