#pragma once

// Monte-Carlo estimate of the momentum-transfer spectrum. Projectile
// velocities are drawn from the model distribution and impact points
// uniformly over a disk transverse to each velocity; each event carries the
// flux weight n v pi b_cut^2, so that sums of weights divided by the sample
// count are rates in 1/s.

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "trapdet/error.hpp"
#include "trapdet/kinematics.hpp"
#include "trapdet/parallel.hpp"
#include "trapdet/rate.hpp"
#include "trapdet/trap.hpp"
#include "trapdet/velocity.hpp"

namespace trapdet {

struct McRun {
    MdmModel model;
    TrapConfig trap;
    std::uint64_t n_samples = 1'000'000;
    std::uint64_t seed = 1;
    //! Sampling disk reaches impulses down to floor_fraction * dp_th at
    //! every sampled speed. Ignored when b_cut is set.
    double floor_fraction = 0.1;
    std::optional<double> b_cut{};  // fixed disk radius in m
    ImpulseConvention impulse = ImpulseConvention::PaperEq2;
    VminMode vmin = VminMode::PaperLinear;
    int bins_per_decade = 10;
    int n_decades = 5;
    Vec3 monitored_axis{0.0, 0.0, 1.0};
    //! Fixed number of independent sub-streams; results do not depend on the
    //! number of worker threads.
    unsigned n_streams = 16;
    unsigned max_threads = 0;  // 0: hardware concurrency

    void validate() const {
        if (n_samples < 1) throw ConfigError("mc: need at least one sample");
        if (b_cut && !(*b_cut > 0)) throw ConfigError("mc: b_cut must be positive");
        if (!(floor_fraction > 0 && floor_fraction <= 1)) throw ConfigError("mc: floor fraction must lie in (0, 1]");
        if (bins_per_decade < 1 || n_decades < 1) throw ConfigError("mc: invalid binning");
        if (n_streams < 1) throw ConfigError("mc: need at least one stream");
        if (!(norm(monitored_axis) > 0)) throw ConfigError("mc: monitored axis must be nonzero");
    }
};

struct McEvent {
    Vec3 velocity;
    double b;        // sampled impact parameter, m
    double dp;       // impulse magnitude, kg m/s
    double dp_axis;  // |projection on the monitored axis|
    double weight;   // n v pi b_cut^2, 1/s
    bool vetoed;     // kinematically forbidden: v <= v_min(dp)
};

//! Deterministic event generator for one sub-stream.
class McEventStream {
  public:
    McEventStream(McRun const& run, std::uint64_t stream_index)
        : run_(run), sampler_(run.model.distribution()) {
        std::seed_seq seq{static_cast<std::uint32_t>(run.seed), static_cast<std::uint32_t>(run.seed >> 32),
                          static_cast<std::uint32_t>(stream_index), static_cast<std::uint32_t>(stream_index >> 32)};
        rng_.seed(seq);
        lambda_ = rate_coupling_si(run.model, run.trap, run.impulse);
        n_ = number_density(run.model).si();
        dp_th_ = sql_threshold(run.trap).dp_sql.si();
        m_t_ = run.trap.species().mass_kg();
        m_p_ = run.model.chi().mass_kg();
        double const a = norm(run.monitored_axis);
        axis_ = {run.monitored_axis[0] / a, run.monitored_axis[1] / a, run.monitored_axis[2] / a};
    }

    McEvent next() {
        McEvent ev{};
        ev.velocity = sampler_(rng_);
        double const v = norm(ev.velocity);
        double const b_cut = run_.b_cut ? *run_.b_cut : lambda_ / (v * run_.floor_fraction * dp_th_);
        ev.b = b_cut * std::sqrt(uniform_(rng_));
        double const phi = 2.0 * std::numbers::pi * uniform_(rng_);

        // orthonormal pair transverse to the velocity
        Vec3 const vh{ev.velocity[0] / v, ev.velocity[1] / v, ev.velocity[2] / v};
        Vec3 const helper = std::abs(vh[0]) < 0.9 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0};
        Vec3 e1 = cross(vh, helper);
        double const n1 = norm(e1);
        e1 = {e1[0] / n1, e1[1] / n1, e1[2] / n1};
        Vec3 const e2 = cross(vh, e1);
        double const c = std::cos(phi);
        double const s = std::sin(phi);
        Vec3 const bhat{c * e1[0] + s * e2[0], c * e1[1] + s * e2[1], c * e1[2] + s * e2[2]};

        ev.dp = lambda_ / (ev.b * v);
        ev.dp_axis = ev.dp * std::abs(bhat[0] * axis_[0] + bhat[1] * axis_[1] + bhat[2] * axis_[2]);
        ev.weight = n_ * v * std::numbers::pi * b_cut * b_cut;
        ev.vetoed = !(v > v_min_si(ev.dp, m_t_, run_.vmin, m_p_));
        return ev;
    }

  private:
    static Vec3 cross(Vec3 const& a, Vec3 const& b) {
        return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
    }

    McRun const& run_;
    VelocitySampler sampler_;
    std::mt19937_64 rng_;
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
    double lambda_ = 0.0;
    double n_ = 0.0;
    double dp_th_ = 0.0;
    double m_t_ = 0.0;
    double m_p_ = 0.0;
    Vec3 axis_{};
};

struct McBin {
    double lo;
    double hi;
    std::uint64_t counts = 0;
    double sum_w = 0.0;
    double sum_w2 = 0.0;
    double sum_w_axial_pass = 0.0;  // weight whose axial projection clears dp_th

    double rate_density(std::uint64_t n) const { return sum_w / (static_cast<double>(n) * (hi - lo)); }
    double stat_err(std::uint64_t n) const { return std::sqrt(sum_w2) / (static_cast<double>(n) * (hi - lo)); }
    //! Empirical single-axis acceptance within this bin.
    double axial_fraction() const { return sum_w > 0 ? sum_w_axial_pass / sum_w : 0.0; }
};

struct McSpectrum {
    std::uint64_t n_samples = 0;
    std::uint64_t n_vetoed = 0;
    std::uint64_t n_below = 0;  // below the first bin
    std::uint64_t n_above = 0;  // beyond the last bin
    double dp_threshold = 0.0;
    std::vector<McBin> bins;        // in total |dp|
    std::vector<McBin> axial_bins;  // in |dp . axis|
    // rates above dp_th, scaled by the number of sensors
    double rate_above = 0.0;
    double rate_above_err = 0.0;
    double rate_axial_above = 0.0;
    double rate_axial_above_err = 0.0;

    void merge(McSpectrum const& o) {
        n_samples += o.n_samples;
        n_vetoed += o.n_vetoed;
        n_below += o.n_below;
        n_above += o.n_above;
        for (std::size_t i = 0; i < bins.size(); ++i) {
            bins[i].counts += o.bins[i].counts;
            bins[i].sum_w += o.bins[i].sum_w;
            bins[i].sum_w2 += o.bins[i].sum_w2;
            bins[i].sum_w_axial_pass += o.bins[i].sum_w_axial_pass;
            axial_bins[i].counts += o.axial_bins[i].counts;
            axial_bins[i].sum_w += o.axial_bins[i].sum_w;
            axial_bins[i].sum_w2 += o.axial_bins[i].sum_w2;
        }
        rate_above += o.rate_above;
        rate_above_err += o.rate_above_err;
        rate_axial_above += o.rate_axial_above;
        rate_axial_above_err += o.rate_axial_above_err;
    }
};

namespace detail {
inline McSpectrum empty_spectrum(McRun const& run, double dp_th) {
    McSpectrum s;
    s.dp_threshold = dp_th;
    double const lo = run.floor_fraction * dp_th;
    int const n = run.bins_per_decade * run.n_decades;
    for (int i = 0; i < n; ++i) {
        double const a = lo * std::pow(10.0, static_cast<double>(i) / run.bins_per_decade);
        double const b = lo * std::pow(10.0, static_cast<double>(i + 1) / run.bins_per_decade);
        s.bins.push_back({a, b});
        s.axial_bins.push_back({a, b});
    }
    return s;
}

inline void fill(McSpectrum& s, McRun const& run, double x, double w, bool axial, bool axial_pass) {
    double const lo = s.bins.front().lo;
    if (x < lo) {
        if (!axial) ++s.n_below;
        return;
    }
    auto const idx = static_cast<std::size_t>(std::floor(std::log10(x / lo) * run.bins_per_decade));
    auto& bins = axial ? s.axial_bins : s.bins;
    if (idx >= bins.size()) {
        if (!axial) ++s.n_above;
        return;
    }
    bins[idx].counts += 1;
    bins[idx].sum_w += w;
    bins[idx].sum_w2 += w * w;
    if (axial_pass) bins[idx].sum_w_axial_pass += w;
}
}  // namespace detail

//! Histogrammed Monte-Carlo estimate of dR/ddp. Bin rate densities are per
//! sensor; rate_above and rate_axial_above include n_sensors.
inline McSpectrum mc_spectrum(McRun const& run) {
    run.validate();
    double const dp_th = sql_threshold(run.trap).dp_sql.si();
    unsigned const n_streams = run.n_streams;
    std::vector<McSpectrum> parts(n_streams, detail::empty_spectrum(run, dp_th));
    // rate sums are accumulated as sum_w and sum_w^2 here and normalized below
    parallel_for(n_streams, [&](std::size_t k) {
        McEventStream stream(run, k);
        std::uint64_t const n_k = run.n_samples / n_streams + (k < run.n_samples % n_streams ? 1 : 0);
        McSpectrum& part = parts[k];
        part.n_samples = n_k;
        for (std::uint64_t i = 0; i < n_k; ++i) {
            McEvent const ev = stream.next();
            if (ev.vetoed) {
                ++part.n_vetoed;
                continue;
            }
            bool const axial_pass = ev.dp_axis > dp_th;
            detail::fill(part, run, ev.dp, ev.weight, false, axial_pass);
            detail::fill(part, run, ev.dp_axis, ev.weight, true, false);
            if (ev.dp > dp_th) {
                part.rate_above += ev.weight;
                part.rate_above_err += ev.weight * ev.weight;
            }
            if (axial_pass) {
                part.rate_axial_above += ev.weight;
                part.rate_axial_above_err += ev.weight * ev.weight;
            }
        }
    }, run.max_threads);

    McSpectrum total = detail::empty_spectrum(run, dp_th);
    for (auto const& p : parts) total.merge(p);

    double const n = static_cast<double>(total.n_samples);
    double const sensors = run.trap.n_sensors();
    auto normalize = [&](double& sum, double& sum2) {
        double const mean = sum / n;
        double const var = std::max(0.0, sum2 / n - mean * mean);
        sum = sensors * mean;
        sum2 = sensors * std::sqrt(var / n);
    };
    normalize(total.rate_above, total.rate_above_err);
    normalize(total.rate_axial_above, total.rate_axial_above_err);
    return total;
}

}  // namespace trapdet
