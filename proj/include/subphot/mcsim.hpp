#ifndef SUBPHOT_MCSIM_HPP
#define SUBPHOT_MCSIM_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "subphot/fit.hpp"

namespace subphot {

// Counter-based splittable RNG: per-trial streams come from hashing
// (master seed, trial index), so trials are reproducible independent of
// execution order.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double next_double() {  // [0,1)
        return double(next_u64() >> 11) * 0x1.0p-53;
    }
    double next_open() {  // (0,1)
        return (double(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }
    static std::uint64_t derive(std::uint64_t master, std::uint64_t index) {
        SplitMix64 h(master ^ (0x85ebca6b7b2ae35dULL + index * 0xc2b2ae3d27d4eb4fULL));
        return h.next_u64();
    }

private:
    std::uint64_t state_;
};

namespace rng {

inline double normal(SplitMix64& g) {
    // Box-Muller
    double u1 = g.next_open();
    double u2 = g.next_open();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

// Exact for small means (Knuth), Hormann PTRS rejection for large ones.
inline std::uint64_t poisson(SplitMix64& g, double mean) {
    if (mean <= 0.0) return 0;
    if (mean < 30.0) {
        double L = std::exp(-mean);
        std::uint64_t k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= g.next_open();
        } while (p > L);
        return k - 1;
    }
    const double b = 0.931 + 2.53 * std::sqrt(mean);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    while (true) {
        double u = g.next_double() - 0.5;
        double v = g.next_open();
        double us = 0.5 - std::abs(u);
        double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= v_r) return std::uint64_t(k);
        if (k < 0.0 || (us < 0.013 && v > us)) continue;
        double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
        double rhs = -mean + k * std::log(mean) - std::lgamma(k + 1.0);
        if (lhs <= rhs) return std::uint64_t(k);
    }
}

} // namespace rng

// Optional periodic rectangular envelope for pulsed pair sources.
struct PulseEnvelope {
    double duty = 1.0;    // fraction of the period carrying pairs
    double period = 0.0;  // s
};

struct SimConfig {
    double pair_rate = 0.0;    // mean pairs/s at the source
    double duration = 0.0;     // s
    double transmittance = 1.0;  // per-photon survival
    double beam_area = 0.0;    // A (m^2)
    double pairing_area = 0.0; // A_E (m^2)
    double sigma1 = 0.0;       // interaction area (m^2)
    double T_A = 0.0;          // coincidence window (s)
    double T_E = 0.0;          // twin jitter full width (s)
    std::optional<PulseEnvelope> envelope;
    std::uint64_t seed = 0;    // mandatory
    std::uint64_t trials = 1;

    void validate() const {
        if (!(pair_rate >= 0.0) || !(duration > 0.0))
            throw std::invalid_argument("SimConfig: need pair_rate >= 0 and duration > 0");
        if (!(transmittance >= 0.0 && transmittance <= 1.0))
            throw std::invalid_argument("SimConfig: transmittance must lie in [0,1]");
        if (!(beam_area > 0.0) || !(pairing_area > 0.0) || !(sigma1 >= 0.0))
            throw std::invalid_argument("SimConfig: areas must be positive");
        if (T_A < 0.0 || T_E < 0.0)
            throw std::invalid_argument("SimConfig: time windows must be nonnegative");
        if (seed == 0)
            throw std::invalid_argument("SimConfig: a nonzero seed is mandatory");
        if (envelope && !(envelope->duty > 0.0 && envelope->duty <= 1.0 && envelope->period > 0.0))
            throw std::invalid_argument("SimConfig: envelope needs duty in (0,1] and period > 0");
        if (trials < 1) throw std::invalid_argument("SimConfig: trials must be >= 1");
    }
};

struct SimOutcome {
    std::uint64_t twin_events = 0;
    std::uint64_t accidental_events = 0;
    std::uint64_t single_absorptions = 0;  // surviving photons (linear channel)
    double twin_rate = 0.0, twin_rate_err = 0.0;            // 1/s
    double accidental_rate = 0.0, accidental_rate_err = 0.0;
    double single_rate = 0.0, single_rate_err = 0.0;
    std::vector<std::uint64_t> trial_seeds;
};

namespace detail_sim {

struct Photon {
    double t;
    double x, y;
    std::uint64_t parent;
};

// Transverse coordinates live on a periodic square of area A, so pair
// probabilities are exactly area ratios (a disc would bias the
// coincidence coefficient by edge effects of order r1/R_beam).
inline void run_trial(const SimConfig& cfg, std::uint64_t trial_seed, SimOutcome& acc) {
    SplitMix64 g(trial_seed);
    const double L = std::sqrt(cfg.beam_area);
    const double r_pair = std::sqrt(cfg.pairing_area / M_PI);
    const double r1sq = cfg.sigma1 / M_PI;  // squared pairing distance

    std::uint64_t n_pairs = rng::poisson(g, cfg.pair_rate * cfg.duration);
    std::vector<Photon> photons;
    photons.reserve(std::size_t(2.2 * double(n_pairs) * cfg.transmittance) + 16);

    auto wrap = [L](double v) {
        v = std::fmod(v, L);
        return v < 0.0 ? v + L : v;
    };
    for (std::uint64_t p = 0; p < n_pairs; ++p) {
        double t;
        if (cfg.envelope) {
            // pairs arrive only while the envelope is open
            double open_time = cfg.duration * cfg.envelope->duty;
            double u = g.next_double() * open_time;
            double per_period = cfg.envelope->period * cfg.envelope->duty;
            double nper = std::floor(u / per_period);
            t = nper * cfg.envelope->period + std::fmod(u, per_period);
        } else {
            t = g.next_double() * cfg.duration;
        }
        double x = g.next_double() * L, y = g.next_double() * L;
        // twin offset uniform in the pairing disc, jitter uniform in +/- T_E/2
        double rp = r_pair * std::sqrt(g.next_double());
        double tp = 2.0 * M_PI * g.next_double();
        double dt = (g.next_double() - 0.5) * cfg.T_E;
        bool s1 = g.next_double() < cfg.transmittance;
        bool s2 = g.next_double() < cfg.transmittance;
        if (s1) photons.push_back({t, x, y, p});
        if (s2) photons.push_back({t + dt, wrap(x + rp * std::cos(tp)), wrap(y + rp * std::sin(tp)), p});
    }
    std::sort(photons.begin(), photons.end(),
              [](const Photon& a, const Photon& b) { return a.t < b.t; });

    acc.single_absorptions += photons.size();
    for (std::size_t i = 0; i < photons.size(); ++i) {
        for (std::size_t j = i + 1; j < photons.size(); ++j) {
            if (photons[j].t - photons[i].t > cfg.T_A) break;
            double dx = std::abs(photons[j].x - photons[i].x);
            double dy = std::abs(photons[j].y - photons[i].y);
            dx = std::min(dx, L - dx);
            dy = std::min(dy, L - dy);
            if (dx * dx + dy * dy > r1sq) continue;
            if (photons[i].parent == photons[j].parent)
                ++acc.twin_events;
            else
                ++acc.accidental_events;
        }
    }
}

} // namespace detail_sim

inline SimOutcome simulate_stream(const SimConfig& cfg) {
    cfg.validate();
    SimOutcome out;
    for (std::uint64_t trial = 0; trial < cfg.trials; ++trial) {
        std::uint64_t ts = SplitMix64::derive(cfg.seed, trial);
        out.trial_seeds.push_back(ts);
        detail_sim::run_trial(cfg, ts, out);
    }
    const double total_time = cfg.duration * double(cfg.trials);
    auto rate = [&](std::uint64_t n, double& r, double& err) {
        r = double(n) / total_time;
        err = std::sqrt(double(n)) / total_time;  // Poissonian tally
    };
    rate(out.twin_events, out.twin_rate, out.twin_rate_err);
    rate(out.accidental_events, out.accidental_rate, out.accidental_rate_err);
    rate(out.single_absorptions, out.single_rate, out.single_rate_err);
    return out;
}

struct McCrossover {
    double phi_EC = 0.0;       // photons/m^2 s at the absorber plane
    double phi_EC_err = 0.0;
    bool above_range = false;  // quadratic channel never caught up
    std::vector<double> flux_density;  // sweep record
    std::vector<double> linear_rate, linear_err;
    std::vector<double> quad_rate, quad_err;
};

// Sweeps pair rate, tallies the linear (twin) and quadratic (accidental)
// channels, fits a*phi + b*phi^2 and returns the crossing a/b. Each sweep
// point runs with the same expected pair budget as the base config
// (base.pair_rate * base.duration pairs).
inline McCrossover estimate_crossover_mc(SimConfig base,
                                         const std::vector<double>& pair_rates) {
    if (pair_rates.size() < 3)
        throw std::invalid_argument("estimate_crossover_mc: need >= 3 sweep points");
    McCrossover out;
    const double pair_budget = base.pair_rate * base.duration;
    if (!(pair_budget > 0.0))
        throw std::invalid_argument("estimate_crossover_mc: base config needs a positive pair budget");
    // weighted estimates of a = twin/phi and b = acc/phi^2
    double swa = 0.0, swa_x = 0.0, swb = 0.0, swb_x = 0.0;
    for (double rate : pair_rates) {
        SimConfig cfg = base;
        cfg.pair_rate = rate;
        cfg.duration = pair_budget / rate;
        auto sim = simulate_stream(cfg);
        double phi = cfg.transmittance * 2.0 * rate / cfg.beam_area;
        out.flux_density.push_back(phi);
        out.linear_rate.push_back(sim.twin_rate);
        out.linear_err.push_back(sim.twin_rate_err);
        out.quad_rate.push_back(sim.accidental_rate);
        out.quad_err.push_back(sim.accidental_rate_err);
        if (sim.twin_events > 0) {
            double a = sim.twin_rate / phi;
            double sa = sim.twin_rate_err / phi;
            swa += 1.0 / (sa * sa);
            swa_x += a / (sa * sa);
        }
        if (sim.accidental_events > 0) {
            double b = sim.accidental_rate / (phi * phi);
            double sb = sim.accidental_rate_err / (phi * phi);
            swb += 1.0 / (sb * sb);
            swb_x += b / (sb * sb);
        }
    }
    if (swb == 0.0 || swa == 0.0) {
        out.above_range = true;
        out.phi_EC = std::numeric_limits<double>::infinity();
        return out;
    }
    double a = swa_x / swa, sa = std::sqrt(1.0 / swa);
    double b = swb_x / swb, sb = std::sqrt(1.0 / swb);
    out.phi_EC = a / b;
    out.phi_EC_err = out.phi_EC * std::sqrt((sa / a) * (sa / a) + (sb / b) * (sb / b));
    if (out.phi_EC > out.flux_density.back() * 10.0) out.above_range = true;
    return out;
}

enum class FieldModel { coherent, multimode, thermal };

struct G2Estimate {
    double g2 = 0.0;
    double err = 0.0;
};

// g2_hat = <P^2>/<P>^2 over synthesized intensity samples.
inline G2Estimate sample_g2(FieldModel model, std::size_t samples, std::uint64_t seed,
                            std::size_t mode_count = 1) {
    if (samples < 10000)
        throw std::invalid_argument("sample_g2: need at least 1e4 samples");
    if (model == FieldModel::multimode && mode_count < 1)
        throw std::invalid_argument("sample_g2: multimode needs mode_count >= 1");
    SplitMix64 g(seed ? seed : 0x5eedbeefULL);
    double s1 = 0.0, s2 = 0.0, s4 = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        double p = 0.0;
        switch (model) {
        case FieldModel::coherent:
            p = 1.0;
            break;
        case FieldModel::multimode: {
            double re = 0.0, im = 0.0;
            for (std::size_t m = 0; m < mode_count; ++m) {
                double ph = 2.0 * M_PI * g.next_double();
                re += std::cos(ph);
                im += std::sin(ph);
            }
            p = (re * re + im * im) / double(mode_count);
            break;
        }
        case FieldModel::thermal: {
            double re = rng::normal(g), im = rng::normal(g);
            p = 0.5 * (re * re + im * im);
            break;
        }
        }
        s1 += p;
        s2 += p * p;
        s4 += p * p * p * p;
    }
    double n = double(samples);
    double m1 = s1 / n, m2 = s2 / n;
    G2Estimate out;
    out.g2 = m2 / (m1 * m1);
    // standard error of the m2 estimate dominates
    double var_m2 = (s4 / n - m2 * m2) / n;
    out.err = std::sqrt(std::max(var_m2, 0.0)) / (m1 * m1);
    return out;
}

} // namespace subphot

#endif
