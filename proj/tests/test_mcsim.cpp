#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "subphot/absorption.hpp"
#include "subphot/fit.hpp"
#include "subphot/mcsim.hpp"
#include "subphot/sources.hpp"

using namespace subphot;
using Catch::Approx;

namespace {

// geometry where every intact twin within T_A coincides spatially
SimConfig twin_friendly(double pair_rate, double duration, std::uint64_t seed) {
    SimConfig cfg;
    cfg.pair_rate = pair_rate;
    cfg.duration = duration;
    cfg.transmittance = 1.0;
    cfg.beam_area = 1e-6;
    cfg.pairing_area = 1e-8;
    cfg.sigma1 = 1e-8;
    cfg.T_A = 1e-6;
    cfg.T_E = 4e-6;   // min(1, 2 T_A/T_E) = 0.5
    cfg.seed = seed;
    return cfg;
}

} // namespace

TEST_CASE("config validation") {
    auto cfg = twin_friendly(1e4, 1.0, 0);
    CHECK_THROWS_WITH(cfg.validate(), Catch::Matchers::ContainsSubstring("seed"));
    cfg.seed = 7;
    CHECK_NOTHROW(cfg.validate());
    cfg.transmittance = 1.5;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("identical seeds give bitwise-identical outcomes") {
    auto cfg = twin_friendly(2e4, 2.0, 0xBEEF);
    auto a = simulate_stream(cfg);
    auto b = simulate_stream(cfg);
    CHECK(a.twin_events == b.twin_events);
    CHECK(a.accidental_events == b.accidental_events);
    CHECK(a.single_absorptions == b.single_absorptions);
    REQUIRE(a.trial_seeds == b.trial_seeds);

    cfg.seed = 0xBEEF + 1;
    auto c = simulate_stream(cfg);
    CHECK((c.twin_events != a.twin_events || c.single_absorptions != a.single_absorptions));
}

TEST_CASE("zero coincidence window gives zero two-photon events") {
    auto cfg = twin_friendly(5e4, 1.0, 0xABCD);
    cfg.T_A = 0.0;
    auto out = simulate_stream(cfg);
    CHECK(out.twin_events == 0);
    CHECK(out.accidental_events == 0);
    CHECK(out.single_absorptions > 0);
}

TEST_CASE("twin rate matches the window-overlap expectation") {
    // rate = R T^2 (2 T_A/T_E)(sigma1/A_E)
    auto cfg = twin_friendly(5e4, 4.0, 0x1234F00D);
    cfg.transmittance = 0.8;
    auto out = simulate_stream(cfg);
    double expect = cfg.pair_rate * 0.64 * 0.5 * 1.0;
    CHECK(out.twin_rate == Approx(expect).margin(3.0 * out.twin_rate_err));
    // surviving photons ~ 2 R T
    double expect_single = 2.0 * cfg.pair_rate * 0.8;
    CHECK(out.single_rate == Approx(expect_single).margin(3.0 * out.single_rate_err));
}

TEST_CASE("accidental rate matches the quadratic expectation") {
    // acc = Phi^2 T_A sigma1 / A with Phi the surviving photon rate
    auto cfg = twin_friendly(2e5, 2.0, 0xC0FFEE);
    cfg.T_E = 0.01;  // jitter far beyond T_A, small against the duration
    auto out = simulate_stream(cfg);
    double phi_rate = 2.0 * cfg.pair_rate;
    double expect = phi_rate * phi_rate * cfg.T_A * cfg.sigma1 / cfg.beam_area;
    CHECK(out.accidental_rate == Approx(expect).margin(3.0 * out.accidental_rate_err +
                                                       0.02 * expect));
}

TEST_CASE("loss exponents from a transmittance sweep") {
    std::vector<double> ts, twin, single;
    for (double t : {1.0, 0.8, 0.6, 0.4, 0.2}) {
        auto cfg = twin_friendly(3e5, 1.0, 0x5EED0 + std::uint64_t(t * 100));
        cfg.transmittance = t;
        auto out = simulate_stream(cfg);
        ts.push_back(t);
        twin.push_back(out.twin_rate);
        single.push_back(out.single_rate);
    }
    CHECK(power_law_slope(ts, twin) == Approx(2.0).margin(0.05));
    CHECK(power_law_slope(ts, single) == Approx(1.0).margin(0.02));
}

TEST_CASE("mc crossover agrees with the particle-model prediction") {
    auto base = twin_friendly(1e5, 1.0, 0xACE0FBA5E);  // 1e5-pair budget per point
    base.transmittance = 0.8;
    // analytic: phi_EC = T0 sigma_E / sigma2 with sigma_E = sigma2/(A_E T_E);
    // the pair-vs-photon flux bookkeeping makes the uniform-jitter overlap
    // land exactly on this form
    AbsorberSpec ab;
    ab.name = "mc";
    ab.sigma_2p = base.sigma1 * base.sigma1 * base.T_A;
    double sigma_E = sigmaE_from_sigma2(ab, base.pairing_area, base.T_E,
                                        EtpaRegime::broad);
    auto analytic = crossover_flux(ab, sigma_E, base.transmittance, 1.0);

    double r_star = analytic.phi_EC * base.beam_area / (2.0 * base.transmittance);
    std::vector<double> rates;
    for (double f : {0.1, 0.32, 1.0, 3.2, 10.0}) rates.push_back(f * r_star);
    auto mc = estimate_crossover_mc(base, rates);
    CHECK_FALSE(mc.above_range);
    CHECK(mc.phi_EC == Approx(analytic.phi_EC).epsilon(0.10));
}

TEST_CASE("pulsed envelope shifts the crossover by 1/Gamma") {
    auto base = twin_friendly(1e5, 1.0, 0xD1CE);
    base.transmittance = 0.8;
    AbsorberSpec ab;
    ab.name = "mc";
    ab.sigma_2p = base.sigma1 * base.sigma1 * base.T_A;
    double sigma_E = sigmaE_from_sigma2(ab, base.pairing_area, base.T_E,
                                        EtpaRegime::broad);
    auto cw = crossover_flux(ab, sigma_E, base.transmittance, 1.0);
    double r_star = cw.phi_EC * base.beam_area / (2.0 * base.transmittance);

    const double duty = 0.25;  // Gamma = 4
    base.envelope = PulseEnvelope{duty, 2e-4};  // pulses much longer than T_A
    std::vector<double> rates;
    for (double f : {0.025, 0.08, 0.25, 0.8, 2.5}) rates.push_back(f * r_star);
    auto mc = estimate_crossover_mc(base, rates);
    CHECK_FALSE(mc.above_range);
    CHECK(mc.phi_EC == Approx(cw.phi_EC * duty).epsilon(0.15));
}

TEST_CASE("vanishing quadratic channel reports the sentinel") {
    auto base = twin_friendly(1e3, 1.0, 0xFADE);
    base.T_E = 1e-9;   // twins always coincide in time
    base.T_A = 1e-8;   // tiny accidental window at this flux
    auto mc = estimate_crossover_mc(base, {1e2, 1e3, 1e4});
    CHECK(mc.above_range);
    CHECK(std::isinf(mc.phi_EC));
}

TEST_CASE("g2 sampling") {
    auto coh = sample_g2(FieldModel::coherent, 20000, 0x11);
    CHECK(coh.g2 == Approx(1.0).margin(0.01));

    auto mm2 = sample_g2(FieldModel::multimode, 200000, 0x22, 2);
    CHECK(mm2.g2 == Approx(g2_modes(2)).margin(0.03));

    auto mm10 = sample_g2(FieldModel::multimode, 200000, 0x33, 10);
    CHECK(mm10.g2 == Approx(1.9).margin(0.04));

    auto th = sample_g2(FieldModel::thermal, 200000, 0x44);
    CHECK(th.g2 == Approx(2.0).margin(0.05));

    CHECK_THROWS_AS(sample_g2(FieldModel::coherent, 100, 0x55), std::invalid_argument);
}

TEST_CASE("particle-model rates match over a million pairs") {
    // R_E = sigma_E T^2 phi_E and R_C = sigma2 (T phi_E)^2 aggregated over
    // the beam, tallied from one large stream
    auto cfg = twin_friendly(1e6, 1.0, 0x3A11AD);  // 1e6 pairs
    cfg.transmittance = 0.75;
    auto out = simulate_stream(cfg);

    AbsorberSpec ab;
    ab.name = "mc";
    ab.sigma_2p = cfg.sigma1 * cfg.sigma1 * cfg.T_A;
    double sigma_E = sigmaE_from_sigma2(ab, cfg.pairing_area, cfg.T_E, EtpaRegime::broad);
    double phi_source = 2.0 * cfg.pair_rate / cfg.beam_area;
    auto rates = particle_rates(ab, sigma_E, phi_source, cfg.transmittance, 1.0);
    double sites = cfg.beam_area / cfg.sigma1;

    CHECK(out.twin_rate == Approx(sites * rates.R_E).margin(3.0 * out.twin_rate_err));
    CHECK(out.accidental_rate ==
          Approx(sites * rates.R_C).margin(3.0 * out.accidental_rate_err + 0.02 * sites * rates.R_C));
}

TEST_CASE("twin rate is linear and accidental rate quadratic in pair rate") {
    std::vector<double> rates, twin, acc;
    for (double r : {5e4, 1.4e5, 3.8e5, 1e6}) {
        auto cfg = twin_friendly(r, 2e5 / r, 0xCAFE + std::uint64_t(r));
        auto out = simulate_stream(cfg);
        rates.push_back(r);
        twin.push_back(out.twin_rate);
        acc.push_back(out.accidental_rate);
    }
    CHECK(power_law_slope(rates, twin) == Approx(1.0).margin(0.05));
    CHECK(power_law_slope(rates, acc) == Approx(2.0).margin(0.05));
}
